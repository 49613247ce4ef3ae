//! The residue field `k = F_q(t_1..t_m)`, reduction of integral elements and
//! Teichmüller/canonical lifts.

use alloc::vec::Vec;
use core::fmt;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::{Body, Field};
use crate::scalar::{Mono, Scalar, TPoly, MAX_VARS};
use crate::zmod::ZMod;

/// An element of the residue field: coordinates over `F_p(t)` in the basis
/// `1, w, …, w^{f-1}` of `F_q`.
#[derive(Clone)]
pub struct Residue {
    field: Field,
    coords: Vec<Scalar>,
}

fn reduce_scalar(z: &ZMod, zres: &ZMod, s: &Scalar) -> Scalar {
    let red = |t: &TPoly| TPoly(t.0.iter().map(|(m, c)| (*m, (*c % z.p() as u128))).filter(|(_, c)| *c != 0).collect());
    match s {
        Scalar::C(c) => Scalar::C(*c % z.p() as u128),
        Scalar::F(f) => Scalar::normalize(zres, red(&f.num), red(&f.den)),
    }
}

impl Residue {
    pub fn zero(field: &Field) -> Residue {
        Residue { field: field.clone(), coords: alloc::vec![Scalar::ZERO; field.f()] }
    }

    pub fn one(field: &Field) -> Residue {
        let mut r = Residue::zero(field);
        r.coords[0] = Scalar::C(1);
        r
    }

    pub fn from_int(field: &Field, n: i64) -> Residue {
        let mut r = Residue::zero(field);
        r.coords[0] = Scalar::C(n.rem_euclid(field.p() as i64) as u128);
        r
    }

    /// The residue `t̄_{j+1}`.
    pub fn t(field: &Field, j: usize) -> Residue {
        let mut r = Residue::zero(field);
        r.coords[0] = Scalar::t(j);
        r
    }

    /// Builds a residue from `F_p(t)` coordinates.
    pub fn from_coords(field: &Field, coords: Vec<Scalar>) -> Result<Residue> {
        if coords.len() != field.f() {
            return Err(Error::FieldMismatch("residue coordinate count".into()));
        }
        let d = &field.0;
        Ok(Residue { field: field.clone(), coords: coords.iter().map(|s| reduce_scalar(&d.z, &d.zres, s)).collect() })
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn zres(&self) -> &ZMod {
        &self.field.0.zres
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|s| s.is_zero())
    }

    pub fn add(&self, o: &Residue) -> Residue {
        let z = self.zres();
        Residue { field: self.field.clone(), coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(z, b)).collect() }
    }

    pub fn neg(&self) -> Residue {
        let z = self.zres();
        Residue { field: self.field.clone(), coords: self.coords.iter().map(|a| a.neg(z)).collect() }
    }

    pub fn sub(&self, o: &Residue) -> Residue {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Residue) -> Residue {
        let z = self.zres();
        let d = &self.field.0;
        let f = d.f;
        if f == 1 {
            return Residue { field: self.field.clone(), coords: alloc::vec![self.coords[0].mul(z, &o.coords[0])] };
        }
        let g: Vec<Scalar> = d.unram.iter().map(|s| reduce_scalar(&d.z, z, s)).collect();
        let mut acc = alloc::vec![Scalar::ZERO; 2 * f - 1];
        for i in 0..f {
            for j in 0..f {
                acc[i + j] = acc[i + j].add(z, &self.coords[i].mul(z, &o.coords[j]));
            }
        }
        for k in (f..2 * f - 1).rev() {
            let top = core::mem::replace(&mut acc[k], Scalar::ZERO);
            for i in 0..f {
                acc[k - f + i] = acc[k - f + i].sub(z, &g[i].mul(z, &top));
            }
        }
        acc.truncate(f);
        Residue { field: self.field.clone(), coords: acc }
    }

    pub fn pow(&self, mut n: u64) -> Residue {
        let mut acc = Residue::one(&self.field);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        acc
    }

    /// Multiplicative inverse (none for zero).
    pub fn inv(&self) -> Option<Residue> {
        if self.is_zero() {
            return None;
        }
        let z = self.zres();
        if self.field.f() == 1 {
            return Some(Residue { field: self.field.clone(), coords: alloc::vec![self.coords[0].inv(z)?] });
        }
        // Gaussian elimination on the multiplication matrix over F_p(t).
        let f = self.field.f();
        let mut cols = Vec::with_capacity(f);
        for i in 0..f {
            let mut b = Residue::zero(&self.field);
            b.coords[i] = Scalar::C(1);
            cols.push(self.mul(&b).coords);
        }
        let mut mat: Vec<Vec<Scalar>> = (0..f)
            .map(|r| {
                let mut row: Vec<Scalar> = (0..f).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { Scalar::C(1) } else { Scalar::ZERO });
                row
            })
            .collect();
        for c in 0..f {
            let piv = (c..f).find(|&r| !mat[r][c].is_zero())?;
            mat.swap(c, piv);
            let inv = mat[c][c].inv(z)?;
            for k in c..=f {
                mat[c][k] = mat[c][k].mul(z, &inv);
            }
            for r in 0..f {
                if r != c && !mat[r][c].is_zero() {
                    let fct = mat[r][c].clone();
                    for k in c..=f {
                        let t = mat[c][k].mul(z, &fct);
                        mat[r][k] = mat[r][k].sub(z, &t);
                    }
                }
            }
        }
        Some(Residue { field: self.field.clone(), coords: mat.into_iter().map(|r| r[f].clone()).collect() })
    }

    /// Equality in the residue field.
    pub fn equals(&self, o: &Residue) -> bool {
        self.sub(o).is_zero()
    }

    /// Partial derivative `∂/∂t_{j+1}` (coordinate-wise on `F_p(t)`).
    pub fn derivative(&self, j: usize) -> Residue {
        let z = self.zres();
        let coords = self
            .coords
            .iter()
            .map(|s| {
                let (n, d) = (s.numerator(), s.denominator());
                let num = tpoly_deriv(z, &n, j).mul(z, &d).sub(z, &n.mul(z, &tpoly_deriv(z, &d, j)));
                Scalar::normalize(z, num, d.mul(z, &d))
            })
            .collect();
        Residue { field: self.field.clone(), coords }
    }

    /// Elements of `F_q` (no transcendentals), listed for root search.
    pub fn enumerate_constants(field: &Field) -> Vec<Residue> {
        let p = field.p() as u128;
        let f = field.f();
        let total = (p as usize).pow(f as u32);
        (0..total)
            .map(|mut idx| {
                let coords = (0..f)
                    .map(|_| {
                        let c = (idx as u128) % p;
                        idx /= p as usize;
                        Scalar::C(c)
                    })
                    .collect();
                Residue { field: field.clone(), coords }
            })
            .collect()
    }

    /// Whether the residue lies in the constant field `F_q`.
    pub fn is_constant(&self) -> bool {
        self.coords.iter().all(|s| s.is_constant())
    }
}

pub(crate) fn tpoly_deriv(z: &ZMod, t: &TPoly, j: usize) -> TPoly {
    let mut out: Vec<(Mono, u128)> = Vec::new();
    for (m, c) in &t.0 {
        if m[j] == 0 {
            continue;
        }
        let mut m2 = *m;
        m2[j] -= 1;
        let c2 = z.mul(*c, m[j] as u128 % z.modulus());
        if c2 != 0 {
            out.push((m2, c2));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    TPoly(out)
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.field.0;
        let names: Vec<&str> = d.t_names.iter().map(|s| s.as_str()).collect();
        let parts: Vec<alloc::string::String> = self.coords.iter().map(|s| s.fmt_with(&d.zres, &names)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl Elem {
    /// Reduction to the residue field (requires `v ≥ 0`).
    pub fn residue(&self) -> Result<Residue> {
        let fld = self.field().clone();
        if self.is_zero() {
            return Ok(Residue::zero(&fld));
        }
        let v = self.val_int().unwrap();
        if v < 0 {
            return Err(Error::NegativeValuation);
        }
        if v > 0 {
            return Ok(Residue::zero(&fld));
        }
        let d = self.data();
        let w = d.w_part(self.body_raw());
        Residue::from_coords(&fld, w.to_vec())
    }
}

/// Teichmüller lift of a constant `a ∈ F_q` given by a lift's coordinates.
fn teichmuller_coords(field: &Field, coords: &[u128]) -> Vec<Scalar> {
    let d = &field.0;
    let z = &d.z;
    let top = d.top();
    let f = d.f;
    // Work in the level-0 ring W/p^M embedded at the top: raise to q, M times.
    let mut b: Body = d.zero_body(0);
    for (i, c) in coords.iter().enumerate() {
        b[i] = Scalar::C(*c % z.modulus());
    }
    let q = (d.p as u64).pow(f as u32);
    for _ in 0..z.digits() {
        b = d.pow_body(0, &b, q);
    }
    let _ = top;
    b.into_vec()
}

/// Lift of a polynomial over `F_q` to `W[t]` with Teichmüller coefficients:
/// returns per-`w`-coordinate polynomials.
fn lift_poly_coords(field: &Field, per_coord: &[TPoly]) -> Vec<TPoly> {
    let d = &field.0;
    let z = &d.z;
    let f = d.f;
    let mut monos: Vec<Mono> = per_coord.iter().flat_map(|t| t.0.iter().map(|(m, _)| *m)).collect();
    monos.sort();
    monos.dedup();
    let mut out: Vec<Vec<(Mono, u128)>> = alloc::vec![Vec::new(); f];
    for m in monos {
        let cs: Vec<u128> = per_coord
            .iter()
            .map(|t| t.0.iter().find(|(mm, _)| *mm == m).map(|(_, c)| *c).unwrap_or(0))
            .collect();
        let lifted = teichmuller_coords(field, &cs);
        for (i, s) in lifted.into_iter().enumerate() {
            if let Scalar::C(c) = s {
                if c != 0 {
                    out[i].push((m, c));
                }
            }
        }
    }
    let _ = z;
    out.into_iter().map(TPoly).collect()
}

/// Teichmüller / canonical lift: constants of `F_q` lift to Teichmüller
/// representatives, the `t_j` lift to the chosen transcendentals.
pub fn teichmuller_lift(r: &Residue) -> Elem {
    let field = r.field().clone();
    let d = &field.0;
    let z = &d.z;
    let zres = &d.zres;
    // Common denominator of all coordinates (in F_p[t]).
    let mut den = TPoly::constant(1);
    for s in r.coords() {
        den = den.mul(zres, &s.denominator());
    }
    let mut nums = Vec::with_capacity(r.coords().len());
    for s in r.coords() {
        // s = n/d → n · (den/d)
        let n = s.numerator();
        let other = den.exact_div(zres, &s.denominator());
        let scaled = match other {
            Some(o) => n.mul(zres, &o),
            None => {
                // multivariate denominators: use the product of the others
                let mut acc = n.clone();
                for t in r.coords() {
                    if !core::ptr::eq(t, s) {
                        acc = acc.mul(zres, &t.denominator());
                    }
                }
                acc
            }
        };
        nums.push(scaled);
    }
    let lifted_nums = lift_poly_coords(&field, &nums);
    let lifted_den = lift_poly_coords(&field, &[den])[0].clone();
    let mut body = d.zero_body(d.top());
    let den_scalar = Scalar::normalize(z, lifted_den, TPoly::constant(1));
    let den_inv = den_scalar.inv(z).expect("unit denominator");
    for (i, n) in lifted_nums.into_iter().enumerate() {
        body[i] = Scalar::normalize(z, n, TPoly::constant(1)).mul(z, &den_inv);
    }
    let _ = MAX_VARS;
    Elem::from_body(&field, body.into_vec()).expect("dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription, TowerStep};

    #[test]
    fn teichmuller_roundtrip() {
        let k = make_field(&FieldDescription::qp(5, 10).with_step(TowerStep::Transcendentals(1))).unwrap();
        let r = Residue::t(&k, 0).add(&Residue::from_int(&k, 3)).mul(&Residue::from_int(&k, 2));
        let lift = teichmuller_lift(&r);
        assert!(lift.residue().unwrap().equals(&r));
        let c = teichmuller_lift(&Residue::from_int(&k, 2));
        assert!(c.pow(4).unwrap().is_one());
    }
}
