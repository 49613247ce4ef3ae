//! Tower-presented complete discretely valued fields.
//!
//! A field is built from the scalar ring `(Z/p^M)(t_1..t_m)` (Gauss-norm
//! completion, truncated), an optional unramified step `W = S[w]/(g)` of
//! degree `f`, and a chain of Eisenstein steps `ϖ_ℓ^{e_ℓ} + … + E_0 = 0`.
//! Integral elements of the top field are stored as flat vectors of
//! scalars ("bodies") in the mixed-radix basis `w^i ϖ_1^{i_1} ⋯ ϖ_L^{i_L}`;
//! that ring is exact modulo `p^M`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use smallvec::{smallvec, SmallVec};

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::zmod::ZMod;

/// Flat coefficient vector of an integral element.
pub(crate) type Body = SmallVec<[Scalar; 2]>;

/// Number of guard p-digits carried beyond the advertised precision, so
/// that constants obtained by dividing by uniformizers stay exact.
pub const GUARD_DIGITS: u32 = 2;

/// Default precision in π-digits of the top field.
pub const DEFAULT_PRECISION: u32 = 40;

/// One step of a declarative field description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerStep {
    /// Adjoin `m` transcendentals `t_1..t_m` (Gauss-norm completion).
    Transcendentals(usize),
    /// Unramified step: monic integer polynomial, constant coefficient first.
    Unramified(Vec<i64>),
    /// Eisenstein step over the field built so far.
    Eisenstein { name: String, poly: EisensteinPoly },
}

/// Eisenstein polynomial of a tower step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EisensteinPoly {
    /// Monic integer coefficients, constant coefficient first.
    Integers(Vec<i64>),
    /// Polynomial text in the step's own variable name, with coefficients
    /// written in terms of `p`, earlier uniformizer names, `t1..tm`, `w`.
    Text(String),
}

/// A declarative description of a tower field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescription {
    pub p: u64,
    /// Requested precision in π-digits of the top field.
    pub precision: u32,
    pub tower: Vec<TowerStep>,
}

impl FieldDescription {
    /// `Q_p` at the given precision.
    pub fn qp(p: u64, precision: u32) -> Self {
        FieldDescription { p, precision, tower: Vec::new() }
    }

    pub fn with_step(mut self, step: TowerStep) -> Self {
        self.tower.push(step);
        self
    }

    /// Adds an Eisenstein step given by monic integer coefficients.
    pub fn eisenstein_ints(self, name: &str, coeffs: &[i64]) -> Self {
        self.with_step(TowerStep::Eisenstein {
            name: name.to_string(),
            poly: EisensteinPoly::Integers(coeffs.to_vec()),
        })
    }

    /// Adds an Eisenstein step given as polynomial text.
    pub fn eisenstein_text(self, name: &str, text: &str) -> Self {
        self.with_step(TowerStep::Eisenstein {
            name: name.to_string(),
            poly: EisensteinPoly::Text(text.to_string()),
        })
    }
}

/// Data of one Eisenstein level.
#[derive(Clone, Debug)]
pub(crate) struct EisLevel {
    pub e: usize,
    pub name: String,
    /// Non-leading coefficients `E_0..E_{e-1}` as parent-level bodies.
    pub coeffs: Vec<Body>,
    /// `π_parent / ϖ` as a body of this level.
    pub c: Body,
}

pub(crate) struct FieldData {
    pub p: u64,
    pub z: ZMod,
    /// `Z/p`, used for residues.
    pub zres: ZMod,
    pub m: usize,
    pub t_names: Vec<String>,
    pub f: usize,
    /// Monic unramified modulus, constant first (length `f + 1`).
    pub unram: Vec<Scalar>,
    pub levels: Vec<EisLevel>,
    /// `dims[0] = f`, `dims[ℓ] = e_ℓ · dims[ℓ-1]`.
    pub dims: Vec<usize>,
    pub beta: i64,
    /// Advertised relative precision in π-digits of the top field.
    pub cap: i64,
    /// `p / ϖ^β` and its inverse.
    pub p_unit: Body,
    /// `π_parent / ϖ^e` and its inverse (only for fields with a parent).
    pub down: Option<(Body, Body)>,
    pub parent: Option<Field>,
    pub requested: u32,
}

/// A validated tower field. Cheap to clone (reference counted); immutable.
#[derive(Clone)]
pub struct Field(pub(crate) Arc<FieldData>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Field {}

// ---------------------------------------------------------------------------
// Body arithmetic, level by level. Level 0 is the unramified ring `W`;
// level `ℓ ≥ 1` is the `ℓ`-th Eisenstein step.
// ---------------------------------------------------------------------------

impl FieldData {
    pub(crate) fn top(&self) -> usize {
        self.levels.len()
    }

    pub(crate) fn zero_body(&self, lvl: usize) -> Body {
        smallvec![Scalar::ZERO; self.dims[lvl]]
    }

    pub(crate) fn one_body(&self, lvl: usize) -> Body {
        let mut b = self.zero_body(lvl);
        b[0] = Scalar::one(&self.z);
        b
    }

    pub(crate) fn is_zero_body(b: &[Scalar]) -> bool {
        b.iter().all(|s| s.is_zero())
    }

    pub(crate) fn add_body(&self, a: &[Scalar], b: &[Scalar]) -> Body {
        a.iter().zip(b).map(|(x, y)| x.add(&self.z, y)).collect()
    }

    pub(crate) fn sub_body(&self, a: &[Scalar], b: &[Scalar]) -> Body {
        a.iter().zip(b).map(|(x, y)| x.sub(&self.z, y)).collect()
    }

    pub(crate) fn neg_body(&self, a: &[Scalar]) -> Body {
        a.iter().map(|x| x.neg(&self.z)).collect()
    }

    pub(crate) fn scale_body(&self, a: &[Scalar], s: &Scalar) -> Body {
        a.iter().map(|x| x.mul(&self.z, s)).collect()
    }

    fn add_into(&self, acc: &mut [Scalar], b: &[Scalar]) {
        for (x, y) in acc.iter_mut().zip(b) {
            if !y.is_zero() {
                *x = x.add(&self.z, y);
            }
        }
    }

    fn sub_into(&self, acc: &mut [Scalar], b: &[Scalar]) {
        for (x, y) in acc.iter_mut().zip(b) {
            if !y.is_zero() {
                *x = x.sub(&self.z, y);
            }
        }
    }

    pub(crate) fn mul_body(&self, lvl: usize, a: &[Scalar], b: &[Scalar]) -> Body {
        if lvl == 0 {
            return self.mul_w(a, b);
        }
        let lv = &self.levels[lvl - 1];
        let e = lv.e;
        let bs = self.dims[lvl - 1];
        let ablocks: Vec<&[Scalar]> = a.chunks(bs).collect();
        let bblocks: Vec<&[Scalar]> = b.chunks(bs).collect();
        let anz: Vec<bool> = ablocks.iter().map(|x| !Self::is_zero_body(x)).collect();
        let bnz: Vec<bool> = bblocks.iter().map(|x| !Self::is_zero_body(x)).collect();
        let mut acc: Vec<Body> = vec![self.zero_body(lvl - 1); 2 * e - 1];
        for i in 0..e {
            if !anz[i] {
                continue;
            }
            for j in 0..e {
                if !bnz[j] {
                    continue;
                }
                let prod = self.mul_body(lvl - 1, ablocks[i], bblocks[j]);
                self.add_into(&mut acc[i + j], &prod);
            }
        }
        for k in (e..2 * e - 1).rev() {
            let top = core::mem::replace(&mut acc[k], self.zero_body(lvl - 1));
            if Self::is_zero_body(&top) {
                continue;
            }
            for (i, ei) in lv.coeffs.iter().enumerate() {
                if Self::is_zero_body(ei) {
                    continue;
                }
                let prod = self.mul_body(lvl - 1, ei, &top);
                self.sub_into(&mut acc[k - e + i], &prod);
            }
        }
        let mut out = Body::with_capacity(self.dims[lvl]);
        for blk in acc.into_iter().take(e) {
            out.extend(blk);
        }
        out
    }

    fn mul_w(&self, a: &[Scalar], b: &[Scalar]) -> Body {
        let z = &self.z;
        let f = self.f;
        if f == 1 {
            return smallvec![a[0].mul(z, &b[0])];
        }
        let mut acc: Vec<Scalar> = vec![Scalar::ZERO; 2 * f - 1];
        for i in 0..f {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..f {
                if b[j].is_zero() {
                    continue;
                }
                acc[i + j] = acc[i + j].add(z, &a[i].mul(z, &b[j]));
            }
        }
        for k in (f..2 * f - 1).rev() {
            let top = core::mem::replace(&mut acc[k], Scalar::ZERO);
            if top.is_zero() {
                continue;
            }
            for i in 0..f {
                let g = &self.unram[i];
                if !g.is_zero() {
                    acc[k - f + i] = acc[k - f + i].sub(z, &g.mul(z, &top));
                }
            }
        }
        acc.truncate(f);
        acc.into_iter().collect()
    }

    /// Valuation of an integral body in units of the level's uniformizer;
    /// `None` when the body vanishes modulo `p^M`.
    pub(crate) fn val_body(&self, lvl: usize, a: &[Scalar]) -> Option<i64> {
        if lvl == 0 {
            return a.iter().filter_map(|s| s.vp(&self.z)).min().map(|v| v as i64);
        }
        let e = self.levels[lvl - 1].e;
        let bs = self.dims[lvl - 1];
        a.chunks(bs)
            .enumerate()
            .filter_map(|(i, blk)| self.val_body(lvl - 1, blk).map(|v| v * e as i64 + i as i64))
            .min()
    }

    /// `a / ϖ_lvl` for a body of positive valuation.
    pub(crate) fn div_unif(&self, lvl: usize, a: &[Scalar]) -> Body {
        if lvl == 0 {
            return a.iter().map(|s| s.div_p(&self.z)).collect();
        }
        let lv = &self.levels[lvl - 1];
        let bs = self.dims[lvl - 1];
        let mut out = self.zero_body(lvl);
        out[..a.len() - bs].clone_from_slice(&a[bs..]);
        let d0 = &a[..bs];
        if !Self::is_zero_body(d0) {
            let q = self.div_unif(lvl - 1, d0);
            let mut emb = self.zero_body(lvl);
            emb[..bs].clone_from_slice(&q);
            let t = self.mul_body(lvl, &emb, &lv.c);
            self.add_into(&mut out, &t);
        }
        out
    }

    /// `a · ϖ_lvl`.
    pub(crate) fn mul_unif(&self, lvl: usize, a: &[Scalar]) -> Body {
        if lvl == 0 {
            let p = Scalar::C(self.p as u128 % self.z.modulus());
            return self.scale_body(a, &p);
        }
        let lv = &self.levels[lvl - 1];
        let bs = self.dims[lvl - 1];
        let n = a.len();
        let mut out = self.zero_body(lvl);
        out[bs..].clone_from_slice(&a[..n - bs]);
        let top = &a[n - bs..];
        if !Self::is_zero_body(top) {
            for (i, ei) in lv.coeffs.iter().enumerate() {
                if Self::is_zero_body(ei) {
                    continue;
                }
                let prod = self.mul_body(lvl - 1, ei, top);
                self.sub_into(&mut out[i * bs..(i + 1) * bs], &prod);
            }
        }
        out
    }

    /// Inverse of a unit body.
    pub(crate) fn inv_body(&self, lvl: usize, a: &[Scalar]) -> Option<Body> {
        if lvl == 0 {
            return self.inv_w(a);
        }
        let bs = self.dims[lvl - 1];
        let x0 = self.inv_body(lvl - 1, &a[..bs])?;
        let mut x = self.zero_body(lvl);
        x[..bs].clone_from_slice(&x0);
        let two = {
            let mut t = self.zero_body(lvl);
            t[0] = Scalar::C(2 % self.z.modulus());
            t
        };
        // Newton iteration doubles the number of correct π-digits.
        let full = self.beta_at(lvl) * self.z.digits() as i64;
        let mut good = 1i64;
        while good < full {
            let ax = self.mul_body(lvl, a, &x);
            let corr = self.sub_body(&two, &ax);
            x = self.mul_body(lvl, &x, &corr);
            good *= 2;
        }
        Some(x)
    }

    fn inv_w(&self, a: &[Scalar]) -> Option<Body> {
        let z = &self.z;
        let f = self.f;
        if f == 1 {
            return a[0].inv(z).map(|s| smallvec![s]);
        }
        // Solve (multiplication-by-a matrix) · x = e_0 with unit pivots.
        let mut cols: Vec<Body> = Vec::with_capacity(f);
        let mut basis = self.zero_body(0);
        basis[0] = Scalar::one(z);
        for _ in 0..f {
            cols.push(self.mul_w(a, &basis));
            let mut shifted = self.zero_body(0);
            shifted[1..].clone_from_slice(&basis[..f - 1]);
            let top = basis[f - 1].clone();
            for i in 0..f {
                shifted[i] = shifted[i].sub(z, &self.unram[i].mul(z, &top));
            }
            basis = shifted;
        }
        // rows: mat[r][c] = cols[c][r]; augmented with rhs.
        let mut mat: Vec<Vec<Scalar>> = (0..f)
            .map(|r| {
                let mut row: Vec<Scalar> = (0..f).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { Scalar::one(z) } else { Scalar::ZERO });
                row
            })
            .collect();
        for c in 0..f {
            let piv = (c..f).find(|&r| mat[r][c].vp(z) == Some(0))?;
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
        Some(mat.into_iter().map(|row| row[f].clone()).collect())
    }

    /// Absolute ramification index of level `lvl`.
    pub(crate) fn beta_at(&self, lvl: usize) -> i64 {
        self.levels[..lvl].iter().map(|l| l.e as i64).product()
    }

    /// Embeds a body of level `lvl` into level `lvl + 1` (block 0).
    pub(crate) fn embed_up(&self, lvl: usize, a: &[Scalar]) -> Body {
        let mut out = self.zero_body(lvl + 1);
        out[..a.len()].clone_from_slice(a);
        out
    }

    /// Level-0 part of a top body (block 0 at every level).
    pub(crate) fn w_part<'a>(&self, a: &'a [Scalar]) -> &'a [Scalar] {
        &a[..self.f]
    }

    pub(crate) fn pow_body(&self, lvl: usize, a: &[Scalar], mut e: u64) -> Body {
        let mut base: Body = a.iter().cloned().collect();
        let mut acc = self.one_body(lvl);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_body(lvl, &acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_body(lvl, &base, &base);
            }
        }
        acc
    }

    /// `ϖ^k` times a top-level body.
    pub(crate) fn shift_up(&self, a: &[Scalar], k: i64) -> Body {
        let top = self.top();
        let mut out: Body = a.iter().cloned().collect();
        let beta = self.beta;
        let mut k = k;
        // ϖ^β = p / p_unit: use scalar multiplication by p for whole chunks.
        if k >= beta {
            let q = k / beta;
            let pq = Scalar::C(self.z.pow(self.p as u128 % self.z.modulus(), q as u128));
            out = self.scale_body(&out, &pq);
            let inv_unit = self.inv_body(top, &self.p_unit).expect("unit");
            let iu = self.pow_body(top, &inv_unit, q as u64);
            out = self.mul_body(top, &out, &iu);
            k -= q * beta;
        }
        for _ in 0..k {
            out = self.mul_unif(top, &out);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Construction.
// ---------------------------------------------------------------------------

impl Field {
    /// The base field `(Q_p or W(F_q))(t_1..t_m)^∧` with `M` p-adic digits
    /// (including guard digits).
    pub fn base(p: u64, m: usize, unramified: Option<&[i64]>, digits: u32, requested: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::InvalidSpec(format!("{} is not prime", p)));
        }
        if m > crate::scalar::MAX_VARS {
            return Err(Error::Unsupported(format!(
                "{} transcendentals (at most {} supported)",
                m,
                crate::scalar::MAX_VARS
            )));
        }
        let z = ZMod::new(p, digits)?;
        let zres = ZMod::new(p, 1)?;
        let (f, unram) = match unramified {
            None => (1usize, vec![Scalar::ZERO, Scalar::one(&z)]),
            Some(coeffs) => {
                if coeffs.len() < 2 || *coeffs.last().unwrap() != 1 {
                    return Err(Error::InvalidSpec("unramified polynomial must be monic of degree ≥ 1".into()));
                }
                let red: Vec<u64> = coeffs.iter().map(|c| c.rem_euclid(p as i64) as u64).collect();
                if !fp_irreducible(&red, p) {
                    return Err(Error::ReducibleUnramifiedStep);
                }
                (coeffs.len() - 1, coeffs.iter().map(|c| Scalar::from_i128(&z, *c as i128)).collect())
            }
        };
        let t_names = (1..=m).map(|j| format!("t{}", j)).collect();
        let data = FieldData {
            p,
            z: z.clone(),
            zres,
            m,
            t_names,
            f,
            unram,
            levels: Vec::new(),
            dims: vec![f],
            beta: 1,
            cap: (digits.saturating_sub(GUARD_DIGITS)) as i64,
            p_unit: {
                let mut b: Body = smallvec![Scalar::ZERO; f];
                b[0] = Scalar::one(&z);
                b
            },
            down: None,
            parent: None,
            requested,
        };
        Ok(Field(Arc::new(data)))
    }

    /// Adjoins a root `ϖ` of the monic Eisenstein polynomial with non-leading
    /// coefficients `coeffs = [E_0, …, E_{e-1}]` (elements of `self`).
    pub fn adjoin_root(&self, coeffs: &[Elem], name: &str) -> Result<Field> {
        let k = &self.0;
        let e = coeffs.len();
        if e == 0 {
            return Err(Error::NonEisenstein("degree 0".into()));
        }
        for (i, c) in coeffs.iter().enumerate() {
            if c.field() != self {
                return Err(Error::FieldMismatch("Eisenstein coefficient from another field".into()));
            }
            let v = c.val_int();
            let ok = if i == 0 { v == Some(1) } else { v.map_or(true, |v| v >= 1) };
            if !ok {
                return Err(Error::NonEisenstein(format!(
                    "coefficient of degree {} has valuation {}",
                    i,
                    c.valuation()
                )));
            }
        }
        let lvl_parent = k.top();
        let bodies: Vec<Body> = coeffs.iter().map(|c| c.integral_body().expect("integral")).collect();
        let bs = k.dims[lvl_parent];
        let mut dims = k.dims.clone();
        dims.push(bs * e);
        let mut levels = k.levels.clone();
        levels.push(EisLevel { e, name: name.to_string(), coeffs: bodies.clone(), c: Body::new() });
        let mut data = FieldData {
            p: k.p,
            z: k.z.clone(),
            zres: k.zres.clone(),
            m: k.m,
            t_names: k.t_names.clone(),
            f: k.f,
            unram: k.unram.clone(),
            levels,
            dims,
            beta: k.beta * e as i64,
            cap: k.cap * e as i64,
            p_unit: Body::new(),
            down: None,
            parent: Some(self.clone()),
            requested: k.requested,
        };
        let lvl = lvl_parent + 1;
        // c = π_parent/ϖ = −(ϖ^{e−1} + E_{e−1}ϖ^{e−2} + … + E_1) · u^{-1},
        // with u = E_0/π_parent.
        let u = data.div_unif(lvl_parent, &bodies[0]);
        let uinv = data
            .inv_body(lvl_parent, &u)
            .ok_or_else(|| Error::NonEisenstein("constant term is not a uniformizer".into()))?;
        let neg_uinv = data.neg_body(&uinv);
        let mut c = Body::with_capacity(bs * e);
        for i in 0..e {
            let blk = if i + 1 < e { bodies[i + 1].clone() } else { data.one_body(lvl_parent) };
            c.extend(data.mul_body(lvl_parent, &blk, &neg_uinv));
        }
        data.levels[lvl - 1].c = c.clone();
        // r = π_parent/ϖ^e = c / ϖ^{e−1}.
        let mut r = c;
        for _ in 0..e - 1 {
            r = data.div_unif(lvl, &r);
        }
        let rinv = data.inv_body(lvl, &r).ok_or(Error::NotInvertibleAtPrecision)?;
        data.down = Some((r, rinv));
        // p / ϖ^β.
        let mut pu = data.zero_body(lvl);
        pu[0] = Scalar::C(data.p as u128 % data.z.modulus());
        for _ in 0..data.beta {
            pu = data.div_unif(lvl, &pu);
        }
        data.p_unit = pu;
        Ok(Field(Arc::new(data)))
    }

    /// Adjoins a root of a monic Eisenstein polynomial with integer
    /// coefficients (constant first, leading 1 included).
    pub fn adjoin_root_ints(&self, coeffs: &[i64], name: &str) -> Result<Field> {
        if coeffs.len() < 2 || *coeffs.last().unwrap() != 1 {
            return Err(Error::NonEisenstein("polynomial must be monic of degree ≥ 1".into()));
        }
        let cs: Vec<Elem> = coeffs[..coeffs.len() - 1].iter().map(|c| Elem::from_int(self, *c as i128)).collect();
        self.adjoin_root(&cs, name)
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Absolute ramification index `β = v(p)`.
    pub fn beta(&self) -> i64 {
        self.0.beta
    }

    /// Ramification index over the parent field (1 for a base field).
    pub fn e(&self) -> usize {
        self.0.levels.last().map_or(1, |l| l.e)
    }

    /// Residue degree of the unramified step.
    pub fn f(&self) -> usize {
        self.0.f
    }

    /// Number of transcendentals in the residue field.
    pub fn m(&self) -> usize {
        self.0.m
    }

    /// Relative precision (π-digits) carried by elements.
    pub fn cap(&self) -> i64 {
        self.0.cap
    }

    pub fn parent(&self) -> Option<&Field> {
        self.0.parent.as_ref()
    }

    pub fn zmod(&self) -> &ZMod {
        &self.0.z
    }

    /// Number of Eisenstein levels.
    pub fn depth(&self) -> usize {
        self.0.levels.len()
    }

    /// Dimension of the top ring over the scalar ring.
    pub fn dim(&self) -> usize {
        *self.0.dims.last().unwrap()
    }

    /// Names of the Eisenstein uniformizers, bottom first.
    pub fn uniformizer_names(&self) -> Vec<String> {
        self.0.levels.iter().map(|l| l.name.clone()).collect()
    }

    pub fn t_names(&self) -> &[String] {
        &self.0.t_names
    }

    /// The uniformizer of the top field.
    pub fn pi(&self) -> Elem {
        Elem::from_parts(self, 1, self.cap() + 1, self.0.one_body(self.0.top()))
    }

    /// Whether `other` is this field or one of its ancestors.
    pub fn is_over(&self, other: &Field) -> bool {
        let mut cur = Some(self);
        while let Some(f) = cur {
            if f == other {
                return true;
            }
            cur = f.parent();
        }
        false
    }

    /// Product of the ramification indices from `sub` up to `self`.
    pub fn e_over(&self, sub: &Field) -> Option<i64> {
        let mut cur = self;
        let mut e = 1i64;
        loop {
            if cur == sub {
                return Some(e);
            }
            e *= cur.e() as i64;
            cur = cur.parent()?;
        }
    }

    /// A short human-readable description.
    pub fn describe(&self) -> String {
        let d = &self.0;
        let mut s = format!("Q_{}", d.p);
        if d.f > 1 {
            s = format!("W(F_{}^{})", d.p, d.f);
        }
        if d.m > 0 {
            s = format!("{}({})^", s, d.t_names.join(","));
        }
        for l in &d.levels {
            s = format!("{}[{}: e={}]", s, l.name, l.e);
        }
        s
    }

    /// Resolves a constant name (`p`, `pi`, uniformizer names, `t1..tm`,
    /// `w`) to an element of this field.
    pub fn constant(&self, name: &str) -> Option<Elem> {
        let d = &self.0;
        if name == "p" {
            return Some(Elem::from_int(self, d.p as i128));
        }
        if name == "pi" || name == "π" {
            return Some(if d.levels.is_empty() { Elem::from_int(self, d.p as i128) } else { self.pi() });
        }
        if let Some(j) = d.t_names.iter().position(|n| n == name) {
            return Some(Elem::t(self, j));
        }
        if name == "w" && d.f > 1 {
            let mut b = d.zero_body(d.top());
            b[1] = Scalar::one(&d.z);
            return Some(Elem::from_parts(self, 0, self.cap(), b));
        }
        if let Some(l) = d.levels.iter().position(|lv| lv.name == name) {
            // uniformizer of level l+1 viewed in the top field
            let mut cur = self.clone();
            while cur.depth() > l + 1 {
                cur = cur.parent().unwrap().clone();
            }
            return Some(self.coerce(&cur.pi()).expect("ancestor"));
        }
        None
    }

    /// Maps an element of an ancestor field into this field.
    pub fn coerce(&self, x: &Elem) -> Result<Elem> {
        if x.field() == self {
            return Ok(x.clone());
        }
        let parent = self
            .parent()
            .ok_or_else(|| Error::FieldMismatch("element does not come from a subfield".into()))?;
        let y = parent.coerce(x)?;
        Ok(self.coerce_from_parent(&y))
    }

    /// Non-leading coefficients `E_0..E_{e-1}` of the top Eisenstein
    /// polynomial, as elements of the parent field.
    pub fn eisenstein_coeffs(&self) -> Option<Vec<Elem>> {
        let parent = self.parent()?;
        let lv = self.0.levels.last()?;
        Some(lv.coeffs.iter().map(|b| Elem::from_parts(parent, 0, parent.cap(), b.clone())).collect())
    }

    /// Coordinates of `x` over the parent field in the basis
    /// `1, ϖ, …, ϖ^{e-1}`.
    pub fn parent_coordinates(&self, x: &Elem) -> Result<Vec<Elem>> {
        let parent = self.parent().ok_or_else(|| Error::FieldMismatch("base field has no parent".into()))?;
        let e = self.e() as i64;
        if x.is_zero() {
            return Ok(vec![Elem::zero_with_prec(parent, x.prec_raw().div_euclid(e)); e as usize]);
        }
        // scale by π_parent^k so the element becomes integral
        let k = if x.val_raw() < 0 { (-x.val_raw() + e - 1) / e } else { 0 };
        let pk = self.coerce(&parent.pi())?.pow(k)?;
        let y = x.mul(&pk);
        let body = y.integral_body().ok_or(Error::NegativeValuation)?;
        let bs = self.0.dims[self.0.top() - 1];
        let pinv = parent.pi().pow(-k)?;
        let rel_prec = (y.prec_raw().div_euclid(e)).min(parent.cap());
        Ok(body
            .chunks(bs)
            .map(|blk| Elem::from_parts(parent, 0, rel_prec, blk.iter().cloned().collect()).mul(&pinv))
            .collect())
    }

    fn coerce_from_parent(&self, x: &Elem) -> Elem {
        let d = &self.0;
        let e = self.e() as i64;
        let lvl = d.top();
        if x.is_zero() {
            return Elem::zero_with_prec(self, x.prec_raw().saturating_mul(e));
        }
        let body = d.embed_up(lvl - 1, x.body_raw());
        let (r, rinv) = d.down.as_ref().unwrap();
        let v = x.val_raw();
        let fac = if v >= 0 { d.pow_body(lvl, r, v as u64) } else { d.pow_body(lvl, rinv, (-v) as u64) };
        let b = d.mul_body(lvl, &body, &fac);
        let rel = (x.prec_raw() - v).saturating_mul(e).min(self.cap());
        Elem::from_parts(self, v * e, v * e + rel, b)
    }
}

/// Builds a field from a declarative description.
pub fn make_field(desc: &FieldDescription) -> Result<Field> {
    if desc.precision < 2 {
        return Err(Error::PrecisionTooSmall(format!("precision {} < 2", desc.precision)));
    }
    let mut m = 0usize;
    let mut unram: Option<Vec<i64>> = None;
    let mut eis: Vec<(&String, &EisensteinPoly)> = Vec::new();
    for step in &desc.tower {
        match step {
            TowerStep::Transcendentals(k) => {
                if !eis.is_empty() || m > 0 {
                    return Err(Error::InvalidSpec("transcendentals must be declared once, before Eisenstein steps".into()));
                }
                m = *k;
            }
            TowerStep::Unramified(c) => {
                if !eis.is_empty() || unram.is_some() {
                    return Err(Error::InvalidSpec("unramified step must come first and at most once".into()));
                }
                unram = Some(c.clone());
            }
            TowerStep::Eisenstein { name, poly } => eis.push((name, poly)),
        }
    }
    // Degrees are needed up front to size the modular backend.
    let mut degs = Vec::new();
    for (name, poly) in &eis {
        let d = match poly {
            EisensteinPoly::Integers(c) => c.len().saturating_sub(1),
            EisensteinPoly::Text(t) => crate::parse::degree_in(t, name)?,
        };
        if d == 0 {
            return Err(Error::NonEisenstein(format!("step {} has degree 0", name)));
        }
        degs.push(d as u32);
    }
    let beta: u32 = degs.iter().product::<u32>().max(1);
    let digits = desc.precision.div_ceil(beta) + GUARD_DIGITS;
    let mut field = Field::base(desc.p, m, unram.as_deref(), digits, desc.precision)?;
    for (name, poly) in eis {
        field = match poly {
            EisensteinPoly::Integers(c) => field.adjoin_root_ints(c, name)?,
            EisensteinPoly::Text(t) => {
                let coeffs = crate::parse::univariate_over(&field, t, name)?;
                if coeffs.last().map(|c| !c.is_one()).unwrap_or(true) {
                    return Err(Error::NonEisenstein(format!("step {} is not monic", name)));
                }
                field.adjoin_root(&coeffs[..coeffs.len() - 1], name)?
            }
        };
    }
    Ok(field)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Small F_p[x] helpers for the irreducibility test.
// ---------------------------------------------------------------------------

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_inv(a: u64, p: u64) -> u64 {
    let mut r = 1u128;
    let mut b = a as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    r as u64
}

fn fp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let inv = fp_inv(m[dm], p);
    while r.len() > dm && !r.is_empty() {
        let k = r.len() - 1;
        let c = r[k] * inv % p;
        for i in 0..=dm {
            let idx = k - dm + i;
            r[idx] = (r[idx] + p - c * m[i] % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut r = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] = (r[i + j] + x * y) % p;
        }
    }
    fp_rem(&r, m, p)
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or irreducibility test over `F_p` (coefficients constant first).
pub(crate) fn fp_irreducible(g: &[u64], p: u64) -> bool {
    let mut g = g.to_vec();
    fp_trim(&mut g);
    let d = match g.len() {
        0 => return false,
        n => n - 1,
    };
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    let mut xp = vec![0, 1];
    for _ in 0..d / 2 {
        // xp ← xp^p mod g
        let mut acc = vec![1u64];
        let mut base = xp.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = fp_mulmod(&acc, &base, &g, p);
            }
            base = fp_mulmod(&base, &base, &g, p);
            e >>= 1;
        }
        xp = acc;
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        if fp_gcd(&g, &diff, p).len() > 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irreducibility_mod_p() {
        assert!(fp_irreducible(&[1, 1, 1], 2)); // x^2+x+1
        assert!(!fp_irreducible(&[1, 0, 1], 2)); // (x+1)^2
        assert!(fp_irreducible(&[1, 0, 1], 3)); // x^2+1 over F_3
        assert!(!fp_irreducible(&[1, 0, 1], 5));
        assert!(fp_irreducible(&[1, 1, 0, 1], 2)); // x^3+x+1
    }
}
