//! Dense univariate polynomials over a tower field, constant coefficient
//! first. These carry the Newton-polygon, Hensel and root-finding layers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::valuation::Valuation;

/// `Σ c_i x^i` with coefficients in one field. Trailing zero coefficients
/// (at the working precision) are trimmed, so `degree` is meaningful.
#[derive(Clone)]
pub struct Poly {
    field: Field,
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(field: &Field, coeffs: Vec<Elem>) -> Poly {
        let mut p = Poly { field: field.clone(), coeffs };
        p.trim();
        p
    }

    pub fn zero(field: &Field) -> Poly {
        Poly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn one(field: &Field) -> Poly {
        Poly::constant(&Elem::one(field))
    }

    pub fn constant(c: &Elem) -> Poly {
        Poly::new(c.field(), vec![c.clone()])
    }

    /// The monomial `x`.
    pub fn x(field: &Field) -> Poly {
        Poly::new(field, vec![Elem::zero(field), Elem::one(field)])
    }

    /// `x − a`.
    pub fn linear(a: &Elem) -> Poly {
        let f = a.field();
        Poly::new(f, vec![a.neg(), Elem::one(f)])
    }

    /// Integer coefficients, constant first.
    pub fn from_ints(field: &Field, coeffs: &[i64]) -> Poly {
        Poly::new(field, coeffs.iter().map(|c| Elem::from_int(field, *c as i128)).collect())
    }

    /// Parses univariate polynomial text in the variable `var`.
    pub fn parse(field: &Field, text: &str, var: &str) -> Result<Poly> {
        Ok(Poly::new(field, crate::parse::univariate_over(field, text, var)?))
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| Elem::zero(&self.field))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Elem> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    /// Maps every coefficient into an extension field.
    pub fn coerce(&self, to: &Field) -> Result<Poly> {
        let cs = self.coeffs.iter().map(|c| to.coerce(c)).collect::<Result<Vec<_>>>()?;
        Ok(Poly::new(to, cs))
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(&self.field, (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut acc = vec![Elem::zero(&self.field); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    acc[i + j] = acc[i + j].add(&a.mul(b));
                }
            }
        }
        Poly::new(&self.field, acc)
    }

    pub fn scale(&self, c: &Elem) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|x| x.mul(c)).collect())
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.field);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Elem) -> Elem {
        let mut acc = Elem::zero(x.field());
        for c in self.coeffs.iter().rev() {
            let c = x.field().coerce(c).expect("evaluation point lies over the coefficient field");
            acc = acc.mul(x).add(&c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.scale_int(i as i128)).collect())
    }

    /// `f(a + x)`, by repeated synthetic division.
    pub fn shift(&self, a: &Elem) -> Poly {
        let mut work = self.coeffs.clone();
        let n = work.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let t = work[k + 1].mul(a);
                work[k] = work[k].add(&t);
            }
        }
        Poly::new(&self.field, work)
    }

    /// `f(c·x)`.
    pub fn scale_var(&self, c: &Elem) -> Poly {
        let mut pw = Elem::one(&self.field);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a.mul(&pw));
            pw = pw.mul(c);
        }
        Poly::new(&self.field, out)
    }

    /// `f(g(x))`.
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(c));
        }
        acc
    }

    /// Euclidean division by a polynomial whose leading coefficient is
    /// invertible.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let lc_inv = d.leading().unwrap().inv()?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(&self.field), self.clone()));
        }
        let mut q = vec![Elem::zero(&self.field); r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = r[k].mul(&lc_inv);
            if c.is_zero() {
                continue;
            }
            for (i, di) in d.coeffs.iter().enumerate() {
                r[k - dd + i] = r[k - dd + i].sub(&c.mul(di));
            }
            q[k - dd] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(&self.field, q), Poly::new(&self.field, r)))
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Result<Poly> {
        let lc = self.leading().ok_or(Error::ZeroPolynomial)?;
        Ok(self.scale(&lc.inv()?))
    }

    /// Valuation of every coefficient (`+∞` for vanishing ones).
    pub fn valuations(&self) -> Vec<Valuation> {
        self.coeffs.iter().map(|c| c.valuation()).collect()
    }

    /// Minimum coefficient valuation (the Gauss valuation at radius 0).
    pub fn content_valuation(&self) -> Valuation {
        self.coeffs.iter().map(|c| c.valuation()).fold(Valuation::Infinite, Valuation::min)
    }

    /// Whether `self − o` vanishes at the working precision.
    pub fn approx_eq(&self, o: &Poly) -> bool {
        self.sub(o).is_zero()
    }

    pub fn to_text(&self, var: &str) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => String::from(var),
                _ => format!("{}^{}", var, i),
            };
            parts.push(match (i, c.is_one()) {
                (0, _) => format!("({})", c.to_text()),
                (_, true) => mono,
                _ => format!("({})*{}", c.to_text(), mono),
            });
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldDescription;

    fn q3() -> Field {
        crate::field::make_field(&FieldDescription::qp(3, 20)).unwrap()
    }

    #[test]
    fn division_recovers_dividend() {
        let k = q3();
        let f = Poly::from_ints(&k, &[5, -2, 7, 1, 3]);
        let d = Poly::from_ints(&k, &[1, 4, 1]);
        let (q, r) = f.div_rem(&d).unwrap();
        assert!(q.mul(&d).add(&r).approx_eq(&f));
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn shift_matches_composition() {
        let k = q3();
        let f = Poly::from_ints(&k, &[1, 0, -3, 2]);
        let a = Elem::from_int(&k, 7);
        let g = Poly::new(&k, vec![a.clone(), Elem::one(&k)]);
        assert!(f.shift(&a).approx_eq(&f.compose(&g)));
        let x = Elem::from_int(&k, 11);
        assert!(f.shift(&a).eval(&x).approx_eq(&f.eval(&a.add(&x))));
    }

    #[test]
    fn derivative_of_power() {
        let k = q3();
        let f = Poly::from_ints(&k, &[1, 1]).pow(4);
        let d = Poly::from_ints(&k, &[1, 1]).pow(3).scale(&Elem::from_int(&k, 4));
        assert!(f.derivative().approx_eq(&d));
    }
}
