//! Floating-point-style truncated field elements: `x = ϖ^val · u` with `u` a
//! unit body known modulo `ϖ^{prec − val}`. Zero is represented by an empty
//! unit together with the absolute precision to which it is known.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Body, Field, FieldData};
use crate::scalar::Scalar;
use crate::valuation::{qi, Valuation};

/// Absolute precision of an exact zero.
pub const EXACT: i64 = i64::MAX / 8;

/// A truncated element of a tower field.
#[derive(Clone)]
pub struct Elem {
    field: Field,
    val: i64,
    prec: i64,
    body: Body,
}

impl Elem {
    // -- construction -------------------------------------------------------

    /// `ϖ^val · body` where `body` is integral and correct modulo
    /// `ϖ^{prec − val}`; normalises so that the stored body is a unit.
    pub(crate) fn from_parts(field: &Field, val: i64, prec: i64, body: Body) -> Elem {
        let d = &field.0;
        let top = d.top();
        let prec = prec.min(val.saturating_add(d.cap));
        match d.val_body(top, &body) {
            None => Elem::zero_with_prec(field, prec),
            Some(k) if val + k >= prec => Elem::zero_with_prec(field, prec),
            Some(k) => {
                let mut b = body;
                for _ in 0..k {
                    b = d.div_unif(top, &b);
                }
                Elem { field: field.clone(), val: val + k, prec, body: b }
            }
        }
    }

    pub fn zero(field: &Field) -> Elem {
        Elem::zero_with_prec(field, EXACT)
    }

    /// Zero known modulo `ϖ^prec`.
    pub fn zero_with_prec(field: &Field, prec: i64) -> Elem {
        Elem { field: field.clone(), val: prec, prec, body: Body::new() }
    }

    pub fn one(field: &Field) -> Elem {
        Elem::from_int(field, 1)
    }

    pub fn from_int(field: &Field, n: i128) -> Elem {
        let d = &field.0;
        if n == 0 {
            return Elem::zero(field);
        }
        let p = d.p as i128;
        let mut k = 0i64;
        let mut u = n;
        while u % p == 0 {
            u /= p;
            k += 1;
        }
        let top = d.top();
        let mut b = d.zero_body(top);
        b[0] = Scalar::from_i128(&d.z, u);
        if k > 0 {
            let pu = d.pow_body(top, &d.p_unit, k as u64);
            b = d.mul_body(top, &b, &pu);
        }
        let val = k * d.beta;
        Elem { field: field.clone(), val, prec: val + d.cap, body: b }
    }

    /// The rational `n / den`; fails if `den` is zero.
    pub fn from_ratio(field: &Field, n: i128, den: i128) -> Result<Elem> {
        Ok(Elem::from_int(field, n).mul(&Elem::from_int(field, den).inv()?))
    }

    /// The canonical lift of the transcendental `t_{j+1}`.
    pub fn t(field: &Field, j: usize) -> Elem {
        Elem::from_scalar(field, Scalar::t(j))
    }

    /// Embeds a base scalar.
    pub fn from_scalar(field: &Field, s: Scalar) -> Elem {
        let d = &field.0;
        let mut b = d.zero_body(d.top());
        b[0] = s;
        Elem::from_parts(field, 0, d.cap, b)
    }

    /// Builds the element with the given integral body (flat mixed-radix
    /// coordinates) known to full precision.
    pub fn from_body(field: &Field, body: Vec<Scalar>) -> Result<Elem> {
        if body.len() != field.dim() {
            return Err(Error::FieldMismatch("body length differs from the field dimension".into()));
        }
        Ok(Elem::from_parts(field, 0, field.cap(), body.into_iter().collect()))
    }

    // -- accessors ----------------------------------------------------------

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub(crate) fn data(&self) -> &FieldData {
        &self.field.0
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_empty()
    }

    /// Valuation in the field's own normalisation (`v(ϖ) = 1`); `+∞` for
    /// zero at the working precision.
    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(qi(self.val))
        }
    }

    /// Integer valuation, `None` for zero.
    pub fn val_int(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Absolute precision: the element is known modulo `ϖ^precision`.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Relative precision (digits known beyond the valuation).
    pub fn rel_precision(&self) -> i64 {
        if self.is_zero() {
            0
        } else {
            self.prec - self.val
        }
    }

    pub(crate) fn val_raw(&self) -> i64 {
        self.val
    }

    pub(crate) fn prec_raw(&self) -> i64 {
        self.prec
    }

    pub(crate) fn body_raw(&self) -> &[Scalar] {
        &self.body
    }

    /// Lowers the absolute precision to at most `prec`.
    pub fn truncate(&self, prec: i64) -> Elem {
        if prec >= self.prec {
            return self.clone();
        }
        if self.is_zero() || self.val >= prec {
            return Elem::zero_with_prec(&self.field, prec);
        }
        let mut out = self.clone();
        out.prec = prec;
        out
    }

    /// `π^val · body` as an integral body (requires `val ≥ 0`).
    pub(crate) fn integral_body(&self) -> Option<Body> {
        let d = self.data();
        if self.is_zero() {
            return Some(d.zero_body(d.top()));
        }
        if self.val < 0 {
            return None;
        }
        Some(d.shift_up(&self.body, self.val))
    }

    /// Coordinates of the integral element in the mixed-radix basis.
    pub fn coordinates(&self) -> Result<Vec<Scalar>> {
        self.integral_body().map(|b| b.into_vec()).ok_or(Error::NegativeValuation)
    }

    /// A canonical ordering key: the π-adic digits' coordinates.
    pub fn sort_key(&self) -> Vec<i128> {
        let d = self.data();
        let mut key = Vec::new();
        if self.is_zero() {
            return key;
        }
        key.push(self.val as i128);
        for s in self.body.iter() {
            match s {
                Scalar::C(c) => key.push(d.z.signed(*c)),
                Scalar::F(_) => key.push(i128::MAX),
            }
        }
        key
    }

    pub fn is_one(&self) -> bool {
        let one = Elem::one(&self.field);
        self.sub(&one).is_zero()
    }

    fn check(&self, other: &Elem) {
        assert!(self.field == other.field, "elements of different fields: {} vs {}", self.field.describe(), other.field.describe());
    }

    // -- arithmetic ----------------------------------------------------------

    pub fn add(&self, other: &Elem) -> Elem {
        self.check(other);
        let d = self.data();
        let prec = self.prec.min(other.prec);
        if self.is_zero() {
            return other.truncate(prec);
        }
        if other.is_zero() {
            return self.truncate(prec);
        }
        let m = self.val.min(other.val);
        let prec = prec.min(m + d.cap);
        if prec <= m {
            return Elem::zero_with_prec(&self.field, prec);
        }
        let shifted = |x: &Elem| -> Option<Body> {
            let s = x.val - m;
            if s >= prec - m {
                None
            } else if s == 0 {
                Some(x.body.clone())
            } else {
                Some(d.shift_up(&x.body, s))
            }
        };
        let sum = match (shifted(self), shifted(other)) {
            (Some(a), Some(b)) => d.add_body(&a, &b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return Elem::zero_with_prec(&self.field, prec),
        };
        Elem::from_parts(&self.field, m, prec, sum)
    }

    pub fn neg(&self) -> Elem {
        Elem { field: self.field.clone(), val: self.val, prec: self.prec, body: self.data().neg_body(&self.body) }
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Elem) -> Elem {
        self.check(other);
        if self.is_zero() || other.is_zero() {
            let p = match (self.is_zero(), other.is_zero()) {
                (true, true) => self.prec.saturating_add(other.prec),
                (true, false) => self.prec.saturating_add(other.val),
                _ => other.prec.saturating_add(self.val),
            };
            return Elem::zero_with_prec(&self.field, p.min(EXACT));
        }
        let d = self.data();
        let val = self.val + other.val;
        let rel = (self.prec - self.val).min(other.prec - other.val);
        let body = d.mul_body(d.top(), &self.body, &other.body);
        Elem { field: self.field.clone(), val, prec: val + rel, body }
    }

    /// Multiplicative inverse; the relative precision is preserved.
    pub fn inv(&self) -> Result<Elem> {
        if self.is_zero() {
            return Err(Error::NotInvertibleAtPrecision);
        }
        let d = self.data();
        let body = d.inv_body(d.top(), &self.body).ok_or(Error::NotInvertibleAtPrecision)?;
        let rel = self.prec - self.val;
        Ok(Elem { field: self.field.clone(), val: -self.val, prec: -self.val + rel, body })
    }

    pub fn div(&self, other: &Elem) -> Result<Elem> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power (negative exponents invert).
    pub fn pow(&self, n: i64) -> Result<Elem> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = Elem::one(&self.field);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    pub fn scale_int(&self, k: i128) -> Elem {
        self.mul(&Elem::from_int(&self.field, k))
    }

    /// Multiplication by `ϖ^k` (exact shift of the valuation).
    pub fn shift(&self, k: i64) -> Elem {
        if self.is_zero() {
            return Elem::zero_with_prec(&self.field, self.prec.saturating_add(k).min(EXACT));
        }
        Elem { field: self.field.clone(), val: self.val + k, prec: self.prec + k, body: self.body.clone() }
    }

    /// Whether `self − other` vanishes at the joint precision.
    pub fn approx_eq(&self, other: &Elem) -> bool {
        self.sub(other).is_zero()
    }

    /// The unit part `x / ϖ^{v(x)}`.
    pub fn unit_part(&self) -> Option<Elem> {
        if self.is_zero() {
            return None;
        }
        Some(self.shift(-self.val))
    }

    /// Renders the element using the field's names.
    pub fn to_text(&self) -> String {
        let d = self.data();
        if self.is_zero() {
            return alloc::format!("O(π^{})", self.prec);
        }
        let names: Vec<&str> = d.t_names.iter().map(|s| s.as_str()).collect();
        let parts: Vec<String> = self
            .body
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(i, s)| {
                let mono = monomial_name(d, i);
                let c = s.fmt_with(&d.z, &names);
                if mono.is_empty() {
                    c
                } else {
                    alloc::format!("({})*{}", c, mono)
                }
            })
            .collect();
        alloc::format!("π^{}*({}) + O(π^{})", self.val, parts.join(" + "), self.prec)
    }
}

fn monomial_name(d: &FieldData, mut idx: usize) -> String {
    let mut parts = Vec::new();
    let wi = idx % d.f;
    idx /= d.f;
    if wi > 0 {
        parts.push(alloc::format!("w^{}", wi));
    }
    for lv in &d.levels {
        let k = idx % lv.e;
        idx /= lv.e;
        if k > 0 {
            parts.push(alloc::format!("{}^{}", lv.name, k));
        }
    }
    parts.join("*")
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl<'a> Add<&'a Elem> for &'a Elem {
    type Output = Elem;
    fn add(self, rhs: &'a Elem) -> Elem {
        Elem::add(self, rhs)
    }
}

impl<'a> Sub<&'a Elem> for &'a Elem {
    type Output = Elem;
    fn sub(self, rhs: &'a Elem) -> Elem {
        Elem::sub(self, rhs)
    }
}

impl<'a> Mul<&'a Elem> for &'a Elem {
    type Output = Elem;
    fn mul(self, rhs: &'a Elem) -> Elem {
        Elem::mul(self, rhs)
    }
}

impl<'a> Neg for &'a Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        Elem::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};

    fn qp(p: u64) -> Field {
        make_field(&FieldDescription::qp(p, 20)).unwrap()
    }

    #[test]
    fn integers_and_valuations() {
        let k = qp(3);
        assert_eq!(Elem::from_int(&k, 9).val_int(), Some(2));
        assert!(Elem::from_int(&k, 0).valuation().is_infinite());
        let x = Elem::from_int(&k, 5);
        let y = x.inv().unwrap();
        assert!(x.mul(&y).is_one());
    }

    #[test]
    fn eisenstein_square_root() {
        let k = make_field(&FieldDescription::qp(3, 20).eisenstein_ints("s", &[-3, 0, 1])).unwrap();
        assert_eq!(k.beta(), 2);
        let s = k.pi();
        let three = Elem::from_int(&k, 3);
        assert_eq!(three.val_int(), Some(2));
        assert!(s.mul(&s).approx_eq(&three));
        let u = Elem::one(&k).sub(&s);
        let inv = u.inv().unwrap();
        assert!(u.mul(&inv).is_one());
    }
}

#[cfg(test)]
mod tower_tests {
    use super::*;
    use crate::field::{make_field, FieldDescription, TowerStep};

    #[test]
    fn tower_relation_holds_after_coercion() {
        let desc = FieldDescription::qp(3, 24)
            .with_step(TowerStep::Transcendentals(1))
            .eisenstein_ints("s", &[-3, 0, 1])
            .eisenstein_text("z", "z^3 + s*z^2 - s");
        let l = make_field(&desc).unwrap();
        assert_eq!(l.beta(), 6);
        let s = l.constant("s").unwrap();
        assert_eq!(s.val_int(), Some(3));
        let z = l.pi();
        let rel = z.pow(3).unwrap().add(&s.mul(&z.pow(2).unwrap())).sub(&s);
        assert!(rel.is_zero(), "{}", rel);
        let t = l.constant("t1").unwrap();
        let x = t.add(&z).inv().unwrap();
        assert!(x.mul(&t.add(&z)).is_one());
        let three = Elem::from_int(&l, 3);
        assert!(s.mul(&s).approx_eq(&three));
    }
}
