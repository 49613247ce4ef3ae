//! Base scalars: the fraction ring `(Z/p^M)[t_1..t_m]` localised at the
//! polynomials with unit content, i.e. truncated elements of the Gauss-norm
//! completion of `Z_p(t_1..t_m)`. At most two transcendentals are supported.
//!
//! Constants (the only values when `m = 0`) are stored inline; genuine
//! rational functions are boxed.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::zmod::ZMod;

/// Maximum number of transcendentals.
pub const MAX_VARS: usize = 2;

/// Exponent vector of a monomial in `t_1, t_2`.
pub type Mono = [u16; MAX_VARS];

/// Sparse polynomial in the transcendentals: sorted monomials with nonzero
/// coefficients modulo `p^M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TPoly(pub Vec<(Mono, u128)>);

impl TPoly {
    pub fn zero() -> Self {
        TPoly(Vec::new())
    }

    pub fn constant(c: u128) -> Self {
        if c == 0 {
            TPoly::zero()
        } else {
            TPoly(alloc::vec![([0; MAX_VARS], c)])
        }
    }

    pub fn var(j: usize) -> Self {
        let mut m = [0; MAX_VARS];
        m[j] = 1;
        TPoly(alloc::vec![(m, 1)])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(c)` if the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<u128> {
        match self.0.as_slice() {
            [] => Some(0),
            [(m, c)] if *m == [0; MAX_VARS] => Some(*c),
            _ => None,
        }
    }

    fn from_unsorted(z: &ZMod, mut terms: Vec<(Mono, u128)>) -> Self {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Mono, u128)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = z.add(*lc, c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| *c != 0);
        TPoly(out)
    }

    pub fn add(&self, z: &ZMod, o: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            if j >= o.0.len() || (i < self.0.len() && self.0[i].0 < o.0[j].0) {
                out.push(self.0[i]);
                i += 1;
            } else if i >= self.0.len() || o.0[j].0 < self.0[i].0 {
                out.push(o.0[j]);
                j += 1;
            } else {
                let c = z.add(self.0[i].1, o.0[j].1);
                if c != 0 {
                    out.push((self.0[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        TPoly(out)
    }

    pub fn neg(&self, z: &ZMod) -> Self {
        TPoly(self.0.iter().map(|(m, c)| (*m, z.neg(*c))).collect())
    }

    pub fn sub(&self, z: &ZMod, o: &Self) -> Self {
        self.add(z, &o.neg(z))
    }

    pub fn mul(&self, z: &ZMod, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return TPoly::zero();
        }
        let mut terms = Vec::with_capacity(self.0.len() * o.0.len());
        for (ma, ca) in &self.0 {
            for (mb, cb) in &o.0 {
                let mut m = [0; MAX_VARS];
                for k in 0..MAX_VARS {
                    m[k] = ma[k].checked_add(mb[k]).expect("transcendental degree overflow");
                }
                terms.push((m, z.mul(*ca, *cb)));
            }
        }
        TPoly::from_unsorted(z, terms)
    }

    pub fn scale(&self, z: &ZMod, c: u128) -> Self {
        let mut out: Vec<(Mono, u128)> =
            self.0.iter().map(|(m, a)| (*m, z.mul(*a, c))).collect();
        out.retain(|(_, c)| *c != 0);
        TPoly(out)
    }

    /// Minimum p-adic valuation of the coefficients (`None` for zero).
    pub fn content_vp(&self, z: &ZMod) -> Option<u32> {
        self.0.iter().filter_map(|(_, c)| z.vp(*c)).min()
    }

    pub fn div_p(&self, z: &ZMod) -> Self {
        let mut out: Vec<(Mono, u128)> = self.0.iter().map(|(m, c)| (*m, z.div_p(*c))).collect();
        out.retain(|(_, c)| *c != 0);
        TPoly(out)
    }

    pub fn mod_p(&self, z: &ZMod) -> Vec<(Mono, u64)> {
        self.0
            .iter()
            .map(|(m, c)| (*m, z.mod_p(*c)))
            .filter(|(_, c)| *c != 0)
            .collect()
    }

    /// Degree in `t_1` when the polynomial involves `t_1` only.
    fn univariate_degree(&self) -> Option<u16> {
        if self.0.iter().any(|(m, _)| m[1..].iter().any(|e| *e != 0)) {
            return None;
        }
        self.0.last().map(|(m, _)| m[0])
    }

    /// Exact division `self / d` for univariate polynomials whose divisor has
    /// a unit leading coefficient; `None` when the remainder is nonzero.
    pub fn exact_div(&self, z: &ZMod, d: &Self) -> Option<Self> {
        let dd = d.univariate_degree()?;
        self.univariate_degree()?;
        let lead = d.0.last()?.1;
        let inv = z.inv(lead)?;
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some(&(m, c)) = rem.0.last() {
            if m[0] < dd {
                return None;
            }
            let mut qm = [0; MAX_VARS];
            qm[0] = m[0] - dd;
            let qc = z.mul(c, inv);
            quot.push((qm, qc));
            let sub = d.mul(z, &TPoly(alloc::vec![(qm, qc)]));
            rem = rem.sub(z, &sub);
        }
        Some(TPoly::from_unsorted(z, quot))
    }

    pub fn fmt_with(&self, z: &ZMod, names: &[&str]) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (i, (m, c)) in self.0.iter().enumerate() {
            let v = z.signed(*c);
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(k, e)| {
                    let name = names.get(k).copied().unwrap_or("t?");
                    if *e == 1 {
                        String::from(name)
                    } else {
                        alloc::format!("{}^{}", name, e)
                    }
                })
                .collect();
            let (sign, mag) = if v < 0 { ("-", -v) } else { ("+", v) };
            if i == 0 {
                if sign == "-" {
                    s.push('-');
                }
            } else {
                let _ = write!(s, " {} ", sign);
            }
            if mono.is_empty() {
                let _ = write!(s, "{}", mag);
            } else if mag == 1 {
                s.push_str(&mono.join("*"));
            } else {
                let _ = write!(s, "{}*{}", mag, mono.join("*"));
            }
        }
        s
    }
}

/// Removes the largest monomial dividing both `num` and `den`.
fn cancel_monomial(num: TPoly, den: TPoly) -> (TPoly, TPoly) {
    let mut g = [u16::MAX; MAX_VARS];
    for (m, _) in num.0.iter().chain(den.0.iter()) {
        for k in 0..MAX_VARS {
            g[k] = g[k].min(m[k]);
        }
    }
    if g.iter().all(|e| *e == 0 || *e == u16::MAX) {
        return (num, den);
    }
    let strip = |p: TPoly| {
        TPoly(
            p.0.into_iter()
                .map(|(mut m, c)| {
                    for k in 0..MAX_VARS {
                        m[k] -= g[k];
                    }
                    (m, c)
                })
                .collect(),
        )
    };
    (strip(num), strip(den))
}

/// Cancels `den` against `num` when it divides exactly.
fn cross_cancel(z: &ZMod, num: TPoly, den: TPoly) -> (TPoly, TPoly) {
    if den.as_constant().is_some() {
        return (num, den);
    }
    match num.exact_div(z, &den) {
        Some(q) => (q, TPoly::constant(1)),
        None => (num, den),
    }
}

/// A base scalar: an inline constant or a boxed rational function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    C(u128),
    F(Box<Frac>),
}

/// `num / den` with `den` of unit content.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frac {
    pub num: TPoly,
    pub den: TPoly,
}

impl Scalar {
    pub const ZERO: Scalar = Scalar::C(0);

    pub fn one(z: &ZMod) -> Scalar {
        Scalar::C(1 % z.modulus())
    }

    pub fn from_i128(z: &ZMod, a: i128) -> Scalar {
        Scalar::C(z.reduce_i128(a))
    }

    pub fn t(j: usize) -> Scalar {
        Scalar::F(Box::new(Frac { num: TPoly::var(j), den: TPoly::constant(1) }))
    }

    pub fn from_tpoly(z: &ZMod, num: TPoly) -> Scalar {
        Scalar::normalize(z, num, TPoly::constant(1))
    }

    /// Builds `num/den`, normalising constant denominators away.
    pub fn normalize(z: &ZMod, num: TPoly, den: TPoly) -> Scalar {
        if num.is_zero() {
            return Scalar::C(0);
        }
        if let Some(c) = den.as_constant() {
            let inv = z.inv(c).expect("denominator must have unit content");
            let num = if c == 1 { num } else { num.scale(z, inv) };
            return match num.as_constant() {
                Some(k) => Scalar::C(k),
                None => Scalar::F(Box::new(Frac { num, den: TPoly::constant(1) })),
            };
        }
        if num == den {
            return Scalar::one(z);
        }
        let (num, den) = cancel_monomial(num, den);
        if let Some(c) = den.as_constant() {
            return Scalar::normalize(z, num, TPoly::constant(c));
        }
        if let Some(qt) = num.exact_div(z, &den) {
            return Scalar::normalize(z, qt, TPoly::constant(1));
        }
        Scalar::F(Box::new(Frac { num, den }))
    }

    fn parts(&self) -> (TPoly, TPoly) {
        match self {
            Scalar::C(c) => (TPoly::constant(*c), TPoly::constant(1)),
            Scalar::F(f) => (f.num.clone(), f.den.clone()),
        }
    }

    pub fn numerator(&self) -> TPoly {
        self.parts().0
    }

    pub fn denominator(&self) -> TPoly {
        self.parts().1
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::C(0))
    }

    pub fn add(&self, z: &ZMod, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::C(a), Scalar::C(b)) => Scalar::C(z.add(*a, *b)),
            _ => {
                let (a, b) = self.parts();
                let (c, d) = o.parts();
                if b == d {
                    Scalar::normalize(z, a.add(z, &c), b)
                } else if let Some(k) = b.exact_div(z, &d) {
                    Scalar::normalize(z, a.add(z, &c.mul(z, &k)), b)
                } else if let Some(k) = d.exact_div(z, &b) {
                    Scalar::normalize(z, a.mul(z, &k).add(z, &c), d)
                } else {
                    Scalar::normalize(z, a.mul(z, &d).add(z, &c.mul(z, &b)), b.mul(z, &d))
                }
            }
        }
    }

    pub fn neg(&self, z: &ZMod) -> Scalar {
        match self {
            Scalar::C(a) => Scalar::C(z.neg(*a)),
            Scalar::F(f) => Scalar::F(Box::new(Frac { num: f.num.neg(z), den: f.den.clone() })),
        }
    }

    pub fn sub(&self, z: &ZMod, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::C(a), Scalar::C(b)) => Scalar::C(z.sub(*a, *b)),
            _ => self.add(z, &o.neg(z)),
        }
    }

    pub fn mul(&self, z: &ZMod, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::C(a), Scalar::C(b)) => Scalar::C(z.mul(*a, *b)),
            (Scalar::C(a), Scalar::F(f)) | (Scalar::F(f), Scalar::C(a)) => {
                Scalar::normalize(z, f.num.scale(z, *a), f.den.clone())
            }
            (Scalar::F(f), Scalar::F(g)) => {
                let (a, d) = cross_cancel(z, f.num.clone(), g.den.clone());
                let (c, b) = cross_cancel(z, g.num.clone(), f.den.clone());
                Scalar::normalize(z, a.mul(z, &c), b.mul(z, &d))
            }
        }
    }

    pub fn scale_int(&self, z: &ZMod, k: i128) -> Scalar {
        self.mul(z, &Scalar::from_i128(z, k))
    }

    /// p-adic valuation (content of the numerator); `None` for zero.
    pub fn vp(&self, z: &ZMod) -> Option<u32> {
        match self {
            Scalar::C(a) => z.vp(*a),
            Scalar::F(f) => f.num.content_vp(z),
        }
    }

    /// Exact division by p (the scalar must have positive valuation).
    pub fn div_p(&self, z: &ZMod) -> Scalar {
        match self {
            Scalar::C(a) => Scalar::C(z.div_p(*a)),
            Scalar::F(f) => Scalar::normalize(z, f.num.div_p(z), f.den.clone()),
        }
    }

    /// Inverse of a scalar of valuation zero.
    pub fn inv(&self, z: &ZMod) -> Option<Scalar> {
        match self {
            Scalar::C(a) => z.inv(*a).map(Scalar::C),
            Scalar::F(f) => {
                if f.num.content_vp(z) != Some(0) {
                    return None;
                }
                Some(Scalar::normalize(z, f.den.clone(), f.num.clone()))
            }
        }
    }

    /// Whether the scalar involves the transcendentals.
    pub fn is_constant(&self) -> bool {
        matches!(self, Scalar::C(_))
    }

    pub fn fmt_with(&self, z: &ZMod, names: &[&str]) -> String {
        match self {
            Scalar::C(a) => alloc::format!("{}", z.signed(*a)),
            Scalar::F(f) => {
                if f.den.as_constant() == Some(1) {
                    f.num.fmt_with(z, names)
                } else {
                    alloc::format!("({})/({})", f.num.fmt_with(z, names), f.den.fmt_with(z, names))
                }
            }
        }
    }
}
