//! Exact valuations: rational exponents of the display base θ, or `+∞`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational number used for valuations, weights, slopes and breaks.
pub type Q = Ratio<i64>;

/// Builds the rational `n/d`.
pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Builds the integer rational `n`.
pub fn qi(n: i64) -> Q {
    Ratio::from_integer(n)
}

/// A valuation `v` standing for the norm `θ^v`; `Infinite` is the valuation
/// of zero. Ordering puts `Infinite` above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Q),
    Infinite,
}

impl Valuation {
    pub fn int(n: i64) -> Self {
        Valuation::Finite(qi(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(&self) -> Option<Q> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }

    /// Valuation of a sum when the summands have the given valuations and
    /// do not cancel (the ultrametric bound).
    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Scales a valuation by a non-negative rational (e.g. a change of
    /// normalisation or the valuation of a power).
    pub fn scale(self, k: Q) -> Self {
        match self {
            Valuation::Finite(v) => Valuation::Finite(v * k),
            Valuation::Infinite => {
                if k.is_zero() {
                    Valuation::Finite(Q::zero())
                } else {
                    Valuation::Infinite
                }
            }
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Add<Q> for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Q) -> Self {
        match self {
            Valuation::Finite(a) => Valuation::Finite(a + rhs),
            Valuation::Infinite => Valuation::Infinite,
        }
    }
}

impl Sub<Q> for Valuation {
    type Output = Valuation;
    fn sub(self, rhs: Q) -> Self {
        self + (-rhs)
    }
}

impl Neg for Valuation {
    type Output = Option<Valuation>;
    fn neg(self) -> Option<Valuation> {
        self.finite().map(|v| Valuation::Finite(-v))
    }
}

impl From<Q> for Valuation {
    fn from(v: Q) -> Self {
        Valuation::Finite(v)
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::int(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", v),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Largest integer `≤ x`.
pub fn floor_q(x: Q) -> i64 {
    Integer::div_floor(x.numer(), x.denom())
}

/// Smallest integer `≥ x`.
pub fn ceil_q(x: Q) -> i64 {
    -Integer::div_floor(&-*x.numer(), x.denom())
}

/// The rational with the smallest denominator in the closed interval
/// `[lo, hi]` (Stern–Brocot descent); ties between equal denominators are
/// resolved towards the smallest numerator. Returns `None` if `lo > hi`.
pub fn simplest_in(lo: Q, hi: Q) -> Option<Q> {
    if lo > hi {
        return None;
    }
    let fl = floor_q(lo);
    if qi(fl) == lo {
        return Some(lo);
    }
    if qi(fl + 1) <= hi {
        return Some(qi(fl + 1));
    }
    // lo and hi share the integer part: recurse on reciprocals of the
    // fractional parts, which reverses their order.
    let base = qi(fl);
    let a = lo - base;
    let b = hi - base;
    let inner = simplest_in(b.recip(), a.recip())?;
    Some(base + inner.recip())
}

/// Snaps `x` to a rational with denominator `≤ max_den` inside the window
/// `[lo, hi]` (which should contain `x`). The simplest such rational is
/// returned; `None` if the window contains no rational of small enough
/// denominator.
pub fn snap(lo: Q, hi: Q, max_den: i64) -> Option<Q> {
    let s = simplest_in(lo, hi)?;
    if *s.denom() <= max_den {
        Some(s)
    } else {
        None
    }
}

/// Rounds `x` to the nearest rational with denominator `≤ max_den`.
pub fn nearest_with_den(x: Q, max_den: i64) -> Q {
    let mut best = qi(floor_q(x));
    let mut best_err = (x - best).abs();
    for d in 1..=max_den.max(1) {
        let n = floor_q(x * qi(d));
        for cand in [q(n, d), q(n + 1, d)] {
            let err = (x - cand).abs();
            if err < best_err {
                best = cand;
                best_err = err;
            }
        }
    }
    best
}

/// `n!`'s p-adic valuation (Legendre's formula).
pub fn vp_factorial(n: u64, p: u64) -> i64 {
    let mut s = 0i64;
    let mut k = n;
    while k > 0 {
        k /= p;
        s += k as i64;
    }
    s
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(mut n: i128, p: i128) -> Option<i64> {
    if n == 0 {
        return None;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Some(v)
}

/// `1` as a rational (convenience for generic code).
pub fn one() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_places_infinity_last() {
        assert!(Valuation::int(5) < Valuation::Infinite);
        assert_eq!(Valuation::int(2).min(Valuation::Infinite), Valuation::int(2));
        assert_eq!(Valuation::int(2) + Valuation::Infinite, Valuation::Infinite);
    }

    #[test]
    fn simplest_rational_in_window() {
        assert_eq!(simplest_in(q(13, 10), q(17, 10)), Some(q(3, 2)));
        assert_eq!(simplest_in(q(19, 10), q(21, 10)), Some(qi(2)));
        assert_eq!(simplest_in(q(1, 3), q(1, 3)), Some(q(1, 3)));
        assert_eq!(simplest_in(q(-7, 10), q(-6, 10)), Some(q(-2, 3)));
        assert_eq!(snap(q(33, 100), q(34, 100), 2), None);
    }

    #[test]
    fn floors_and_ceilings() {
        assert_eq!(floor_q(q(-1, 2)), -1);
        assert_eq!(ceil_q(q(-1, 2)), 0);
        assert_eq!(ceil_q(q(5, 2)), 3);
        assert_eq!(vp_factorial(25, 5), 6);
        assert_eq!(nearest_with_den(q(333, 1000), 5), q(1, 3));
    }
}
