//! The `p`-th power radius bound: if `|b − T| < r·|b|` then
//! `|b^p − T^p| ≤ max(r^p|b|^p, |p|·r·|b|^p)`, in valuation form
//! `v(b^p − T^p) ≥ p·v(b) + min(p·ρ, v(p) + ρ)` with `r = θ^ρ`.

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::valuation::{qi, Valuation, Q};

/// The lower bound `p·v_b + min(p·ρ, β + ρ)` for `v(b^p − T^p)`.
pub fn pth_power_bound(v_b: Q, rho: Q, p: u64, beta: i64) -> Q {
    let p = qi(p as i64);
    p * v_b + (p * rho).min(qi(beta) + rho)
}

/// Outcome of one exact check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PthPowerSample {
    /// `v(b − T) > ρ + v(b)`.
    pub hypothesis: bool,
    /// `v(b^p − T^p)`.
    pub lhs: Valuation,
    pub bound: Q,
    /// Hypothesis fails or `lhs ≥ bound`.
    pub ok: bool,
}

impl PthPowerSample {
    /// `lhs − bound` (`None` when `b^p = T^p` at the working precision).
    pub fn margin(&self) -> Option<Q> {
        self.lhs.finite().map(|v| v - self.bound)
    }
}

/// Checks the bound for `b, T` in one field at radius `θ^ρ`.
pub fn check_pth_power(b: &Elem, t: &Elem, rho: Q) -> Result<PthPowerSample> {
    if b.is_zero() {
        return Err(Error::ParameterOutOfRange("b must be nonzero".into()));
    }
    let fld = b.field();
    let p = fld.p();
    let v_b = b.valuation().finite().unwrap();
    let hypothesis = b.sub(t).valuation() > Valuation::from(rho + v_b);
    let lhs = b.pow(p as i64)?.sub(&t.pow(p as i64)?).valuation();
    let bound = pth_power_bound(v_b, rho, p, fld.beta());
    let ok = !hypothesis || lhs >= Valuation::from(bound);
    Ok(PthPowerSample { hypothesis, lhs, bound, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};

    #[test]
    fn bound_switches_regime_at_the_critical_radius() {
        // p = 3, β = 1: pρ vs 1 + ρ cross at ρ = 1/2
        assert_eq!(pth_power_bound(qi(0), Q::new(1, 4), 3, 1), Q::new(3, 4));
        assert_eq!(pth_power_bound(qi(0), qi(2), 3, 1), qi(3));
    }

    #[test]
    fn near_units_satisfy_the_bound() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let b = Elem::from_int(&k, 2);
        let t = Elem::from_int(&k, 2 + 9);
        let s = check_pth_power(&b, &t, qi(1)).unwrap();
        assert!(s.hypothesis && s.ok);
        assert_eq!(s.lhs, Valuation::int(3));
    }
}
