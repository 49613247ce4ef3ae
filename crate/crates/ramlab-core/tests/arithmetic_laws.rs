//! Ultrametric laws of truncated field arithmetic and Gauss-norm
//! multiplicativity, checked against integer-level oracles.

use proptest::prelude::*;
use ramlab_core::field::{make_field, FieldDescription, TowerStep};
use ramlab_core::gauss::{GaussPoly, VarSet};
use ramlab_core::valuation::{qi, Valuation, Q};
use ramlab_core::{Elem, Field};

/// `v_p(n)` by repeated division.
fn vp(mut n: i128, p: i128) -> Option<i64> {
    if n == 0 {
        return None;
    }
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    Some(k)
}

fn qp(p: u64) -> Field {
    make_field(&FieldDescription::qp(p, 30)).unwrap()
}

/// `Q_p(√(−p))`-type quadratic extension (Eisenstein `z² + p`).
fn ramified(p: u64) -> Field {
    make_field(&FieldDescription::qp(p, 30).eisenstein_ints("z", &[p as i64, 0, 1])).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(2u64), Just(3), Just(5)]
}

/// `Σ c_i π_L^i` with small integer coefficients.
fn from_digits(l: &Field, cs: &[i64]) -> Elem {
    let pi = l.pi();
    let mut acc = Elem::zero(l);
    let mut pw = Elem::one(l);
    for c in cs {
        acc = acc.add(&pw.mul(&Elem::from_int(l, *c as i128)));
        pw = pw.mul(&pi);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn integer_valuations_match_trial_division(p in prime(), n in -1_000_000i64..1_000_000) {
        let k = qp(p);
        let v = Elem::from_int(&k, n as i128).valuation();
        match vp(n as i128, p as i128) {
            None => prop_assert!(v.is_infinite()),
            Some(e) => prop_assert_eq!(v, Valuation::int(e)),
        }
    }

    #[test]
    fn valuation_is_additive_on_products(p in prime(), a in 1i64..100_000, b in 1i64..100_000, c in 1i64..100_000) {
        let k = qp(p);
        let x = Elem::from_ratio(&k, a as i128, c as i128).unwrap();
        let y = Elem::from_int(&k, b as i128);
        let expect = vp(a as i128, p as i128).unwrap() - vp(c as i128, p as i128).unwrap() + vp(b as i128, p as i128).unwrap();
        prop_assert_eq!(x.mul(&y).valuation(), Valuation::int(expect));
    }

    #[test]
    fn strong_triangle_inequality(p in prime(), xs in prop::collection::vec(-20i64..20, 1..6), ys in prop::collection::vec(-20i64..20, 1..6)) {
        let l = ramified(p);
        let x = from_digits(&l, &xs);
        let y = from_digits(&l, &ys);
        let (vx, vy, vs) = (x.valuation(), y.valuation(), x.add(&y).valuation());
        prop_assert!(vs >= vx.min(vy));
        if vx != vy {
            prop_assert_eq!(vs, vx.min(vy));
        }
        prop_assert_eq!(x.mul(&y).valuation(), vx + vy);
    }

    #[test]
    fn inverses_multiply_to_one(p in prime(), xs in prop::collection::vec(-20i64..20, 1..6)) {
        let l = ramified(p);
        let x = from_digits(&l, &xs);
        prop_assume!(!x.is_zero());
        let y = x.inv().unwrap();
        prop_assert!(x.mul(&y).sub(&Elem::one(&l)).valuation() >= Valuation::int(10));
        prop_assert_eq!(Some(y.valuation()), -x.valuation());
    }

    #[test]
    fn gauss_valuation_is_multiplicative(
        p in prime(),
        f in prop::collection::vec((0u16..4, 0u16..4, -30i64..30), 1..6),
        g in prop::collection::vec((0u16..4, 0u16..4, -30i64..30), 1..6),
        s0 in 0i64..8, s1 in 0i64..8, den in 1i64..4,
    ) {
        let k = make_field(&FieldDescription::qp(p, 30).with_step(TowerStep::Transcendentals(1))).unwrap();
        let vars = VarSet::new(&["x", "y"]);
        let build = |terms: &[(u16, u16, i64)]| {
            let mut h = GaussPoly::zero(&k, &vars, None).unwrap();
            for (a, b, c) in terms {
                // coefficients c·(1 + t) keep the residue field in play
                let coef = Elem::from_int(&k, *c as i128).mul(&Elem::one(&k).add(&Elem::t(&k, 0)));
                let x = GaussPoly::var(&k, &vars, None, "x").unwrap().pow(*a as u32).unwrap();
                let y = GaussPoly::var(&k, &vars, None, "y").unwrap().pow(*b as u32).unwrap();
                h = h.add(&x.mul(&y).unwrap().scale(&coef)).unwrap();
            }
            h
        };
        let (hf, hg) = (build(&f), build(&g));
        prop_assume!(!hf.is_zero() && !hg.is_zero());
        let w = [Q::new(s0, den), Q::new(s1, den)];
        let prod = hf.mul(&hg).unwrap();
        prop_assert_eq!(prod.gauss_valuation_with(&w), hf.gauss_valuation_with(&w) + hg.gauss_valuation_with(&w));
    }

    #[test]
    fn gauss_valuation_is_monotone_in_weights(
        p in prime(),
        f in prop::collection::vec((0u16..4, 0u16..4, -30i64..30), 1..6),
        s in (0i64..6, 0i64..6), bump in (0i64..4, 0i64..4),
    ) {
        let k = qp(p);
        let vars = VarSet::new(&["x", "y"]);
        let mut h = GaussPoly::zero(&k, &vars, None).unwrap();
        for (a, b, c) in &f {
            let x = GaussPoly::var(&k, &vars, None, "x").unwrap().pow(*a as u32).unwrap();
            let y = GaussPoly::var(&k, &vars, None, "y").unwrap().pow(*b as u32).unwrap();
            h = h.add(&x.mul(&y).unwrap().scale(&Elem::from_int(&k, *c as i128))).unwrap();
        }
        let lo = [qi(s.0), qi(s.1)];
        let hi = [qi(s.0 + bump.0), qi(s.1 + bump.1)];
        prop_assert!(h.gauss_valuation_with(&hi) >= h.gauss_valuation_with(&lo));
    }
}

#[test]
fn gauss_valuation_of_a_binomial_is_the_smaller_term() {
    let k = qp(3);
    let vars = VarSet::new(&["x"]);
    // 9 + x at weight 1: min(2, 1) = 1; at weight 3: min(2, 3) = 2
    let h = GaussPoly::var(&k, &vars, None, "x").unwrap().add_const(&Elem::from_int(&k, 9));
    assert_eq!(h.gauss_valuation_with(&[qi(1)]), Valuation::int(1));
    assert_eq!(h.gauss_valuation_with(&[qi(3)]), Valuation::int(2));
}
