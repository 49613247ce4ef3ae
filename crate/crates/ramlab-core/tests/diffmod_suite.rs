//! Differential modules: construction from coverings, integrability,
//! intrinsic radii against closed forms, monotonicity, pullback radius
//! relations and break extraction.

use ramlab_core::corpus::{corpus_entry, kstar_field, kstar_relation, DEFAULT_PRECISION, GALOIS_CORPUS};
use ramlab_core::diffmod::{
    break_of_presentation, from_covering, pullback_frobenius, pullback_kstar, pullback_tame, radius_report, BreakMode,
    DifferentialModule, SpectralConfig,
};
use ramlab_core::field::{make_field, FieldDescription, TowerStep};
use ramlab_core::gauss::GaussPoly;
use ramlab_core::newton::roots_in_field;
use ramlab_core::ramification::lower_filtration;
use ramlab_core::thickening::{delta_vars, ThickeningPresentation};
use ramlab_core::valuation::{qi, Valuation, Q};
use ramlab_core::{Elem, Field};

fn qp(p: u64) -> Field {
    make_field(&FieldDescription::qp(p, 30)).unwrap()
}

/// `Q_p(t)^∧(s)`, `s^n = p`.
fn twisted_t(p: u64, n: usize) -> Field {
    let mut tw = vec![0i64; n + 1];
    tw[0] = -(p as i64);
    tw[n] = 1;
    make_field(&FieldDescription::qp(p, 30).with_step(TowerStep::Transcendentals(1)).eisenstein_ints("s", &tw)).unwrap()
}

/// `∂e = λe` on `|δ| ≤ θ^a`.
fn constant_rank_one(k: &Field, lam: &Elem, a: Q) -> DifferentialModule {
    let vars = delta_vars(0);
    let n = GaussPoly::constant(k, &vars, None, lam.clone()).unwrap();
    DifferentialModule::rank_one(k, &vars, vec![a], vec![n]).unwrap()
}

/// Closed form for `∂e = λe`: `∂^n e = λ^n e`, so `|∂|_sp = |λ|` against
/// the generic `|p|^{1/(p−1)}θ^{−s}`: `−log_θ IR = max(0, β/(p−1) − s − v(λ))`.
fn rank_one_ir_exponent(k: &Field, lam: &Elem, s: Q) -> Q {
    let omega = Q::new(k.beta(), k.p() as i64 - 1);
    let v = lam.valuation().finite().unwrap();
    (omega - s - v).max(qi(0))
}

fn presentation(label: &str, trunc: u32) -> ThickeningPresentation {
    let l = corpus_entry(label).unwrap().field(DEFAULT_PRECISION).unwrap();
    ThickeningPresentation::eisenstein(&l, trunc).unwrap()
}

#[test]
fn covering_module_of_a_square_root_is_the_oracle_series() {
    // u² = 3 + δ: ∂u = u / (2(3 + δ)), so N[1][1] = Σ (−1)^n δ^n / (2·3^{n+1})
    let pres = presentation("Q3(sqrt3)", 6);
    let m = from_covering(&pres).unwrap();
    assert_eq!(m.rank(), 2);
    let k = m.field().clone();
    let n = m.matrix(0);
    assert!(n[0][0].is_zero() && n[0][1].is_zero() && n[1][0].is_zero());
    for d in 0..6u16 {
        let sign = if d % 2 == 0 { 1 } else { -1 };
        let expect = Elem::from_ratio(&k, sign, 2 * 3i128.pow(d as u32 + 1)).unwrap();
        assert!(n[1][1].coeff(&[d]).sub(&expect).valuation() >= Valuation::int(15), "degree {}: {}", d, m.to_text());
    }
}

#[test]
fn modules_are_integrable() {
    for p in [2u64, 3] {
        let l = kstar_field(p).unwrap();
        let m = from_covering(&ThickeningPresentation::eisenstein(&l, 8).unwrap()).unwrap();
        assert_eq!(m.directions(), 2);
        assert!(m.is_integrable().unwrap(), "K_* module, p = {}", p);
    }
    // exact rank-one connections N_j = ∂_j f
    let k = twisted_t(3, 2);
    let vars = delta_vars(1);
    let d0 = GaussPoly::var(&k, &vars, None, "d0").unwrap();
    let d1 = GaussPoly::var(&k, &vars, None, "d1").unwrap();
    let f = d0.pow(2).unwrap().mul(&d1).unwrap().add(&d1.pow(3).unwrap()).unwrap();
    let m = DifferentialModule::rank_one(&k, &vars, vec![qi(1), qi(1)], vec![f.derivative(0), f.derivative(1)]).unwrap();
    assert!(m.is_integrable().unwrap());
    // N_0 = δ_1, N_1 = 0 has curvature −1
    let zero = GaussPoly::zero(&k, &vars, None).unwrap();
    let m = DifferentialModule::rank_one(&k, &vars, vec![qi(1), qi(1)], vec![d1, zero]).unwrap();
    assert!(!m.is_integrable().unwrap());
}

#[test]
fn trivial_module_has_full_radius_everywhere() {
    let k = qp(5);
    let m = DifferentialModule::trivial(&k, &delta_vars(0), vec![qi(0)], 3).unwrap();
    for s in 0..6 {
        assert_eq!(radius_report(&m, &[qi(s)], &SpectralConfig::default()).unwrap().ir_exponent, qi(0));
    }
}

#[test]
fn rank_one_radii_match_the_closed_form() {
    let cfg = SpectralConfig::default();
    for p in [2u64, 3, 5] {
        let k = qp(p);
        for v in 0..7i128 {
            let lam = Elem::from_ratio(&k, 1, (p as i128).pow(v as u32)).unwrap();
            for s in [qi(0), Q::new(1, 2), qi(1), qi(3)] {
                let got = radius_report(&constant_rank_one(&k, &lam, qi(0)), &[s], &cfg).unwrap().ir_exponent;
                assert_eq!(got, rank_one_ir_exponent(&k, &lam, s), "p = {}, v(λ) = −{}, s = {}", p, v, s);
            }
        }
    }
}

fn monotone(m: &DifferentialModule, grid: &[Q], label: &str) {
    let cfg = SpectralConfig::default();
    let irs: Vec<Q> = grid.iter().map(|s| radius_report(m, &vec![*s; m.directions()], &cfg).unwrap().ir_exponent).collect();
    for w in irs.windows(2) {
        assert!(w[1] <= w[0], "{}: IR decreased along {:?}: {:?}", label, grid, irs);
    }
}

#[test]
fn intrinsic_radius_is_monotone_in_the_weights() {
    let grid: Vec<Q> = (4..=16).map(|i| Q::new(i, 4)).collect();
    for label in ["Q2(zeta4)", "Q2(sqrt2)", "Q3(sqrt3)", "Q3(zeta9)+", "Q5[T^5+5T^4-5]"] {
        let m = from_covering(&presentation(label, 12)).unwrap();
        monotone(&m, &grid, label);
    }
    for p in [2u64, 3, 5] {
        let k = qp(p);
        let lam = Elem::from_ratio(&k, 1, (p as i128).pow(4)).unwrap();
        monotone(&constant_rank_one(&k, &lam, qi(0)), &grid, "rank one");
    }
}

#[test]
fn tame_pullback_preserves_intrinsic_radius_on_rank_one_modules() {
    let cfg = SpectralConfig::default();
    let mut count = 0;
    for p in [2u64, 3, 5] {
        let k = qp(p);
        let n = if p == 2 { 3 } else { 2 };
        for v in 3..7u32 {
            for y in [Elem::one(&k), Elem::from_int(&k, p as i128)] {
                let lam = Elem::from_ratio(&k, 1, (p as i128).pow(v)).unwrap();
                let a = qi(4);
                let m = constant_rank_one(&k, &lam, a);
                let before = radius_report(&m, &[a], &cfg).unwrap().ir_exponent;
                assert_eq!(before, rank_one_ir_exponent(&k, &lam, a));
                let pb = pullback_tame(&m, n, &y).unwrap();
                let b = y.valuation().finite().unwrap() * qi(n as i64);
                assert_eq!(pb.radii()[0], a - b * Q::new(n as i64 - 1, n as i64));
                let after = radius_report(&pb, pb.radii(), &cfg).unwrap().ir_exponent;
                assert_eq!(after, before, "p = {}, v(λ) = −{}, y = {:?}", p, v, y.valuation());
                count += 1;
            }
        }
    }
    assert!(count >= 20);
}

#[test]
fn tame_pullback_preserves_intrinsic_radius_on_rank_p_modules() {
    let cfg = SpectralConfig::default();
    let cases = [("Q2(zeta4)", Q::new(3, 2)), ("Q2(sqrt3)", qi(2)), ("Q3[T^3+3T^2-3]", qi(2)), ("Q3(zeta9)+", Q::new(3, 2)), ("Q5[T^5+5T^4-5]", Q::new(3, 2))];
    for (label, a) in cases {
        let m = from_covering(&presentation(label, 16)).unwrap().with_radii(vec![a]).unwrap();
        assert_eq!(m.rank() as u64, corpus_entry(label).unwrap().p);
        let k = m.field().clone();
        let n = if k.p() == 2 { 3 } else { 2 };
        let before = radius_report(&m, &[a], &cfg).unwrap().ir_exponent;
        let pb = pullback_tame(&m, n, &Elem::one(&k)).unwrap();
        let after = radius_report(&pb, pb.radii(), &cfg).unwrap().ir_exponent;
        assert_eq!(after, before, "{} at a = {}", label, a);
    }
}

#[test]
fn tame_pullback_of_degree_one_is_the_identity() {
    let k = qp(3);
    let lam = Elem::from_ratio(&k, 1, 3i128.pow(5)).unwrap();
    let m = constant_rank_one(&k, &lam, qi(2));
    let pb = pullback_tame(&m, 1, &Elem::from_int(&k, 7)).unwrap();
    assert_eq!(pb.radii(), m.radii());
    assert!(pb.matrix(0)[0][0].coeff(&[0]).sub(&lam).is_zero());
}

#[test]
fn frobenius_pullback_never_shrinks_the_radius() {
    let cfg = SpectralConfig::default();
    let mut checked = 0;
    for (p, n) in [(2u64, 3usize), (3, 2)] {
        let k = twisted_t(p, n);
        for v in 0..4i64 {
            let lam = k.pi().pow(-v).unwrap();
            for (a, b) in [(2i64, qi(1)), (3, qi(2)), (2, Q::new(3, 2)), (3, Q::new(5, 2))] {
                let m = constant_rank_one(&k, &lam, qi(a));
                let pb = match pullback_frobenius(&m, &Elem::one(&k), b) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                let before = radius_report(&m, &[qi(a)], &cfg).unwrap().ir_exponent;
                let after = radius_report(&pb, pb.radii(), &cfg).unwrap().ir_exponent;
                assert!(after <= before, "p = {}, v(λ) = −{}, a = {}, b = {}: {} > {}", p, v, a, b, after, before);
                checked += 1;
            }
        }
    }
    assert!(checked >= 20);
}

#[test]
fn differential_breaks_agree_with_classical_breaks() {
    let cfg = SpectralConfig::default();
    for e in GALOIS_CORPUS {
        let l = e.field(DEFAULT_PRECISION).unwrap();
        let (_, profile) = lower_filtration(&l).unwrap();
        let pres = ThickeningPresentation::eisenstein(&l, 12).unwrap();
        let got = break_of_presentation(&pres, BreakMode::NonLog, &cfg).unwrap();
        assert_eq!(got.value, profile.b, "{}", e.label);
    }
}

#[test]
fn kstar_differential_breaks() {
    let cfg = SpectralConfig::default();
    for p in [2u64, 3] {
        let l = kstar_field(p).unwrap();
        let pres = ThickeningPresentation::standard(&l, 12).unwrap();
        assert_eq!(break_of_presentation(&pres, BreakMode::NonLog, &cfg).unwrap().value, qi(2), "p = {}", p);
        assert_eq!(break_of_presentation(&pres, BreakMode::Log, &cfg).unwrap().value, qi(1), "p = {}", p);
    }
}

#[test]
fn kstar_rotation_lands_on_the_shrunken_disc_with_full_radius() {
    let cfg = SpectralConfig::default();
    for p in [2u64, 3] {
        let l = kstar_field(p).unwrap();
        let k = l.parent().unwrap().clone();
        let m0 = from_covering(&ThickeningPresentation::eisenstein(&l, 16).unwrap()).unwrap();
        let root = roots_in_field(&kstar_relation(&k).unwrap().coerce(&l).unwrap()).unwrap()[0].clone();
        for a in [Q::new(3, 2), qi(2)] {
            let m = m0.with_radii(vec![a + qi(1), a]).unwrap();
            assert_eq!(radius_report(&m, m.radii(), &cfg).unwrap().ir_exponent, qi(0));
            let pb = pullback_kstar(&m, &root, 16).unwrap();
            let e = p as i64;
            assert_eq!(pb.radii()[0], (a - Q::new(p as i64 - 2, p as i64)) * qi(e));
            assert_eq!(radius_report(&pb, pb.radii(), &cfg).unwrap().ir_exponent, qi(0), "p = {}, a = {}", p, a);
        }
        let m = m0.with_radii(vec![qi(2), qi(1)]).unwrap();
        assert!(pullback_kstar(&m, &root, 16).is_err());
    }
}

#[test]
fn matrix_and_covering_routes_agree() {
    use ramlab_core::diffmod::{spectral_valuation_via, Route};
    let cfg = SpectralConfig::default();
    for label in ["Q3(sqrt3)", "Q2(zeta4)", "Q3(zeta9)+", "Q5[T^5+5T^4-5]"] {
        let m = from_covering(&presentation(label, 16)).unwrap();
        for s in [Q::new(3, 2), qi(2), qi(3)] {
            let a = spectral_valuation_via(&m, 0, &[s], &cfg, Route::Covering).unwrap();
            let b = spectral_valuation_via(&m, 0, &[s], &cfg, Route::Matrix).unwrap();
            assert_eq!(a.ir_exponent, b.ir_exponent, "{} at s = {}", label, s);
        }
    }
}
