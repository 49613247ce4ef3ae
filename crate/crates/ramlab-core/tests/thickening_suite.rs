//! ψ deformation, presentations and component counting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramlab_core::corpus::{kstar_field, kstar_relation};
use ramlab_core::error::Error;
use ramlab_core::field::{make_field, FieldDescription, TowerStep};
use ramlab_core::gauss::{Exps, GaussPoly};
use ramlab_core::thickening::{
    check_approx_hom, count_components_single_relation, decompose, default_level, differential_congruence_margin,
    ik_margin, psi, thickening_vars, ThickeningPresentation,
};
use ramlab_core::valuation::{qi, Valuation, Q};
use ramlab_core::{Elem, Field};

/// `Q_p(t_1..t_m)^∧(s)`, `s^n = p`: `β_K = n`.
fn twisted(p: u64, m: usize, n: usize) -> Field {
    let mut tw = vec![0i64; n + 1];
    tw[0] = -(p as i64);
    tw[n] = 1;
    make_field(&FieldDescription::qp(p, 24).with_step(TowerStep::Transcendentals(m)).eisenstein_ints("s", &tw)).unwrap()
}

/// A random element `c_0(t) + c_1(t)s + c_2(t)s²` with integer-coefficient
/// polynomials `c_k`; also returns the `c_k` as exponent/coefficient lists.
type TPolyTerms = Vec<(Vec<u32>, i64)>;

fn random_tpoly(m: usize, rng: &mut ChaCha8Rng) -> TPolyTerms {
    (0..rng.gen_range(1..4))
        .map(|_| ((0..m).map(|_| rng.gen_range(0..4u32)).collect(), rng.gen_range(-6..7i64)))
        .collect()
}

fn tpoly_elem(k: &Field, c: &TPolyTerms) -> Elem {
    let mut acc = Elem::zero(k);
    for (e, a) in c {
        let mut mono = Elem::from_int(k, *a as i128);
        for (j, x) in e.iter().enumerate() {
            mono = mono.mul(&Elem::t(k, j).pow(*x as i64).unwrap());
        }
        acc = acc.add(&mono);
    }
    acc
}

/// `∂c/∂t_j` computed on the integer data.
fn tpoly_deriv(c: &TPolyTerms, j: usize) -> TPolyTerms {
    c.iter()
        .filter(|(e, _)| e[j] > 0)
        .map(|(e, a)| {
            let mut e2 = e.clone();
            e2[j] -= 1;
            (e2, a * e[j] as i64)
        })
        .collect()
}

fn random_element(k: &Field, rng: &mut ChaCha8Rng) -> (Elem, Vec<TPolyTerms>) {
    let m = k.m();
    let cs: Vec<TPolyTerms> = (0..3).map(|_| random_tpoly(m, rng)).collect();
    let mut h = Elem::zero(k);
    for (i, c) in cs.iter().enumerate() {
        h = h.add(&tpoly_elem(k, c).mul(&k.pi().pow(i as i64).unwrap()));
    }
    (h, cs)
}

fn configs() -> Vec<Field> {
    // (β_K, m) = (2, 1) and (3, 2)
    vec![twisted(3, 1, 2), twisted(2, 2, 3)]
}

#[test]
fn psi_is_an_approximate_homomorphism_mod_ik() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7515_0001);
    for k in configs() {
        let r = default_level(&k);
        for i in 0..100 {
            let (h1, _) = random_element(&k, &mut rng);
            let (h2, _) = random_element(&k, &mut rng);
            if h1.is_zero() || h2.is_zero() {
                continue;
            }
            let rep = check_approx_hom(&h1, &h2, r, 4).unwrap();
            assert!(rep.pass, "β = {}, pair {}: {:?}", k.beta(), i, rep);
        }
    }
}

#[test]
fn psi_linear_terms_are_the_differential() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7515_0002);
    for k in configs() {
        let m = k.m();
        let r = default_level(&k);
        for i in 0..100 {
            let (h, cs) = random_element(&k, &mut rng);
            if h.is_zero() {
                continue;
            }
            // oracle: h̄_0 = c̄_1 (the π-linear part; p ∈ (π²) since β ≥ 2),
            // h̄_j = ∂c̄_0/∂t_j
            let mut expect = vec![tpoly_elem(&k, &cs[1]).residue().unwrap()];
            for j in 0..m {
                expect.push(tpoly_elem(&k, &tpoly_deriv(&cs[0], j)).residue().unwrap());
            }
            let margin = differential_congruence_margin(&h, &expect, r).unwrap();
            assert!(margin >= Valuation::int(0), "β = {}, sample {}: margin {}", k.beta(), i, margin);
        }
    }
}

#[test]
fn psi_values_agree_mod_ik_across_decomposition_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7515_0003);
    for k in configs() {
        let r = default_level(&k);
        for _ in 0..30 {
            let (h, _) = random_element(&k, &mut rng);
            if h.is_zero() {
                continue;
            }
            let a = psi(&h, r, 4).unwrap();
            let b = psi(&h, r + 1, 4).unwrap();
            let margin = ik_margin(&a.sub(&b).unwrap(), 0).unwrap();
            assert!(margin >= Valuation::int(0));
        }
    }
}

#[test]
fn decompositions_reassemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7515_0004);
    for k in configs() {
        for _ in 0..30 {
            let (h, _) = random_element(&k, &mut rng);
            let d = decompose(&h, default_level(&k)).unwrap();
            assert!(d.reassemble().unwrap().sub(&h).valuation() >= Valuation::int(k.cap() - 2));
        }
    }
}

/// Reduction of 200 random `Σ c_i u_0^i` (degree up to `3e`): the result
/// has `u_0`-degree `< e`, agrees at `u_0 = π_L`, and the basis
/// `1, π_L, …, π_L^{e−1}` is orthogonal: `v_L(Σ c_i π_L^i) = min(e·v(c_i) + i)`.
#[test]
fn basis_lemma_on_random_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7515_0005);
    let fields = vec![
        make_field(&FieldDescription::qp(3, 24).eisenstein_ints("z", &[-3, 0, 1])).unwrap(),
        kstar_field(3).unwrap(),
        kstar_field(2).unwrap(),
    ];
    for i in 0..200 {
        let l = &fields[i % fields.len()];
        let k = l.parent().unwrap().clone();
        let m = k.m();
        let e = l.e();
        let pres = ThickeningPresentation::standard(l, 4).unwrap();
        let vars = thickening_vars(m, e);
        let u0 = m + 1;
        let mut h = GaussPoly::zero(&k, &vars, None).unwrap();
        for d in 0..rng.gen_range(1..3 * e + 1) {
            let (c, _) = random_element(&k, &mut rng);
            let mut x = Exps::from_elem(0, vars.len());
            x[u0] = d as u16;
            h.add_term(x, c);
        }
        let red = pres.reduce(&h).unwrap();
        assert!(red.degree_in(u0).unwrap_or(0) < e as u16, "sample {}", i);
        let mut point = vec![Elem::zero(l); vars.len()];
        point[u0] = l.pi();
        let lhs = h.coerce_to(l).unwrap().eval(&point).unwrap();
        let rhs = red.coerce_to(l).unwrap().eval(&point).unwrap();
        assert!(lhs.sub(&rhs).valuation() >= Valuation::int(l.cap() / 2), "sample {}", i);
        let coeffs = red.univariate_coeffs(u0).unwrap();
        let expect = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(d, c)| Valuation::int(c.val_int().unwrap() * e as i64 + d as i64))
            .min()
            .unwrap_or(Valuation::Infinite);
        if !expect.is_infinite() {
            assert_eq!(rhs.valuation(), expect, "sample {}", i);
        }
    }
}

#[test]
fn standard_presentations_have_full_error_gauge() {
    for p in [2u64, 3, 5] {
        let l = kstar_field(p).unwrap();
        let pres = ThickeningPresentation::standard(&l, 4).unwrap();
        assert_eq!(pres.error_gauge().unwrap(), qi(l.parent().unwrap().beta()));
    }
}

fn kstar_with_correction(p: u64, build: impl Fn(&Field, &std::sync::Arc<ramlab_core::gauss::VarSet>) -> Vec<GaussPoly>) -> ThickeningPresentation {
    let l = kstar_field(p).unwrap();
    let base = ThickeningPresentation::standard(&l, 4).unwrap();
    let k = base.base.clone();
    let corr = build(&k, &base.vars);
    ThickeningPresentation::new(&k, base.e, base.generators.clone(), corr, 4).unwrap()
}

#[test]
fn error_gauge_follows_the_membership_scan() {
    // R_0 = p·δ_0·u_0 over K with β_K = 2: the δ_0 coefficient p·u_0 lies in
    // N^{2 + 1/e}, so the gauge is capped at β_K = 2
    let pres = kstar_with_correction(3, |k, vars| {
        let d0 = GaussPoly::var(k, vars, None, "d0").unwrap();
        let u0 = GaussPoly::var(k, vars, None, "u0").unwrap();
        vec![d0.mul(&u0).unwrap().scale(&Elem::from_int(k, 3))]
    });
    assert_eq!(pres.error_gauge().unwrap(), qi(2));
    // R_0 = π·δ_0: coefficient in N^1 exactly, ω = 1
    let pres = kstar_with_correction(3, |k, vars| {
        let d0 = GaussPoly::var(k, vars, None, "d0").unwrap();
        vec![d0.scale(&k.pi())]
    });
    assert_eq!(pres.error_gauge().unwrap(), qi(1));
    // R_0 = δ_0: below 1, not admissible
    let pres = kstar_with_correction(3, |k, vars| vec![GaussPoly::var(k, vars, None, "d0").unwrap()]);
    assert!(matches!(pres.error_gauge(), Err(Error::NotAdmissible(_))));
}

#[test]
fn kstar_space_splits_into_p_discs_above_the_break() {
    for p in [2u64, 3, 5] {
        let l = kstar_field(p).unwrap();
        let k = l.parent().unwrap().clone();
        let h = kstar_relation(&k).unwrap();
        for a in [Q::new(3, 2), qi(2)] {
            let c = count_components_single_relation(&h, &l, a, true).unwrap();
            assert_eq!(c.count, p as usize, "p = {}, a = {}", p, a);
            let expect = a - Q::new(p as i64 - 2, p as i64);
            assert!(c.radii.iter().all(|r| *r == expect), "p = {}, a = {}: {:?}", p, a, c.radii);
        }
        for a in [Q::new(1, 2), Q::new(3, 4)] {
            let c = count_components_single_relation(&h, &l, a, true).unwrap();
            assert!(c.count < p as usize, "p = {}, a = {}", p, a);
        }
    }
}

#[test]
fn component_threshold_is_the_log_break() {
    for p in [2u64, 3, 5] {
        let l = kstar_field(p).unwrap();
        let k = l.parent().unwrap().clone();
        let h = kstar_relation(&k).unwrap();
        let full = |a: Q| count_components_single_relation(&h, &l, a, true).unwrap().count == p as usize;
        // scan a ∈ (0, 3] on a 1/(4p) grid
        let den = 4 * p as i64;
        let first = (1..=3 * den).map(|i| Q::new(i, den)).find(|a| full(*a)).unwrap();
        assert!(first > qi(1) && first <= qi(1) + Q::new(1, den), "p = {}: {}", p, first);
        assert!(!full(qi(1)));
    }
}
