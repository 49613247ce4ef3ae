//! Newton polygon / root valuation duality on polynomials built from known
//! roots, Hensel slope factorisation, and root recovery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramlab_core::corpus::{kstar_field, kstar_relation};
use ramlab_core::field::{make_field, FieldDescription};
use ramlab_core::error::Error;
use ramlab_core::newton::{hensel_slope_factor, newton_polygon, root_difference_table, roots_in_field, slope_factor};
use ramlab_core::poly::Poly;
use ramlab_core::valuation::{qi, Valuation, Q};
use ramlab_core::{Elem, Field};

struct Sample {
    poly: Poly,
    roots: Vec<Elem>,
    /// Root valuations by construction.
    vals: Vec<Q>,
}

/// `Π (x − π^{k_i}·u_i)` with integers `u_i` prime to `p`, so the root
/// valuations are the `k_i` by construction.
fn sample(l: &Field, rng: &mut ChaCha8Rng) -> Sample {
    let p = l.p() as i64;
    let deg = rng.gen_range(1..=5);
    let mut poly = Poly::one(l);
    let mut roots = Vec::new();
    let mut vals = Vec::new();
    for _ in 0..deg {
        let k = rng.gen_range(0..4i64);
        let mut u = rng.gen_range(1..200i64);
        while u % p == 0 {
            u += 1;
        }
        let r = l.pi().pow(k).unwrap().mul(&Elem::from_int(l, u as i128));
        poly = poly.mul(&Poly::new(l, vec![r.neg(), Elem::one(l)]));
        roots.push(r);
        vals.push(qi(k));
    }
    Sample { poly, roots, vals }
}

fn fields() -> Vec<Field> {
    vec![
        make_field(&FieldDescription::qp(2, 40)).unwrap(),
        make_field(&FieldDescription::qp(3, 40)).unwrap(),
        make_field(&FieldDescription::qp(5, 30)).unwrap(),
        make_field(&FieldDescription::qp(3, 30).eisenstein_ints("z", &[-3, 0, 1])).unwrap(),
    ]
}

fn sorted(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v
}

#[test]
fn polygon_slopes_are_root_valuations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let fs = fields();
    for i in 0..200 {
        let l = &fs[i % fs.len()];
        let s = sample(l, &mut rng);
        let np = newton_polygon(&s.poly).unwrap();
        let mut got = Vec::new();
        for (v, mult) in np.root_valuations() {
            got.extend(std::iter::repeat(v).take(mult));
        }
        assert_eq!(sorted(got), sorted(s.vals.clone()), "sample {} over {}", i, l.describe());
    }
}

fn assert_product(l: &Field, factors: &[Poly], f: &Poly, i: usize) {
    let mut prod = Poly::one(l);
    for g in factors {
        prod = prod.mul(g);
    }
    assert!(prod.sub(f).content_valuation() >= Valuation::int(15), "sample {}: product differs", i);
}

#[test]
fn slope_factors_multiply_back_and_have_pure_slopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let fs = fields();
    let mut split = 0;
    for i in 0..100 {
        let l = &fs[i % fs.len()];
        let s = sample(l, &mut rng);
        let factors = slope_factor(&s.poly).unwrap();
        for g in &factors {
            assert_eq!(newton_polygon(g).unwrap().slopes.len(), 1, "factor with several slopes");
        }
        assert_product(l, &factors, &s.poly, i);
        // the residual split either succeeds or reports a repeated residual root
        match hensel_slope_factor(&s.poly, 20) {
            Ok(finer) => {
                assert!(finer.len() >= factors.len());
                assert_product(l, &finer, &s.poly, i);
                split += 1;
            }
            Err(Error::InseparableResidual(_)) => {}
            Err(e) => panic!("sample {}: {:?}", i, e),
        }
    }
    assert!(split > 20);
}

#[test]
fn distinct_roots_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let fs = fields();
    let mut checked = 0;
    for i in 0..200 {
        let l = &fs[i % fs.len()];
        let s = sample(l, &mut rng);
        let distinct = (0..s.roots.len()).all(|a| (a + 1..s.roots.len()).all(|b| !s.roots[a].sub(&s.roots[b]).is_zero()));
        if !distinct {
            continue;
        }
        let found = roots_in_field(&s.poly).unwrap();
        assert_eq!(found.len(), s.roots.len(), "sample {}", i);
        for r in &s.roots {
            assert!(found.iter().any(|x| x.sub(r).valuation() >= Valuation::int(12)), "root missing in sample {}", i);
        }
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn kstar_roots_are_pairwise_at_distance_two() {
    for p in [2u64, 3, 5] {
        let l = kstar_field(p).unwrap();
        let k = l.parent().unwrap().clone();
        let rs = root_difference_table(&kstar_relation(&k).unwrap(), &l).unwrap();
        assert_eq!(rs.roots.len(), p as usize);
        // v_{K_*}(ϖ_γ − ϖ_γ') = 2 for every pair of distinct roots
        assert!(rs.off_diagonal().iter().all(|v| *v == Valuation::int(2)), "p = {}", p);
    }
}
