//! Classical ramification data of the corpus against independent oracles:
//! local class field theory conductors, Hilbert's different formula and
//! the Hasse–Arf property.

use ramlab_core::corpus::{kstar_field, CorpusEntry, DEFAULT_PRECISION, GALOIS_CORPUS};
use ramlab_core::poly::Poly;
use ramlab_core::ramification::{hasse_arf_audit_one, lower_filtration};
use ramlab_core::valuation::{qi, Valuation, Q};

/// Largest Serre upper break, from the conductor-discriminant formula /
/// cyclotomic theory: `Q_p(ζ_{p^n})` has upper breaks `0, 1, …, n−1`;
/// `Q_2(√d)` has conductor exponent 2 for `d ≡ 3 (4)` and 3 for `d` even;
/// tame quadratic fields break at 0; the `T^p + pT^{p−1} − p` fields have
/// root differences of valuation 2, hence lower = upper break 1.
fn expected_u_max(label: &str) -> Q {
    match label {
        "Q2(zeta4)" | "Q2(sqrt3)" => qi(1),
        "Q2(sqrt2)" | "Q2(sqrt-2)" | "Q2(zeta8)" => qi(2),
        "Q3(zeta3)" | "Q3(sqrt3)" | "Q5(zeta5)" => qi(0),
        "Q3(zeta9)+" | "Q3(zeta9)" | "Q3[T^3+3T^2-3]" | "Q5[T^5+5T^4-5]" => qi(1),
        other => panic!("no oracle for {}", other),
    }
}

fn different_valuation(e: &CorpusEntry) -> Valuation {
    let l = e.field(DEFAULT_PRECISION).unwrap();
    let f = Poly::from_ints(&l, e.coeffs);
    f.derivative().eval(&l.pi()).valuation()
}

#[test]
fn corpus_has_the_required_shape() {
    assert!(GALOIS_CORPUS.len() >= 10);
    for p in [2u64, 3, 5] {
        assert!(GALOIS_CORPUS.iter().any(|e| e.p == p));
    }
    assert!(GALOIS_CORPUS.iter().all(|e| e.degree() as u64 <= e.p * e.p));
    for label in ["Q2(zeta4)", "Q3(zeta9)", "Q5(zeta5)"] {
        assert!(GALOIS_CORPUS.iter().any(|e| e.label == label));
    }
}

#[test]
fn upper_breaks_match_class_field_theory() {
    for e in GALOIS_CORPUS {
        let l = e.field(DEFAULT_PRECISION).unwrap();
        let (g, profile) = lower_filtration(&l).unwrap();
        assert_eq!(g.order(), e.degree(), "{}: not Galois over Q_p", e.label);
        let u_max = expected_u_max(e.label);
        assert_eq!(*profile.upper_breaks.last().unwrap(), u_max, "{}", e.label);
        assert_eq!(profile.b, u_max + qi(1), "{}", e.label);
        assert_eq!(profile.b_log, u_max, "{}", e.label);
    }
}

#[test]
fn lower_filtration_satisfies_hilbert_different_formula() {
    for e in GALOIS_CORPUS {
        let l = e.field(DEFAULT_PRECISION).unwrap();
        let (_, profile) = lower_filtration(&l).unwrap();
        let sum: i64 = (0..64).map(|i| profile.lower_order(qi(i)) as i64 - 1).sum();
        assert_eq!(Valuation::int(sum), different_valuation(e), "{}", e.label);
    }
}

#[test]
fn corpus_is_hasse_arf() {
    for e in GALOIS_CORPUS {
        let l = e.field(DEFAULT_PRECISION).unwrap();
        let row = hasse_arf_audit_one(e.label, &l).unwrap();
        assert!(row.ok, "{}", e.label);
        for (c, _) in &row.characters {
            assert!(c.art.is_integer() && c.art >= qi(0), "{}: Art {}", e.label, c.art);
            assert!(c.swan.is_integer() && c.swan >= qi(0), "{}: Swan {}", e.label, c.swan);
        }
        // wild subquotients (upper index > 0); the tame quotient is cyclic of
        // order prime to p
        for sq in &row.subquotients {
            if sq.order > 1 && sq.upper > qi(0) {
                assert!(sq.abelian && sq.killed_by_p, "{}: subquotient at {}", e.label, sq.upper);
            }
        }
    }
}

#[test]
fn faithful_characters_of_cyclic_extensions_have_conductor_b() {
    for label in ["Q2(zeta4)", "Q2(sqrt2)", "Q3(zeta9)+", "Q5[T^5+5T^4-5]"] {
        let e = GALOIS_CORPUS.iter().find(|e| e.label == label).unwrap();
        let l = e.field(DEFAULT_PRECISION).unwrap();
        let row = hasse_arf_audit_one(label, &l).unwrap();
        let u = expected_u_max(label);
        let max_art = row.characters.iter().map(|(c, _)| c.art).max().unwrap();
        let max_swan = row.characters.iter().map(|(c, _)| c.swan).max().unwrap();
        assert_eq!(max_art, u + qi(1), "{}", label);
        assert_eq!(max_swan, u, "{}", label);
    }
}

#[test]
fn kstar_has_a_single_lower_break_at_one() {
    for p in [2u64, 3, 5] {
        let l = kstar_field(p).unwrap();
        let (g, profile) = lower_filtration(&l).unwrap();
        assert_eq!(g.order(), p as usize);
        assert_eq!(profile.lower_breaks, vec![(qi(1), p as usize)]);
        assert_eq!(profile.b_log, qi(1));
        assert_eq!(profile.b, qi(2));
        let row = hasse_arf_audit_one("K*", &l).unwrap();
        assert!(row.characters.iter().filter(|(c, _)| c.dim == 1 && c.art > qi(0)).all(|(c, _)| c.swan == qi(1)));
    }
}
