//! Built-in fields: totally ramified Galois extensions of `Q_p` used as
//! a regression corpus, and the explicit `K_*/K` example over a tamely
//! twisted `Q_p(t)^∧`.

use alloc::format;
use alloc::vec;

use crate::error::Result;
use crate::field::{make_field, Field, FieldDescription, TowerStep};
use crate::poly::Poly;

/// A totally ramified Galois extension `Q_p[z]/(E(z))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub label: &'static str,
    pub p: u64,
    /// Coefficients of the Eisenstein polynomial `E`, constant term first.
    pub coeffs: &'static [i64],
}

impl CorpusEntry {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn description(&self, precision: u32) -> FieldDescription {
        FieldDescription::qp(self.p, precision).eisenstein_ints("z", self.coeffs)
    }

    pub fn field(&self, precision: u32) -> Result<Field> {
        make_field(&self.description(precision))
    }
}

/// Working precision (in `v_p` units) that keeps every corpus computation
/// exact.
pub const DEFAULT_PRECISION: u32 = 40;

pub const GALOIS_CORPUS: &[CorpusEntry] = &[
    CorpusEntry { label: "Q2(zeta4)", p: 2, coeffs: &[2, 2, 1] },
    CorpusEntry { label: "Q2(sqrt3)", p: 2, coeffs: &[-2, 2, 1] },
    CorpusEntry { label: "Q2(sqrt2)", p: 2, coeffs: &[-2, 0, 1] },
    CorpusEntry { label: "Q2(sqrt-2)", p: 2, coeffs: &[2, 0, 1] },
    CorpusEntry { label: "Q2(zeta8)", p: 2, coeffs: &[2, 4, 6, 4, 1] },
    CorpusEntry { label: "Q3(zeta3)", p: 3, coeffs: &[3, 3, 1] },
    CorpusEntry { label: "Q3(sqrt3)", p: 3, coeffs: &[-3, 0, 1] },
    CorpusEntry { label: "Q3(zeta9)+", p: 3, coeffs: &[3, 9, 6, 1] },
    CorpusEntry { label: "Q3(zeta9)", p: 3, coeffs: &[3, 9, 18, 21, 15, 6, 1] },
    CorpusEntry { label: "Q3[T^3+3T^2-3]", p: 3, coeffs: &[-3, 0, 3, 1] },
    CorpusEntry { label: "Q5(zeta5)", p: 5, coeffs: &[5, 10, 10, 5, 1] },
    CorpusEntry { label: "Q5[T^5+5T^4-5]", p: 5, coeffs: &[-5, 0, 0, 0, 5, 1] },
];

pub fn corpus_entry(label: &str) -> Option<&'static CorpusEntry> {
    GALOIS_CORPUS.iter().find(|e| e.label == label)
}

/// Degree of the tame twist `s^n = p` that makes `β_K ≥ 2`.
pub fn kstar_twist(p: u64) -> usize {
    if p == 2 {
        3
    } else {
        2
    }
}

/// `K = Q_p(t)^∧(s)`, `s^n = p`, and `K_* = K[z]/(z^p + s z^{p−1} − s)`.
pub fn kstar_description(p: u64, precision: u32) -> FieldDescription {
    let n = kstar_twist(p);
    let mut tw = vec![0i64; n + 1];
    tw[0] = -(p as i64);
    tw[n] = 1;
    FieldDescription::qp(p, precision)
        .with_step(TowerStep::Transcendentals(1))
        .eisenstein_ints("s", &tw)
        .eisenstein_text("z", &format!("z^{} + s*z^{} - s", p, p - 1))
}

/// The field `K_*`; its parent is `K`.
pub fn kstar_field(p: u64) -> Result<Field> {
    make_field(&kstar_description(p, DEFAULT_PRECISION))
}

/// `T^p + π_K T^{p−1} − π_K` over `K`.
pub fn kstar_relation(k: &Field) -> Result<Poly> {
    let p = k.p();
    Poly::parse(k, &format!("x^{} + s*x^{} - s", p, p - 1), "x")
}
