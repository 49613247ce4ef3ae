//! TOML input documents: field specs, extension specs and family specs.
//!
//! A field spec describes the base field `K`:
//!
//! ```toml
//! p = 3
//! precision = 40          # π-digits of the top field (optional)
//! transcendentals = 1     # t1..tm (optional)
//! unramified = [2, 2, 1]  # monic, constant first (optional)
//! [[eisenstein]]
//! name = "s"
//! coeffs = [-3, 0, 1]     # or: poly = "s^2 - 3"
//! ```
//!
//! An extension spec is one more Eisenstein step over `K` (keys `label`,
//! `name`, `poly` or `coeffs`). A family spec lists `[[extension]]` entries
//! (field specs with a `label`; the top step is the audited extension) and
//! `[[builtin]]` shortcuts (`kind = "corpus" | "kstar" | "cyclotomic"`).

use std::path::Path;

use ramlab_core::corpus::{self, GALOIS_CORPUS};
use ramlab_core::field::{EisensteinPoly, FieldDescription, TowerStep};
use serde::Deserialize;

use crate::exit::{CliError, CliResult};

/// Precision used when neither the spec nor the command line sets one.
pub const DEFAULT_PRECISION: u32 = corpus::DEFAULT_PRECISION;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub name: String,
    pub poly: Option<String>,
    pub coeffs: Option<Vec<i64>>,
}

impl StepSpec {
    fn to_step(&self) -> CliResult<TowerStep> {
        let poly = match (&self.poly, &self.coeffs) {
            (Some(t), None) => EisensteinPoly::Text(t.clone()),
            (None, Some(c)) => EisensteinPoly::Integers(c.clone()),
            _ => return Err(CliError::input(format!("step `{}`: give exactly one of `poly` and `coeffs`", self.name))),
        };
        Ok(TowerStep::Eisenstein { name: self.name.clone(), poly })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub label: Option<String>,
    pub p: u64,
    pub precision: Option<u32>,
    pub transcendentals: Option<usize>,
    pub unramified: Option<Vec<i64>>,
    #[serde(default)]
    pub eisenstein: Vec<StepSpec>,
}

impl FieldSpec {
    /// The tower description; `precision` overrides the spec's own value.
    pub fn description(&self, precision: Option<u32>) -> CliResult<FieldDescription> {
        let prec = precision.or(self.precision).unwrap_or(DEFAULT_PRECISION);
        let mut d = FieldDescription::qp(self.p, prec);
        if let Some(m) = self.transcendentals.filter(|m| *m > 0) {
            d = d.with_step(TowerStep::Transcendentals(m));
        }
        if let Some(u) = &self.unramified {
            d = d.with_step(TowerStep::Unramified(u.clone()));
        }
        for s in &self.eisenstein {
            d = d.with_step(s.to_step()?);
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    pub label: Option<String>,
    pub name: String,
    pub poly: Option<String>,
    pub coeffs: Option<Vec<i64>>,
}

impl ExtensionSpec {
    pub fn step(&self) -> CliResult<TowerStep> {
        StepSpec { name: self.name.clone(), poly: self.poly.clone(), coeffs: self.coeffs.clone() }.to_step()
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BuiltinSpec {
    /// The Galois regression corpus, optionally restricted to some labels.
    Corpus { labels: Option<Vec<String>> },
    /// `K_*/K` for each listed prime.
    Kstar { primes: Vec<u64> },
    /// `Q_p(ζ_{p^n})/Q_p` for each listed prime and `1 ≤ n ≤ max_n`.
    Cyclotomic { primes: Vec<u64>, max_n: u32 },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default)]
    pub builtin: Vec<BuiltinSpec>,
    #[serde(default)]
    pub extension: Vec<FieldSpec>,
}

/// One extension of a family, ready to build.
#[derive(Clone, Debug)]
pub struct Member {
    pub label: String,
    pub description: FieldDescription,
}

/// Coefficients of `Φ_{p^n}(x + 1) = Σ_{k<p} (x + 1)^{k·p^{n−1}}`,
/// constant first.
pub fn cyclotomic_shifted(p: u64, n: u32) -> CliResult<Vec<i64>> {
    if n == 0 {
        return Err(CliError::input("cyclotomic family needs n ≥ 1"));
    }
    let q = p.checked_pow(n - 1).ok_or_else(|| CliError::input("cyclotomic degree overflows"))? as usize;
    let deg = (p as usize - 1) * q;
    // binomial rows of (x + 1)^j for j ≤ deg
    let mut row = vec![1i128];
    let mut out = vec![0i128; deg + 1];
    for j in 0..=deg {
        if j % q == 0 {
            for (i, c) in row.iter().enumerate() {
                out[i] += c;
            }
        }
        let mut next = vec![1i128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    out.into_iter().map(|c| i64::try_from(c).map_err(|_| CliError::input("cyclotomic coefficient overflows"))).collect()
}

impl FamilySpec {
    /// Expands builtins and explicit entries, in document order
    /// (builtins first).
    pub fn members(&self, precision: Option<u32>) -> CliResult<Vec<Member>> {
        let prec = precision.unwrap_or(DEFAULT_PRECISION);
        let mut out = Vec::new();
        for b in &self.builtin {
            match b {
                BuiltinSpec::Corpus { labels } => {
                    let entries: Vec<_> = match labels {
                        None => GALOIS_CORPUS.iter().collect(),
                        Some(ls) => ls
                            .iter()
                            .map(|l| corpus::corpus_entry(l).ok_or_else(|| CliError::input(format!("unknown corpus label `{}`", l))))
                            .collect::<CliResult<_>>()?,
                    };
                    for e in entries {
                        out.push(Member { label: e.label.to_string(), description: e.description(prec) });
                    }
                }
                BuiltinSpec::Kstar { primes } => {
                    for &p in primes {
                        out.push(Member { label: format!("K*/K p={}", p), description: corpus::kstar_description(p, prec) });
                    }
                }
                BuiltinSpec::Cyclotomic { primes, max_n } => {
                    for &p in primes {
                        for n in 1..=*max_n {
                            let c = cyclotomic_shifted(p, n)?;
                            // conjugates must stay separated through the
                            // group-table check: four p-digits at least
                            let own = precision.unwrap_or(DEFAULT_PRECISION.max(4 * (c.len() as u32 - 1)));
                            out.push(Member {
                                label: format!("Q{}(zeta{})", p, p.pow(n)),
                                description: FieldDescription::qp(p, own).eisenstein_ints("z", &c),
                            });
                        }
                    }
                }
            }
        }
        for (i, e) in self.extension.iter().enumerate() {
            let label = e.label.clone().unwrap_or_else(|| format!("extension {}", i + 1));
            if e.eisenstein.is_empty() {
                return Err(CliError::input(format!("`{}` has no Eisenstein step to audit", label)));
            }
            out.push(Member { label, description: e.description(precision)? });
        }
        Ok(out)
    }
}

/// Reads a document, returning its bytes (for hashing) and parsed value.
pub fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<(Vec<u8>, T)> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    let value = toml::from_str(text).map_err(|e| CliError::input(format!("{}: {}", path.display(), e)))?;
    Ok((bytes, value))
}
