//! End-to-end analyses of one extension: breaks from the classical
//! filtration and from the differential route side by side, and the
//! explicit `K_*/K` example (root distances, breaks, disc decomposition).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::kstar_relation;
use crate::diffmod::{break_of_presentation, BreakMode, SpectralConfig};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::newton::root_difference_table;
use crate::ramification::{lower_filtration, RamificationProfile};
use crate::thickening::{count_components_single_relation, ThickeningPresentation};
use crate::valuation::{qi, Valuation, Q};

/// Which computation supplied the headline breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakMethod {
    Roots,
    Differential,
}

impl BreakMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BreakMethod::Roots => "roots",
            BreakMethod::Differential => "differential",
        }
    }
}

/// Breaks of `L/K` by both routes.
#[derive(Clone, Debug)]
pub struct BreakAnalysis {
    /// Classical filtration (absent when `L/K` is not Galois at the working
    /// precision).
    pub profile: Option<RamificationProfile>,
    pub differential_b: Option<Q>,
    pub differential_b_log: Option<Q>,
    /// Why the differential route produced nothing, if it did not.
    pub differential_error: Option<String>,
    pub b: Q,
    pub b_log: Q,
    pub method: BreakMethod,
    /// Both routes ran and give the same `b` and `b_log`.
    pub agreement: bool,
}

/// A single-generator presentation of `L/K`: the standard one when the
/// Eisenstein polynomial is normalised, the plain Eisenstein one otherwise.
pub fn presentation_of(l: &Field, trunc: u32) -> Result<ThickeningPresentation> {
    ThickeningPresentation::standard(l, trunc).or_else(|_| ThickeningPresentation::eisenstein(l, trunc))
}

/// Computes the classical and differential breaks of the top step of `l`.
pub fn analyse_breaks(l: &Field, trunc: u32, cfg: &SpectralConfig) -> Result<BreakAnalysis> {
    let profile = match lower_filtration(l) {
        Ok((_, prof)) => Some(prof),
        Err(Error::NotGalois) | Err(Error::DoesNotSplit) => None,
        Err(e) => return Err(e),
    };
    let differential = presentation_of(l, trunc).and_then(|pres| {
        let b = break_of_presentation(&pres, BreakMode::NonLog, cfg)?.value;
        let b_log = break_of_presentation(&pres, BreakMode::Log, cfg)?.value;
        Ok((b, b_log))
    });
    let (differential_b, differential_b_log, differential_error) = match differential {
        Ok((b, bl)) => (Some(b), Some(bl), None),
        Err(e @ (Error::NotConverged(_) | Error::NoThresholdInRange | Error::Unsupported(_))) => {
            (None, None, Some(alloc::format!("{}", e)))
        }
        Err(e) if profile.is_some() => (None, None, Some(alloc::format!("{}", e))),
        Err(e) => return Err(e),
    };
    let (b, b_log, method) = match (&profile, differential_b, differential_b_log) {
        (Some(p), _, _) => (p.b, p.b_log, BreakMethod::Roots),
        (None, Some(b), Some(bl)) => (b, bl, BreakMethod::Differential),
        _ => {
            return Err(Error::NotConverged(
                differential_error.unwrap_or_else(|| String::from("no route produced a break")),
            ))
        }
    };
    let agreement = profile.is_some() && differential_b == Some(b) && differential_b_log == Some(b_log);
    Ok(BreakAnalysis { profile, differential_b, differential_b_log, differential_error, b, b_log, method, agreement })
}

/// Disc decomposition of the `K_*` space at one log level.
#[derive(Clone, Debug)]
pub struct DiscLevel {
    pub a: Q,
    pub count: usize,
    /// Log-radii in `v_K` units.
    pub radii: Vec<Q>,
}

/// The `K_*/K` example for one prime.
#[derive(Clone, Debug)]
pub struct KstarReport {
    pub p: u64,
    /// `v_{K_*}(ϖ_γ − ϖ_γ')` over distinct root pairs.
    pub root_differences: Vec<Valuation>,
    pub profile: RamificationProfile,
    pub differential_b: Q,
    pub differential_b_log: Q,
    pub levels: Vec<DiscLevel>,
}

impl KstarReport {
    pub fn roots_ok(&self) -> bool {
        !self.root_differences.is_empty() && self.root_differences.iter().all(|v| *v == Valuation::int(2))
    }

    pub fn breaks_ok(&self) -> bool {
        self.profile.b_log == qi(1) && self.profile.b == qi(2) && self.differential_b_log == qi(1) && self.differential_b == qi(2)
    }

    /// Every level `a > 1` splits into `p` discs of log-radius `a − (p−2)/p`.
    pub fn discs_ok(&self) -> bool {
        let p = self.p as i64;
        self.levels.iter().all(|l| {
            let r = l.a - Q::new(p - 2, p);
            l.count == self.p as usize && l.radii.len() == l.count && l.radii.iter().all(|x| *x == r)
        })
    }

    pub fn ok(&self) -> bool {
        self.roots_ok() && self.breaks_ok() && self.discs_ok()
    }
}

/// Runs the `K_*` example at the given log levels.
pub fn kstar_report(l: &Field, levels: &[Q], trunc: u32, cfg: &SpectralConfig) -> Result<KstarReport> {
    let k = l.parent().ok_or_else(|| Error::InvalidSpec("K_* must be an extension".into()))?.clone();
    let h = kstar_relation(&k)?;
    let roots = root_difference_table(&h, l)?;
    let (_, profile) = lower_filtration(l)?;
    let pres = ThickeningPresentation::standard(l, trunc)?;
    let differential_b = break_of_presentation(&pres, BreakMode::NonLog, cfg)?.value;
    let differential_b_log = break_of_presentation(&pres, BreakMode::Log, cfg)?.value;
    let mut out = vec![];
    for a in levels {
        let c = count_components_single_relation(&h, l, *a, true)?;
        out.push(DiscLevel { a: *a, count: c.count, radii: c.radii });
    }
    Ok(KstarReport {
        p: l.p(),
        root_differences: roots.off_diagonal(),
        profile,
        differential_b,
        differential_b_log,
        levels: out,
    })
}
