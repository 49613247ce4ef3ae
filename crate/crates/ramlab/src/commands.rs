//! The `breaks`, `verify` and `table` commands.

use std::path::{Path, PathBuf};

use ramlab_core::audit::analyse_breaks;
use ramlab_core::diffmod::SpectralConfig;
use ramlab_core::field::make_field;
use ramlab_core::ramification::{conductors, hasse_arf_audit_one, FixedProfile, RamificationProfile};
use ramlab_core::valuation::Q;
use ramlab_core::verify::{verify, Lemma, VerifyConfig, DEFAULT_SEED};
use rayon::prelude::*;
use serde::Serialize;

use crate::exit::{CliError, CliResult, ExitKind};
use crate::report::{emit, sha256_hex, InputHash, Report, RunConfig, RunManifest, SCHEMA};
use crate::spec::{read_toml, ExtensionSpec, FamilySpec, FieldSpec, Member};

/// Default truncation order of the differential route of `breaks`.
pub const BREAKS_TRUNCATION: u32 = 12;

/// Output format of `table`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Flags shared by every command.
#[derive(Clone, Debug)]
pub struct Options {
    pub precision: Option<u32>,
    pub truncation: Option<u32>,
    pub n_max: Option<usize>,
    pub snap_den: Option<i64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            precision: None,
            truncation: None,
            n_max: None,
            snap_den: None,
            seed: None,
            samples: None,
            out: None,
            format: Format::Json,
        }
    }
}

impl Options {
    fn spectral(&self) -> SpectralConfig {
        let mut cfg = SpectralConfig { n_max: self.n_max, ..SpectralConfig::default() };
        if let Some(d) = self.snap_den {
            cfg.snap_den = d;
        }
        cfg
    }

    fn run_config(&self, truncation: u32) -> RunConfig {
        RunConfig {
            precision: self.precision,
            truncation,
            n_max: self.n_max,
            snap_den: self.spectral().snap_den,
            samples: self.samples,
            format: self.format.as_str().to_string(),
        }
    }
}

/// What a command produced: the document text and the exit status it
/// implies.
#[derive(Debug)]
pub struct Outcome {
    pub kind: ExitKind,
    /// One-line human summary for stderr.
    pub summary: String,
}

fn qs(x: Q) -> String {
    x.to_string()
}

#[derive(Debug, Serialize)]
pub struct LowerBreak {
    pub t: String,
    pub order: usize,
}

#[derive(Debug, Serialize)]
pub struct BreaksResult {
    pub label: String,
    pub field: String,
    pub degree: usize,
    pub lower_breaks: Vec<LowerBreak>,
    pub upper_breaks: Vec<String>,
    pub b: String,
    pub b_log: String,
    pub method: &'static str,
    pub agreement: bool,
    pub differential_b: Option<String>,
    pub differential_b_log: Option<String>,
    pub differential_error: Option<String>,
}

fn lower_breaks(p: &RamificationProfile) -> Vec<LowerBreak> {
    p.lower_breaks.iter().map(|(t, o)| LowerBreak { t: qs(*t), order: *o }).collect()
}

/// Breaks of the extension described by `ext` over the field `field`.
pub fn cmd_breaks(field: &Path, ext: &Path, opts: &Options) -> CliResult<Outcome> {
    let (fbytes, fspec): (_, FieldSpec) = read_toml(field)?;
    let (ebytes, espec): (_, ExtensionSpec) = read_toml(ext)?;
    let desc = fspec.description(opts.precision)?.with_step(espec.step()?);
    let l = make_field(&desc)?;
    let trunc = opts.truncation.unwrap_or(BREAKS_TRUNCATION);
    let a = analyse_breaks(&l, trunc, &opts.spectral())?;
    let label = espec.label.clone().unwrap_or_else(|| l.describe());
    let result = BreaksResult {
        label: label.clone(),
        field: l.describe(),
        degree: l.e(),
        lower_breaks: a.profile.as_ref().map(lower_breaks).unwrap_or_default(),
        upper_breaks: a.profile.as_ref().map(|p| p.upper_breaks.iter().map(|u| qs(*u)).collect()).unwrap_or_default(),
        b: qs(a.b),
        b_log: qs(a.b_log),
        method: a.method.as_str(),
        agreement: a.agreement,
        differential_b: a.differential_b.map(qs),
        differential_b_log: a.differential_b_log.map(qs),
        differential_error: a.differential_error.clone(),
    };
    let manifest = RunManifest::new(
        "breaks",
        vec![InputHash::new(field, &fbytes), InputHash::new(ext, &ebytes)],
        None,
        opts.run_config(trunc),
    );
    emit(opts.out.as_ref(), &Report::new(manifest, result).to_json()?)?;
    // both routes ran but disagree: a verification failure
    let disagree = a.profile.is_some() && a.differential_b.is_some() && !a.agreement;
    Ok(Outcome {
        kind: if disagree { ExitKind::VerificationFailure } else { ExitKind::Success },
        summary: format!("{}: b = {}, b_log = {} ({}), agreement = {}", label, a.b, a.b_log, a.method.as_str(), a.agreement),
    })
}

#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub label: String,
    pub ok: bool,
    pub margin: Option<String>,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyResult {
    pub lemma: String,
    pub samples: usize,
    pub failures: usize,
    pub vacuous: usize,
    pub min_margin: Option<String>,
    pub passed: bool,
    pub rows: Vec<SampleRow>,
}

/// Runs one lemma driver.
pub fn cmd_verify(lemma: &str, opts: &Options) -> CliResult<Outcome> {
    let lemma: Lemma = lemma.parse()?;
    let base = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: opts.seed.unwrap_or(DEFAULT_SEED),
        samples: opts.samples,
        precision: opts.precision.unwrap_or(base.precision),
        truncation: opts.truncation.unwrap_or(base.truncation),
        spectral: opts.spectral(),
    };
    let rep = verify(lemma, &cfg)?;
    let result = VerifyResult {
        lemma: lemma.id().to_string(),
        samples: rep.samples.len(),
        failures: rep.failures(),
        vacuous: rep.vacuous,
        min_margin: rep.min_margin().map(qs),
        passed: rep.passed(),
        rows: rep
            .samples
            .iter()
            .map(|s| SampleRow { label: s.label.clone(), ok: s.ok, margin: s.margin.map(qs), detail: s.detail.clone() })
            .collect(),
    };
    let mut run = opts.run_config(cfg.truncation);
    run.precision = Some(cfg.precision);
    let manifest = RunManifest::new(format!("verify {}", lemma), Vec::new(), Some(cfg.seed), run);
    emit(opts.out.as_ref(), &Report::new(manifest, &result).to_json()?)?;
    Ok(Outcome {
        kind: if result.passed { ExitKind::Success } else { ExitKind::VerificationFailure },
        summary: format!("{}: {} samples, {} failures", lemma, result.samples, result.failures),
    })
}

/// One row of a family audit: an extension × a nontrivial representation.
#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub label: String,
    pub field_spec_hash: String,
    pub representation: String,
    /// Number of characters sharing this conductor profile.
    pub count: usize,
    pub dim: Option<usize>,
    pub breaks_lower: String,
    pub breaks_upper: String,
    pub b: String,
    pub b_log: String,
    pub art: String,
    pub swan: String,
    /// Art and Swan are integers.
    pub integral: bool,
    /// Every wild subquotient of the filtration is elementary `p`-abelian.
    pub subquotients_ok: bool,
    /// `ok`, or the failure marker of an extension that could not be audited.
    pub status: String,
}

#[derive(Debug, Default, Serialize)]
pub struct TableSummary {
    pub extensions: usize,
    pub rows: usize,
    pub integral: usize,
    pub failures: usize,
    pub errors: usize,
}

impl TableSummary {
    pub fn line(&self) -> String {
        format!(
            "summary: {} extensions, {} rows, {} integral, {} failures, {} errors",
            self.extensions, self.rows, self.integral, self.failures, self.errors
        )
    }
}

#[derive(Debug, Serialize)]
pub struct TableResult<'a> {
    pub rows: &'a [TableRow],
    pub summary: &'a TableSummary,
    pub summary_line: String,
}

/// Sidecar document of a CSV table: the manifest and the summary.
#[derive(Debug, Serialize)]
pub struct TableSidecar<'a> {
    pub schema: &'static str,
    pub manifest: &'a RunManifest,
    pub summary: &'a TableSummary,
    pub summary_line: String,
}

fn join(xs: impl Iterator<Item = String>) -> String {
    xs.collect::<Vec<_>>().join(";")
}

fn audit_member(m: &Member) -> (Vec<TableRow>, Option<ExitKind>) {
    let hash = sha256_hex(format!("{:?}", m.description).as_bytes());
    let rows = make_field(&m.description).and_then(|l| {
        let row = hasse_arf_audit_one(&m.label, &l)?;
        let prof = &row.profile;
        let sub_ok = row.subquotients.iter().filter(|s| s.upper > Q::from_integer(0)).all(|s| s.abelian && s.killed_by_p);
        let mut chars: Vec<_> = row.characters.iter().filter(|(c, _)| c.label != "trivial").cloned().collect();
        if chars.is_empty() {
            // no character table (non-abelian group): report the regular
            // representation's structure through the trivial row
            let trivial = FixedProfile { label: "trivial".into(), dim: 1, fixed: vec![1; prof.upper_breaks.len()] };
            chars.push((conductors(prof, &trivial)?, 1));
        }
        Ok(chars
            .into_iter()
            .map(|(c, count)| TableRow {
                label: m.label.clone(),
                field_spec_hash: hash.clone(),
                representation: c.label.clone(),
                count,
                dim: Some(c.dim),
                breaks_lower: join(prof.lower_breaks.iter().map(|(t, _)| qs(*t))),
                breaks_upper: join(prof.upper_breaks.iter().map(|u| qs(*u))),
                b: qs(prof.b),
                b_log: qs(prof.b_log),
                art: qs(c.art),
                swan: qs(c.swan),
                integral: c.art_integral && c.swan_integral,
                subquotients_ok: sub_ok,
                status: "ok".into(),
            })
            .collect())
    });
    match rows {
        Ok(r) => (r, None),
        Err(e) => {
            let row = TableRow {
                label: m.label.clone(),
                field_spec_hash: hash,
                representation: String::new(),
                count: 0,
                dim: None,
                breaks_lower: String::new(),
                breaks_upper: String::new(),
                b: String::new(),
                b_log: String::new(),
                art: String::new(),
                swan: String::new(),
                integral: false,
                subquotients_ok: false,
                status: format!("error: {}", e),
            };
            (vec![row], Some(ExitKind::of(&e)))
        }
    }
}

fn csv_text(rows: &[TableRow]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record([
        "label",
        "field_spec_hash",
        "representation",
        "count",
        "dim",
        "breaks_lower",
        "breaks_upper",
        "b",
        "b_log",
        "art",
        "swan",
        "integral",
        "subquotients_ok",
        "status",
    ])
    .map_err(|e| CliError::verification(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::verification(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::verification(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::verification(e.to_string()))
}

/// Sidecar path of a CSV table.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Audits a family: one row per extension × nontrivial representation.
pub fn cmd_table(family: &Path, opts: &Options) -> CliResult<Outcome> {
    let (bytes, spec): (_, FamilySpec) = read_toml(family)?;
    let members = spec.members(opts.precision)?;
    // rows are computed in parallel and assembled in family order
    let audited: Vec<(Vec<TableRow>, Option<ExitKind>)> = members.par_iter().map(audit_member).collect();
    let mut rows = Vec::new();
    let mut first_error = None;
    let mut summary = TableSummary { extensions: members.len(), ..TableSummary::default() };
    for (r, err) in audited {
        if let Some(k) = err {
            summary.errors += 1;
            first_error.get_or_insert(k);
        }
        rows.extend(r);
    }
    summary.rows = rows.len();
    summary.integral = rows.iter().filter(|r| r.integral).count();
    summary.failures = rows.iter().filter(|r| r.status == "ok" && !(r.integral && r.subquotients_ok)).count();
    let manifest =
        RunManifest::new("table", vec![InputHash::new(family, &bytes)], None, opts.run_config(opts.truncation.unwrap_or(0)));
    match opts.format {
        Format::Json => {
            let result = TableResult { rows: &rows, summary: &summary, summary_line: summary.line() };
            emit(opts.out.as_ref(), &Report::new(manifest, result).to_json()?)?;
        }
        Format::Csv => {
            emit(opts.out.as_ref(), &csv_text(&rows)?)?;
            if let Some(out) = &opts.out {
                let side = TableSidecar { schema: SCHEMA, manifest: &manifest, summary: &summary, summary_line: summary.line() };
                let mut text = serde_json::to_string_pretty(&side).map_err(|e| CliError::verification(e.to_string()))?;
                text.push('\n');
                emit(Some(&sidecar_path(out)), &text)?;
            }
        }
    }
    let kind = match first_error {
        Some(k) => k,
        None if summary.failures > 0 => ExitKind::VerificationFailure,
        None => ExitKind::Success,
    };
    Ok(Outcome { kind, summary: summary.line() })
}
