//! Run manifests and report documents.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::exit::{CliError, CliResult};

/// Version tag of every emitted document.
pub const SCHEMA: &str = "ramlab-report/1";

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn new(path: &Path, bytes: &[u8]) -> InputHash {
        InputHash { path: path.display().to_string(), sha256: sha256_hex(bytes) }
    }
}

/// Knobs that influence a run's output.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub precision: Option<u32>,
    pub truncation: u32,
    pub n_max: Option<usize>,
    pub snap_den: i64,
    pub samples: Option<usize>,
    pub format: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub config: RunConfig,
    /// Seconds since the Unix epoch; `SOURCE_DATE_EPOCH` pins it.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, inputs: Vec<InputHash>, seed: Option<u64>, config: RunConfig) -> RunManifest {
        RunManifest { schema: SCHEMA, command: command.into(), inputs, seed, config, timestamp: timestamp() }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// A self-describing report: schema tag, manifest and payload.
#[derive(Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub manifest: RunManifest,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(manifest: RunManifest, result: T) -> Report<T> {
        Report { schema: SCHEMA, manifest, result }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::verification(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("{}: {}", p.display(), e))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|e| CliError::input(e.to_string()))
        }
    }
}
