//! Command-line front end of `ramlab-core`: TOML field and family specs,
//! break reports, lemma verification and family audits, each emitted as a
//! self-describing document with a run manifest.

pub mod commands;
pub mod exit;
pub mod report;
pub mod spec;

pub use commands::{cmd_breaks, cmd_table, cmd_verify, Format, Options, Outcome};
pub use exit::{CliError, CliResult, ExitKind};
