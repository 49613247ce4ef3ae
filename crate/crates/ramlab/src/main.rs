use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ramlab::{cmd_breaks, cmd_table, cmd_verify, CliResult, Format, Options, Outcome};

#[derive(Parser)]
#[command(name = "ramlab", version, about = "Ramification breaks, conductors and differential radii of p-adic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Breaks of an extension (one Eisenstein step) over a base field.
    Breaks { field: PathBuf, extension: PathBuf },
    /// Runs a lemma verification driver.
    Verify { lemma: String },
    /// Conductor audit of a family of extensions.
    Table { family: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Flags {
    /// Precision in π-digits of the top field.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Truncation order of ψ values and covering modules.
    #[arg(long, global = true)]
    truncation: Option<u32>,
    /// Number of spectral iterates.
    #[arg(long, global = true)]
    nmax: Option<usize>,
    /// Denominator bound for snapped slopes.
    #[arg(long, global = true)]
    snap_den: Option<i64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: FormatArg,
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let f = cli.flags;
    let opts = Options {
        precision: f.precision,
        truncation: f.truncation,
        n_max: f.nmax,
        snap_den: f.snap_den,
        seed: f.seed,
        samples: f.samples,
        out: f.out,
        format: match f.format {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        },
    };
    match &cli.command {
        Command::Breaks { field, extension } => cmd_breaks(field, extension, &opts),
        Command::Verify { lemma } => cmd_verify(lemma, &opts),
        Command::Table { family } => cmd_table(family, &opts),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            eprintln!("{}", out.summary);
            ExitCode::from(out.kind.code())
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.kind.code())
        }
    }
}
