//! `tsph`: persistent homology of time series through simulated persistent
//! Dirac operators.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 data error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tsph_core::dirac::{ConstructionMode, PhaseRegister};
use tsph_core::ingest::Column;
use tsph_core::persistence::Readout;

#[derive(Debug, Parser)]
#[command(name = "tsph", version, about, args_override_self = true)]
struct Cli {
    /// Worker threads for Betti tables (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// File of key=value lines using the long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the delay-embedded point cloud as CSV.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        /// Destination CSV (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute Betti tables and the persistence diagram.
    Diagram {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_enum, default_value_t = Mode::QuantumSim)]
        mode: Mode,
        /// Diagram JSON (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// SVG scatter plot of the diagram.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Betti tables as JSON.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Compare simulated and classical tables; exit 1 on any difference.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Must be `both`; kept for symmetry with `diagram`.
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Discrepancy report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Test hook: add one to the simulated entry at `k,i,j`.
        #[arg(long, hide = true, value_name = "K,I,J")]
        inject_fault: Option<String>,
    },
    /// Report oracle call counts and cost estimates.
    Resources {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Run a single membership query for these vertices instead of the
        /// whole pipeline.
        #[arg(long, value_delimiter = ',', value_name = "V,...")]
        query: Option<Vec<usize>>,
        /// Scale of the single membership query.
        #[arg(long, requires = "query")]
        epsilon: Option<f64>,
        /// Report JSON (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    QuantumSim,
    Classical,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    /// One period of sin(2 pi t) at t = 0, 1/4, ..., 1.
    Periodic,
    /// Defaults for a short EEG segment; needs --input.
    Eeg,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV with one value per row or `t,value` rows.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column index or header name holding the samples (default: last).
    #[arg(long)]
    column: Option<Column>,
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    /// Embedding dimension d.
    #[arg(long)]
    dim: Option<usize>,
    /// Delay tau.
    #[arg(long)]
    tau: Option<usize>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// `start:stop:step` (inclusive) or a comma list.
    #[arg(long)]
    scales: Option<String>,
    /// Homology dimensions.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    dims: Vec<usize>,
    /// Mass parameter; any nonzero integer.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    xi: i64,
    #[arg(
        long,
        default_value = "restricted",
        value_parser = PossibleValuesParser::new(["restricted", "as-written"])
            .map(|s| s.parse::<ConstructionMode>().expect("listed value")),
    )]
    construction: ConstructionMode,
    #[arg(
        long,
        default_value = "multiplicity",
        value_parser = PossibleValuesParser::new(["multiplicity", "qpe"])
            .map(|s| s.parse::<Readout>().expect("listed value")),
    )]
    readout: Readout,
    #[arg(
        long,
        default_value = "signed",
        value_parser = PossibleValuesParser::new(["signed", "wrapped"])
            .map(|s| s.parse::<PhaseRegister>().expect("listed value")),
    )]
    phase_register: PhaseRegister,
    /// Absolute tolerance for counting eigenvalues equal to xi.
    #[arg(long, default_value_t = tsph_core::dirac::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Comparator accuracy used in cost estimates.
    #[arg(long, default_value_t = tsph_core::oracles::DEFAULT_ACCURACY)]
    delta: f64,
    /// Amplitude of seeded comparator noise (off by default).
    #[arg(long)]
    oracle_noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::expand_args(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(commands::EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(commands::EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(commands::EXIT_DATA);
        }
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
