//! `caperc`: command-line front end for edge-color-avoiding percolation.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use caperc_core::Error;

#[derive(Debug, Parser)]
#[command(name = "caperc", version, about = "Color-avoiding percolation on colored random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Debug, Clone, Args)]
pub struct Shared {
    /// Layer intensities, comma separated, any order.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambdas: Option<String>,
    /// Number of vertices.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (or directory for `simulate`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Defaults to csv for `convergence`, json elsewhere.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub max_cycle_len: Option<usize>,
    /// Worker threads for trial parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key = value` experiment config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit constants and regime for the given intensities.
    Constants {
        /// Mark probability for a rho/a query.
        #[arg(long, requires = "lambda")]
        q: Option<f64>,
        /// Intensity for a rho/a query.
        #[arg(long, requires = "q")]
        lambda: Option<f64>,
    },
    /// Monte Carlo trials: JSON-lines records and a summary.
    Simulate {
        /// Comma separated: ca, census, components, black_clusters.
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        q_black: Option<f64>,
        #[arg(long)]
        lambda_single: Option<f64>,
        /// Raise the n * trials guard.
        #[arg(long)]
        work_limit: Option<u128>,
    },
    /// Repeated edges, short cycles and separation counts.
    Census {
        /// Fixed input instead of random graphs, e.g. `fig1:3+close`.
        #[arg(long)]
        fixture: Option<String>,
        /// Read the graph from a file.
        #[arg(long, conflicts_with = "fixture")]
        graph: Option<PathBuf>,
    },
    /// Normalized statistics of the largest cluster across several n.
    Convergence {
        /// Ascending list of n.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        /// Single-layer intensity; measures the largest component instead.
        #[arg(long)]
        lambda_single: Option<f64>,
        #[arg(long)]
        work_limit: Option<u128>,
    },
    /// Oracle equivalence and invariant suites.
    Verify {
        /// Comma separated subset of: ca, fig1, separation, fixedpoint.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        /// Corrupt one oracle case; the run must then fail.
        #[arg(long)]
        self_test_negative: bool,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1.
    Verification(String),
    /// Exit 2.
    Usage(String),
    /// Exit 3.
    Domain(String),
    /// Exit 4.
    Resource(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Domain(_) | Failure::Io(_) => 3,
            Failure::Resource(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m)
            | Failure::Usage(m)
            | Failure::Domain(m)
            | Failure::Resource(m)
            | Failure::Io(m) => m,
        }
    }

    /// Domain failure tagged with the flag that caused it.
    pub fn flag(flag: &str, e: Error) -> Failure {
        let mut f = Failure::from(e);
        let text = format!("--{flag}: {}", f.message());
        match &mut f {
            Failure::Verification(m)
            | Failure::Usage(m)
            | Failure::Domain(m)
            | Failure::Resource(m)
            | Failure::Io(m) => *m = text,
        }
        f
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceGuard(..) => Failure::Resource(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
