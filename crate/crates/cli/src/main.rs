//! `symest` command-line front end.
//!
//! Exit codes: 0 ok, 1 parse or I/O error, 2 validation error, 3 rejected
//! trace, 4 not chain-decomposable, 5 property failures found by `verify`.

mod commands;
mod formats;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("not chain-decomposable: {0}")]
    NotChainDecomposable(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::NotChainDecomposable(_) => 4,
        }
    }
}

impl From<symest::Error> for CliError {
    fn from(e: symest::Error) -> Self {
        match e {
            symest::Error::Abstraction(symest::abstraction::AbstractionError::Syntax { .. })
            | symest::Error::Abstraction(symest::abstraction::AbstractionError::UnknownIdentifier { .. }) => {
                CliError::Parse(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub const EXIT_REJECTED: u8 = 3;
pub const EXIT_PROPERTY_FAILURE: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "symest", version, about = "Set-valued state estimation on symbolic state machines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimated (and predicted) state sets along a trace.
    Estimate(EstimateArgs),
    /// Build a consistent decomposition of the alphabet.
    Decompose(DecomposeArgs),
    /// Run the decentralized scheme next to the monolithic estimator.
    Distributed(DistributedArgs),
    /// Run the property suites on seeded random machines.
    Verify(VerifyArgs),
    /// Generate a seeded random machine.
    Random(RandomArgs),
    /// Grid abstraction of a one- or two-dimensional vector field.
    Abstract(AbstractArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub machine: PathBuf,
    pub trace: PathBuf,
    /// Only the last L symbols are used at every step.
    #[arg(long, value_name = "L")]
    pub window: Option<usize>,
    /// Also print the predicted set.
    #[arg(long)]
    pub predict: bool,
    /// One JSON record per step.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Chain,
    Quotient,
    Iso,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub machine: PathBuf,
    /// Number of aggregation maps.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Chain)]
    pub strategy: Strategy,
    /// Input alphabet for `iso`; symbols are named `input/output`.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<String>,
    /// Output alphabet for `iso`.
    #[arg(long, value_delimiter = ',')]
    pub outputs: Vec<String>,
    /// Write the decomposition here; the report then goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistributedArgs {
    pub machine: PathBuf,
    pub decomposition: PathBuf,
    pub trace: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Overapprox,
    T1,
    T2,
    Monotone,
    Oracle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    SkipIntersection,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    /// Overridden by the SYMEST_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct RandomArgs {
    #[arg(long)]
    pub states: usize,
    #[arg(long)]
    pub symbols: usize,
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Overridden by the SYMEST_SEED environment variable.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub chain_decomposable: bool,
    #[arg(long)]
    pub non_injective: bool,
    #[arg(long)]
    pub non_blocking: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit Graphviz text instead of JSON.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Args)]
pub struct AbstractArgs {
    /// Components separated by `;`, e.g. "x2; -x1".
    #[arg(long, allow_hyphen_values = true)]
    pub field: String,
    /// `lo,hi` per dimension, in order.
    #[arg(long = "box", value_name = "LO,HI", allow_hyphen_values = true, required = true)]
    pub bounds: Vec<String>,
    /// Cells per dimension; a single value applies to every dimension.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cells: Vec<usize>,
    /// Sampling time.
    #[arg(long)]
    pub ts: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = match commands::run(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "symest: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
