//! `biopepa`: validate, simulate and check Bio-PEPA models, and analyse
//! them module by module.
//!
//! Exit codes: 0 success, 1 semantic error, 2 I/O error, 3 state cap
//! exceeded.

mod commands;
mod config;
mod error;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::HintName;

#[derive(Parser)]
#[command(name = "biopepa", version, about = "Bio-PEPA modelling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Model file, overriding the config.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory. Defaults to `$BIOPEPA_OUTPUT_ROOT/<config name>`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "BIOPEPA_OUTPUT_ROOT", hide_env_values = true)]
    pub output_root: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write this many individual runs.
    #[arg(long)]
    pub write_runs: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Query file.
    #[arg(long, short)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub state_cap: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Manifest of a `simulate` run to take maxima from.
    #[arg(long)]
    pub maxima_from: Option<PathBuf>,
    /// Parameter to sweep.
    #[arg(long, requires = "values")]
    pub sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    pub values: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    #[arg(long)]
    pub stubs: Option<PathBuf>,
    /// Modules to extract (comma-separated); all by default.
    #[arg(long, value_delimiter = ',')]
    pub modules: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Reference means CSV; the model is simulated when absent.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Species to fit (comma-separated `name@location`).
    #[arg(long, value_delimiter = ',')]
    pub species: Option<Vec<String>>,
    /// Module the stubs are for.
    #[arg(long)]
    pub module: Option<String>,
    #[arg(long, value_enum)]
    pub hint: Option<HintName>,
    #[arg(long)]
    pub quantile: Option<f64>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub candidate: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub species: Option<Vec<String>>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Exit 1 when the comparison fails the threshold.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model.
    Validate {
        /// Model file; taken from the config when omitted.
        path: Option<PathBuf>,
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Run a stochastic simulation ensemble.
    Simulate(SimulateArgs),
    /// Build the CTMC with levels and evaluate queries.
    Check(CheckArgs),
    /// Classify boundary species and extract modules.
    Decompose(DecomposeArgs),
    /// Fit environment stubs to a reference trace.
    FitEnv(FitArgs),
    /// Compare two mean traces.
    Compare(CompareArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, config } => commands::validate(path, config),
        Command::Simulate(a) => commands::simulate(a),
        Command::Check(a) => commands::check(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::FitEnv(a) => commands::fit_env(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
