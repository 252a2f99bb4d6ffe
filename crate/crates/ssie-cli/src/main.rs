//! `ssie`: small-sample inference bias models and dataset audits.
//!
//! Three subcommands cover the three layers: `simulate` runs the seeded
//! Monte Carlo estimate of generating probabilities, `model` evaluates the
//! analytic bias models, and `audit` measures subset underprediction on an
//! encoded dataset. Every run writes a manifest with input digests so it
//! can be reproduced byte for byte.

mod cmd_audit;
mod cmd_model;
mod cmd_simulate;
mod manifest;

use clap::{Args, Parser, Subcommand};
use ssie_core::{Error, ErrorCategory};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "ssie", version, about = "Small-sample inference bias: analytic models and dataset audits")]
struct Cli {
    /// Cap the worker pool for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate mean generating probabilities for each success count.
    Simulate(SimulateArgs),
    /// Analytic bias models: worked scenario, curves, threshold, aggregate.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Audit a dataset: subset splits, observed bias, predictors,
    /// correlations.
    Audit(AuditArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Sample size N drawn each iteration.
    #[arg(long)]
    n: u64,
    /// Simulation iterations.
    #[arg(long, default_value_t = 10_000)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the CSV table and manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
pub enum ModelCommand {
    /// The two-group single-PVC worked scenario.
    Pvc(PvcArgs),
    /// Underprediction curves over exponent or target-rate grids.
    Curves(CurvesArgs),
    /// Decision-threshold model: per-leaf-size predicted rate.
    Threshold(ThresholdArgs),
    /// Power-law-aggregated minority/majority bias ratio.
    Bias(BiasArgs),
}

#[derive(Args)]
pub struct PvcArgs {
    /// Total sample size.
    #[arg(long, default_value_t = 100)]
    n: u64,
    /// Minority share of the sample.
    #[arg(long)]
    r: f64,
    /// Target rate for both groups (shorthand for --s1 = --s2).
    #[arg(long, conflicts_with_all = ["s1", "s2"])]
    s: Option<f64>,
    /// Majority target rate.
    #[arg(long, required_unless_present = "s")]
    s1: Option<f64>,
    /// Minority target rate.
    #[arg(long, required_unless_present = "s")]
    s2: Option<f64>,
    /// Beta prior pseudo-counts.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct CurvesArgs {
    /// Exponent grid for the exponent sweep.
    #[arg(long, value_delimiter = ',')]
    exponents: Option<Vec<f64>>,
    /// Leaf target rate S for the exponent sweep.
    #[arg(long, default_value_t = 0.9)]
    s: f64,
    /// Target-rate grid; given, a second sweep over S is emitted.
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    /// Fixed exponent for the target-rate sweep.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    /// Fraction of each leaf the group holds.
    #[arg(long, default_value_t = 1.0)]
    group_fraction: f64,
    /// Largest leaf size in the power-law support.
    #[arg(long, default_value_t = 1000)]
    max_size: u64,
    /// Symmetric prior pseudo-count.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct ThresholdArgs {
    /// Per-row target probability.
    #[arg(long)]
    p: f64,
    /// Largest leaf size to tabulate.
    #[arg(long, default_value_t = 100)]
    max_size: u64,
    /// Tabulate odd leaf sizes only.
    #[arg(long)]
    odd_only: bool,
    /// Also print power-law group rates for these exponents.
    #[arg(long, value_delimiter = ',')]
    exponents: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct BiasArgs {
    /// Minority share R.
    #[arg(long)]
    r: f64,
    /// Majority target rate S1.
    #[arg(long)]
    s1: f64,
    /// Minority target rate S2.
    #[arg(long)]
    s2: f64,
    /// Power-law exponent of the leaf-size distribution.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    /// Largest leaf size in the support.
    #[arg(long, default_value_t = 1000)]
    max_size: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
pub struct AuditArgs {
    /// Dataset file (delimited text).
    #[arg(long)]
    data: PathBuf,
    /// Schema file (TOML).
    #[arg(long)]
    schema: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Evaluation protocol.
    #[arg(long, value_parser = ["cv", "train-on-all"], default_value = "cv")]
    protocol: String,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Re-train models within each subset side.
    #[arg(long)]
    per_subset_retrain: bool,
    /// Hide each split's feature from the trees measuring it.
    #[arg(long)]
    exclude_split_feature: bool,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    /// Also write the encoded binary matrix as CSV.
    #[arg(long)]
    dump_encoded: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = ssie_core::configure_threads(threads) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate::run(args),
        Command::Model(cmd) => cmd_model::run(cmd),
        Command::Audit(args) => cmd_audit::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Usage => EXIT_USAGE,
        ErrorCategory::Data => EXIT_DATA,
        ErrorCategory::Numerical => EXIT_NUMERICAL,
    }
}
