use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "donlab",
    version,
    about = "DeepONet data, training, scaling experiments and q lower bounds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration for the subcommand; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for all outputs, including the effective-config echo.
    #[arg(long, global = true, default_value = "donlab-out")]
    pub out_dir: PathBuf,
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an ADR or pendulum dataset (CSV plus JSON sidecar).
    GenData(GenDataArgs),
    /// Train one DeepONet and write its checkpoint and loss curve.
    Train(TrainArgs),
    /// Run a scaling-law suite over a (q, n) plan.
    Experiment(ExperimentArgs),
    /// Evaluate the q lower bounds for a set of inputs.
    Bound(BoundArgs),
    /// Run the numerical verification checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of input functions.
    #[arg(long)]
    pub functions: Option<usize>,
    /// Query points per input function.
    #[arg(long)]
    pub points_per_function: Option<usize>,
    /// Standard deviation of additive label noise.
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Name of the dataset CSV inside the output directory.
    #[arg(long, default_value = "dataset.csv")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV written by `gen-data`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Epochs to train (in addition to those already in a resumed checkpoint).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Continue from this checkpoint instead of a fresh initialisation.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Print the (q, n, width) table without training.
    #[arg(long)]
    pub dry_run: bool,
    /// Override the number of epochs per cell.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    General,
    Sigmoid,
    Both,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Which bound to evaluate.
    #[arg(long, value_enum, default_value = "both")]
    pub theorem: Which,
    /// Override the training-set size.
    #[arg(long)]
    pub n: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Gradients,
    Perturbation,
    Cover,
    Hoeffding,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Checks to run; all of them when omitted.
    #[arg(value_enum)]
    pub checks: Vec<Check>,
    /// Corrupts the analytic gradients before comparison. Test hook.
    #[arg(long, hide = true)]
    pub inject_broken_gradient: bool,
}
