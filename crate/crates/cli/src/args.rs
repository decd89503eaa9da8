use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Change-point detection for sequences of networks.
#[derive(Debug, Parser)]
#[command(name = "netcp", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample adjacency sequences from a scenario file.
    Simulate(SimulateArgs),
    /// Run network binary segmentation on one or two sequences.
    Detect(DetectArgs),
    /// Refine preliminary change-point estimates.
    Refine(RefineArgs),
    /// Run a Monte Carlo sweep described by a config file.
    Sweep(SweepArgs),
    /// Check files against their schemas without running anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, short, env = "NETCP_OUT_DIR", default_value = "netcp-out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "NETCP_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Upper-triangle bitset per snapshot.
    Bitset,
    /// Sorted `(t, i, j)` edge list.
    Triples,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Number of independent sequences to draw.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub samples: u8,
    #[arg(long, value_enum, default_value_t = Format::Bitset)]
    pub format: Format,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// One sequence (split by time parity) or two independent ones.
    #[arg(long = "data", required = true, num_args = 1..=2)]
    pub data: Vec<PathBuf>,
    /// Seed for drawing the random intervals.
    #[arg(long, required_unless_present = "intervals")]
    pub seed: Option<u64>,
    /// Use the intervals in this table instead of drawing them.
    #[arg(long, conflicts_with_all = ["m", "length_cap"])]
    pub intervals: Option<PathBuf>,
    /// Number of random intervals.
    #[arg(long)]
    pub m: Option<usize>,
    /// Minimal spacing used to choose the interval count when `--m` is absent;
    /// defaults to a quarter of the working horizon.
    #[arg(long)]
    pub min_spacing: Option<usize>,
    #[arg(long)]
    pub length_cap: Option<usize>,
    /// Threshold constant in `c_tau rho_hat n log(T)^1.5`.
    #[arg(long, default_value_t = netcp::nbs::DEFAULT_C_TAU)]
    pub c_tau: f64,
    /// Fixed threshold, overriding the data-driven one.
    #[arg(long)]
    pub tau1: Option<f64>,
    /// Trimming fraction.
    #[arg(long, default_value_t = netcp::nbs::DEFAULT_DELTA)]
    pub delta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long = "data", required = true, num_args = 1..=2)]
    pub data: Vec<PathBuf>,
    /// Table with an `estimate` column, or one estimate per line.
    #[arg(long)]
    pub prelim: PathBuf,
    /// Constant multiplying `sqrt(n rho_hat)` in the spectral threshold.
    #[arg(long)]
    pub c: Option<f64>,
    /// Constant multiplying `log T` in the spectral threshold.
    #[arg(long, default_value_t = netcp::refine::DEFAULT_LOG_CONSTANT)]
    pub c_eps: f64,
    /// Fixed spectral threshold, overriding the formula.
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Base clip level; defaults to `rho_hat`.
    #[arg(long)]
    pub tau3: Option<f64>,
    /// Window fraction between neighbouring estimates.
    #[arg(long, default_value_t = netcp::refine::DEFAULT_REFINE_DELTA)]
    pub delta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the base seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reuse completed cells from an earlier run in the same directory.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario, sweep config, adjacency or manifest files.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}
