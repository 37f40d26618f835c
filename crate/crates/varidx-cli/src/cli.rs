//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "varidx",
    version,
    about = "Variation indexes for positive multivariate data",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute variation indexes and classifications from a CSV dataset
    Analyze(AnalyzeArgs),
    /// Closed-form or Monte-Carlo indexes of built-in parametric families
    Family(FamilyArgs),
    /// Generate a dataset from a scenario JSON via the Gaussian copula
    Simulate(SimulateArgs),
    /// Repeated-simulation study of index estimates across sample sizes
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV of strictly positive values, one observation per row
    pub input: PathBuf,

    /// Treat the first row as column names
    #[arg(long)]
    pub has_header: bool,

    /// Confidence level of the asymptotic and bootstrap intervals
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Bootstrap replicate count; omit to skip resampling
    #[arg(long, value_name = "B")]
    pub bootstrap: Option<usize>,

    /// Seed of the bootstrap resampler
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Half-width of the equi-variation band around 1
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Significant digits of printed numbers
    #[arg(long, default_value_t = 6)]
    pub precision: u32,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Family name: exponential, mo, arnold-ng, teimouri-gupta, mst,
    /// weibull-margin, or tweedie-bounds
    pub name: String,

    /// Family parameters as inline JSON, or @path to a JSON file
    #[arg(long)]
    pub params: String,

    /// Evaluation mean vector (comma-separated), required for mst
    #[arg(long)]
    pub mean: Option<String>,

    /// Monte-Carlo sample size (arnold-ng)
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,

    /// Monte-Carlo seed (arnold-ng)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Half-width of the equi-variation band around 1
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Significant digits of printed numbers
    #[arg(long, default_value_t = 6)]
    pub precision: u32,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON path
    pub scenario: PathBuf,

    /// Output CSV path; a <output>.meta.json sidecar is written next to it
    #[arg(long)]
    pub output: PathBuf,

    /// Override the seed stored in the scenario
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Scenario JSON path
    pub scenario: PathBuf,

    /// Ascending sample sizes, comma-separated
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,

    /// Replicates per size
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,

    /// Base seed; each (size, replicate) cell derives its own stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Prefix of the two output CSVs (_summary.csv, _replicates.csv)
    #[arg(long)]
    pub output_prefix: String,

    /// Significant digits of printed numbers
    #[arg(long, default_value_t = 6)]
    pub precision: u32,
}
