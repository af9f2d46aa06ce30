use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypegbms::data::LabelColumn;

#[derive(Debug, Parser)]
#[command(
    name = "hypegbms",
    version,
    about = "Gaussian blurring mean shift on the Poincaré ball"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster the rows of a CSV file.
    Cluster(ClusterArgs),
    /// Cluster over a grid of bandwidths and curvatures and score each cell.
    Sweep(SweepArgs),
    /// Run the built-in numerical checks.
    Validate(ValidateArgs),
    /// Write a synthetic two-level hierarchical dataset.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Hypegbms,
    Gbms,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hypegbms => "hypegbms",
            Algorithm::Gbms => "gbms",
        }
    }
}

/// Flags shared by `cluster` and `sweep`.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input CSV of numeric features.
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long, value_enum, default_value_t = Algorithm::Hypegbms)]
    pub algorithm: Algorithm,

    /// Average-movement tolerance.
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,

    /// Cluster separation threshold; defaults to a tenth of the median pairwise distance.
    #[arg(long)]
    pub delta: Option<f64>,

    /// Entropy-change tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub gamma: f64,

    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,

    /// Largest row norm after standardization.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Ground-truth label column, by header name or 0-based index.
    #[arg(long, value_name = "NAME_OR_INDEX")]
    pub label_column: Option<LabelColumn>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Write a JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Label CSV: one integer per input row.
    #[arg(long)]
    pub output: PathBuf,

    /// Kernel bandwidth.
    #[arg(long)]
    pub sigma: f64,

    /// Ball curvature, negative. Required for hypegbms.
    #[arg(long, allow_hyphen_values = true)]
    pub curvature: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Results CSV, one row per grid cell.
    #[arg(long)]
    pub output: PathBuf,

    /// Comma-separated bandwidths.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"
    )]
    pub sigmas: Vec<f64>,

    /// Comma-separated negative curvatures. Ignored for gbms.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-0.1,-0.2,-0.3,-0.4,-0.5,-0.6,-0.7,-0.8,-0.9,-1.0"
    )]
    pub curvatures: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run a single check.
    #[arg(long, value_name = "CHECK")]
    pub only: Option<String>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Destination CSV; the last column, `label`, holds leaf indices.
    #[arg(long)]
    pub output: PathBuf,

    #[arg(long, default_value_t = 2)]
    pub roots: usize,

    #[arg(long, default_value_t = 2)]
    pub children: usize,

    #[arg(long, default_value_t = 75)]
    pub points_per_leaf: usize,

    #[arg(long, default_value_t = 0.2)]
    pub leaf_spread: f64,

    #[arg(long, default_value_t = 10.0)]
    pub level_gap: f64,

    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}
