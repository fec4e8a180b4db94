//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::harness::Structure;

#[derive(Debug, Parser)]
#[command(
    name = "btsched",
    version,
    about = "Static scheduling designs for Bradley-Terry comparative judgement studies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a prior covariance matrix and write it as dense CSV
    GenCov(GenCovArgs),
    /// Construct a scheduling distribution from a covariance matrix
    Design(DesignArgs),
    /// Compare two schedule files (KL both ways, max probability gap)
    Compare(CompareArgs),
    /// Time exact vs reduced-basis construction over a grid and fit scaling slopes
    Benchmark(BenchmarkArgs),
    /// Draw comparison pairs from a schedule file
    Sample(SampleArgs),
    /// Fit the Bradley-Terry model and write the posterior summary
    BtFit(BtFitArgs),
    /// Fit phase-1 comparisons, then schedule phase 2 from the posterior covariance
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CovStructure {
    Laplacian,
    Toeplitz,
    Invwishart,
    Expm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DesignMethod {
    /// Dense pairwise covariance plus full eigendecomposition
    Exact,
    /// Greedy reduced-basis pipeline; never forms the dense matrix
    Rbd,
    /// Trace-normalized pair variances (algebraically identical to exact)
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
pub struct GenCovArgs {
    #[arg(long, value_enum)]
    pub structure: CovStructure,
    /// Number of objects
    #[arg(long)]
    pub n: usize,
    /// Edge probability for a simulated graph (laplacian/expm)
    #[arg(long)]
    pub p: Option<f64>,
    /// Toeplitz decay
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Inverse-Wishart degrees of freedom (default n + 2)
    #[arg(long)]
    pub dof: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rescale the result to unit diagonal
    #[arg(long)]
    pub normalize: bool,
    /// Adjacency matrix file (.mtx or .csv) instead of a simulated graph
    #[arg(long, conflicts_with = "p")]
    pub adjacency: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct DesignArgs {
    /// Covariance matrix file (.csv dense or .mtx)
    #[arg(long)]
    pub cov: PathBuf,
    #[arg(long, value_enum)]
    pub method: DesignMethod,
    /// Greedy stopping tolerance (rbd)
    #[arg(long, default_value_t = btsched_core::rbd::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Basis dimension cap (rbd, default N-1)
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Seed the first greedy column randomly (rbd; deterministic otherwise)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow dense construction above the built-in object cap
    #[arg(long)]
    pub force_dense: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ScheduleFormat::Json)]
    pub format: ScheduleFormat,
}

#[derive(Debug, Parser)]
pub struct CompareArgs {
    /// Baseline schedule file
    pub a: PathBuf,
    /// Schedule file compared against the baseline
    pub b: PathBuf,
}

#[derive(Debug, Parser)]
pub struct BenchmarkArgs {
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = vec![Structure::Laplacian, Structure::Toeplitz, Structure::Invwishart])]
    pub structures: Vec<Structure>,
    #[arg(long = "n-list", value_delimiter = ',', default_values_t = vec![8, 16, 32, 64])]
    pub n_list: Vec<usize>,
    #[arg(long = "p-list", value_delimiter = ',', default_values_t = vec![0.5])]
    pub p_list: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Never run the exact method above this object count
    #[arg(long = "skip-exact-above", default_value_t = 150)]
    pub skip_exact_above: usize,
    #[arg(long, default_value_t = btsched_core::rbd::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Output prefix; writes <out>.csv (rows) and <out>.json (summary)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct SampleArgs {
    #[arg(long)]
    pub schedule: PathBuf,
    /// Number of comparisons to draw
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct PriorArgs {
    /// Prior mean vector file (defaults to zero)
    #[arg(long = "prior-mean")]
    pub prior_mean: Option<PathBuf>,
    /// Prior covariance matrix file
    #[arg(long = "prior-cov", conflicts_with = "prior_sd")]
    pub prior_cov: Option<PathBuf>,
    /// Isotropic prior standard deviation (covariance sd^2 I)
    #[arg(long = "prior-sd")]
    pub prior_sd: Option<f64>,
}

#[derive(Debug, Parser)]
pub struct BtFitArgs {
    /// Comparison CSV with header i,j,y,n or i,j,winner
    #[arg(long)]
    pub comparisons: PathBuf,
    /// Number of objects (defaults to the largest index seen)
    #[arg(long = "n-objects")]
    pub n_objects: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long = "tol-fit", default_value_t = 1e-8)]
    pub tol_fit: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    /// Posterior summary output (JSON)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Parser)]
pub struct PipelineArgs {
    /// Phase-1 comparison CSV with header i,j,y,n or i,j,winner
    #[arg(long)]
    pub comparisons: PathBuf,
    #[arg(long = "n-objects")]
    pub n_objects: Option<usize>,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long = "tol-fit", default_value_t = 1e-8)]
    pub tol_fit: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
    /// Greedy stopping tolerance for the phase-2 design
    #[arg(long, default_value_t = btsched_core::rbd::DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long)]
    pub dmax: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "out-schedule")]
    pub out_schedule: PathBuf,
    #[arg(long, value_enum, default_value_t = ScheduleFormat::Json)]
    pub format: ScheduleFormat,
}
