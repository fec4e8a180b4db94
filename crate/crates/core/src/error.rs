use thiserror::Error;

use crate::bt::PosteriorSummary;
use crate::prior::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pair (i={i}, j={j}) for {n} objects: require 1 <= i < j <= n")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("linear pair index {r} out of range 1..={m}")]
    LinearIndexOutOfRange { r: usize, m: usize },

    #[error("object index {k} out of range 1..={n}")]
    ObjectOutOfRange { k: usize, n: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("prior validation failed: {0}")]
    InvalidPrior(ValidationReport),

    #[error(
        "dense pairwise covariance refused: n_objects={n_objects} exceeds the cap of {cap} \
         (N(N-1)/2 squared doubles; raise the cap explicitly to proceed)"
    )]
    DenseCapExceeded { n_objects: usize, cap: usize },

    #[error("degenerate prior: all pairwise difference variances are zero")]
    DegeneratePrior,

    #[error("inverse-Wishart requires dof > n_objects + 1 (got dof={dof}, n_objects={n})")]
    InvalidDof { dof: f64, n: usize },

    #[error("matrix diagonal must be strictly positive (entry {index})")]
    NonPositiveDiagonal { index: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,

    #[error("prior covariance is singular")]
    SingularPrior,

    #[error(
        "MAP fit did not converge after {iterations} iterations \
         (gradient infinity norm {gradient_norm:.3e})"
    )]
    FitDidNotConverge {
        iterations: usize,
        gradient_norm: f64,
        last: Box<PosteriorSummary>,
    },

    #[error("invalid scheduling distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid comparison data: {0}")]
    InvalidComparisons(String),

    #[error("invalid adjacency matrix: {0}")]
    InvalidAdjacency(String),
}
