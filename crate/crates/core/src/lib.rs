//! Static experimental designs for Bradley-Terry comparative judgement
//! studies.
//!
//! A study over N objects draws pairwise comparisons from a *scheduling
//! distribution*: a probability distribution over all M = N(N-1)/2 unordered
//! pairs that concentrates on the pairs with the highest prior variance in
//! their quality difference. The standard construction ([`exact_schedule`])
//! materializes the dense M x M covariance of all pairwise differences and
//! decomposes it in full, which grows as N^4 in memory and is the accuracy
//! oracle here. The scalable construction ([`approx_schedule`]) runs a greedy
//! reduced-basis decomposition of the sparse difference operator and
//! decomposes a d x d projection instead, never forming the big matrix, with
//! eigenvalue error bounded by Cauchy interlacing and exact recovery at
//! d = N-1.
//!
//! The crate also ships the prior covariance generators used in simulation
//! studies ([`covgen`]), and a Bradley-Terry MAP/Laplace fitter ([`bt`]) so a
//! first phase of comparisons can feed its posterior covariance back in as
//! the prior for scheduling the next phase.

pub mod bt;
pub mod covgen;
pub mod diffop;
pub mod error;
pub mod exact;
pub mod pairs;
pub mod prior;
pub mod rbd;
pub mod schedule;
pub mod scheduler;

pub use bt::{
    log_posterior, log_posterior_gradient, map_fit, two_phase_schedule, ComparisonData,
    FitOptions, PairOutcome, PosteriorSummary,
};
pub use covgen::{
    correlation_normalize, erdos_renyi, expm_covariance, inverse_wishart_covariance,
    laplacian_covariance, toeplitz_covariance, AdjacencyMatrix,
};
pub use diffop::{delta_entry, DiffOperator};
pub use error::{Error, Result};
pub use exact::{
    build_delta, build_delta_with_cap, closed_form_schedule, exact_schedule,
    exact_schedule_with_cap, full_spectrum, schedule_from_spectrum, DeltaModel, EigenpairSet,
    DEFAULT_DENSE_CAP,
};
pub use pairs::{index_to_pair, n_pairs, pair_to_index, PairIndex};
pub use prior::{validate_prior, PriorSpec, ValidationReport};
pub use rbd::{approx_eigenpairs, project_covariance, rbd, BasisInit, RbdConfig, ReducedBasis};
pub use schedule::SchedulingDistribution;
pub use scheduler::{approx_schedule, approx_schedule_with_info, kl_divergence, sample_pairs, ApproxDesign};
