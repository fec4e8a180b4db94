//! Shared fixtures for the criterion benches.

use btsched_core::covgen::{erdos_renyi, laplacian_covariance};
use btsched_core::PriorSpec;

/// Seeded graph-Laplacian prior, the structure the timing comparisons use.
pub fn laplacian_prior(n_objects: usize, edge_probability: f64, seed: u64) -> PriorSpec {
    let graph = erdos_renyi(n_objects, edge_probability, seed).expect("valid graph parameters");
    PriorSpec::from_covariance(laplacian_covariance(&graph)).expect("Laplacian prior is valid")
}
