//! Scheduling distributions over unordered object pairs.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::pairs::{n_pairs, pair_to_index, PairIndex};

/// Tolerance on `|sum(q) - 1|` at construction.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// A probability distribution over all M = N(N-1)/2 unordered pairs, stored
/// in canonical linear-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulingDistribution {
    n_objects: usize,
    probs: DVector<f64>,
}

impl SchedulingDistribution {
    pub fn new(n_objects: usize, probs: DVector<f64>) -> Result<Self> {
        let m = n_pairs(n_objects);
        if probs.len() != m {
            return Err(Error::DimensionMismatch {
                context: "scheduling distribution",
                expected: m,
                actual: probs.len(),
            });
        }
        if let Some(r0) = probs.iter().position(|&q| q.is_nan() || q < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability at linear index {} is {}",
                r0 + 1,
                probs[r0]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1 within {SUM_TOLERANCE:.0e}"
            )));
        }
        Ok(Self { n_objects, probs })
    }

    /// The uniform design q_r = 2 / (N(N-1)).
    pub fn uniform(n_objects: usize) -> Result<Self> {
        let m = n_pairs(n_objects);
        if m == 0 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 objects, got {n_objects}"
            )));
        }
        Self::new(n_objects, DVector::from_element(m, 1.0 / m as f64))
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_pairs(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &DVector<f64> {
        &self.probs
    }

    /// Probability of the pair at linear index r (1-based).
    pub fn prob(&self, r: usize) -> Result<f64> {
        if r < 1 || r > self.probs.len() {
            return Err(Error::LinearIndexOutOfRange {
                r,
                m: self.probs.len(),
            });
        }
        Ok(self.probs[r - 1])
    }

    /// Probability of the pair (i, j), 1-based with i < j.
    pub fn prob_of_pair(&self, i: usize, j: usize) -> Result<f64> {
        let r = pair_to_index(i, j, self.n_objects)?;
        Ok(self.probs[r - 1])
    }

    /// Pairs in canonical order with their probabilities.
    pub fn iter(&self) -> impl Iterator<Item = (PairIndex, f64)> + '_ {
        let n = self.n_objects;
        (1..=n).flat_map(move |i| ((i + 1)..=n).map(move |j| (i, j))).enumerate().map(
            move |(r0, (i, j))| {
                (
                    PairIndex { i, j, r: r0 + 1 },
                    self.probs[r0],
                )
            },
        )
    }

    /// Largest absolute probability difference against another distribution.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n_objects != other.n_objects {
            return Err(Error::DimensionMismatch {
                context: "distribution comparison",
                expected: self.n_objects,
                actual: other.n_objects,
            });
        }
        Ok(self
            .probs
            .iter()
            .zip(other.probs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
