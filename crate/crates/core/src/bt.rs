//! Bradley-Terry likelihood, MAP fitting under a multivariate normal prior,
//! and the Laplace posterior covariance used to schedule a second phase of
//! comparisons.
//!
//! A comparison between objects i and j is a Bernoulli/Binomial outcome with
//! `logit p_ij = lambda_i - lambda_j`. The posterior mode is found by damped
//! Newton iterations (the negative log posterior is strictly convex when the
//! prior covariance is positive definite, so the mode is unique), and the
//! posterior covariance is approximated by the inverse Hessian at the mode.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::prior::PriorSpec;
use crate::rbd::RbdConfig;
use crate::schedule::SchedulingDistribution;
use crate::scheduler::approx_schedule;

const MAX_STEP_HALVINGS: usize = 30;

/// Aggregated outcome for one unordered pair: `wins` successes for the
/// lower-indexed object out of `total` comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOutcome {
    pub i: usize,
    pub j: usize,
    pub wins: u64,
    pub total: u64,
}

/// Pairwise comparison counts aggregated per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonData {
    n_objects: usize,
    records: Vec<PairOutcome>,
}

impl ComparisonData {
    pub fn empty(n_objects: usize) -> Result<Self> {
        if n_objects < 2 {
            return Err(Error::InvalidComparisons(format!(
                "need at least 2 objects, got {n_objects}"
            )));
        }
        Ok(Self {
            n_objects,
            records: Vec::new(),
        })
    }

    /// Build from `(i, j, wins_for_i, comparisons)` rows. Rows may appear in
    /// either orientation and repeatedly; they are flipped to i < j and
    /// aggregated, since the likelihood depends only on per-pair counts.
    pub fn from_counts(
        n_objects: usize,
        rows: impl IntoIterator<Item = (usize, usize, u64, u64)>,
    ) -> Result<Self> {
        let mut data = Self::empty(n_objects)?;
        let mut counts = std::collections::BTreeMap::new();
        for (i, j, wins, total) in rows {
            if i < 1 || j < 1 || i > n_objects || j > n_objects || i == j {
                return Err(Error::InvalidComparisons(format!(
                    "invalid pair ({i}, {j}) for {n_objects} objects"
                )));
            }
            if wins > total {
                return Err(Error::InvalidComparisons(format!(
                    "pair ({i}, {j}): wins {wins} exceed total {total}"
                )));
            }
            let (key, wins) = if i < j {
                ((i, j), wins)
            } else {
                ((j, i), total - wins)
            };
            let entry = counts.entry(key).or_insert((0u64, 0u64));
            entry.0 += wins;
            entry.1 += total;
        }
        data.records = counts
            .into_iter()
            .filter(|&(_, (_, total))| total > 0)
            .map(|((i, j), (wins, total))| PairOutcome { i, j, wins, total })
            .collect();
        Ok(data)
    }

    /// Build from raw `(i, j, winner)` rows, one comparison each.
    pub fn from_winners(
        n_objects: usize,
        rows: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut counted = Vec::new();
        for (i, j, winner) in rows {
            if winner != i && winner != j {
                return Err(Error::InvalidComparisons(format!(
                    "winner {winner} is neither {i} nor {j}"
                )));
            }
            counted.push((i, j, u64::from(winner == i), 1u64));
        }
        Self::from_counts(n_objects, counted)
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn records(&self) -> &[PairOutcome] {
        &self.records
    }

    pub fn total_comparisons(&self) -> u64 {
        self.records.iter().map(|r| r.total).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// MAP estimate with its Laplace covariance.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    map_estimate: DVector<f64>,
    covariance: DMatrix<f64>,
    converged: bool,
    iterations: usize,
}

impl PosteriorSummary {
    pub fn map_estimate(&self) -> &DVector<f64> {
        &self.map_estimate
    }

    /// Inverse Hessian of the negative log posterior at the mode; symmetric
    /// positive definite because the Hessian includes the prior precision.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Solver settings for [`map_fit`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Convergence threshold on the gradient infinity norm.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

fn check_dims(lambda: &DVector<f64>, data: &ComparisonData, prior: &PriorSpec) -> Result<()> {
    if lambda.len() != prior.n_objects() {
        return Err(Error::DimensionMismatch {
            context: "quality vector",
            expected: prior.n_objects(),
            actual: lambda.len(),
        });
    }
    if data.n_objects() != prior.n_objects() {
        return Err(Error::DimensionMismatch {
            context: "comparison data",
            expected: prior.n_objects(),
            actual: data.n_objects(),
        });
    }
    Ok(())
}

fn prior_cholesky(prior: &PriorSpec) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(prior.covariance().clone()).ok_or(Error::SingularPrior)
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_posterior_impl(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior: &PriorSpec,
    chol: &Cholesky<f64, nalgebra::Dyn>,
) -> f64 {
    let mut ll = 0.0;
    for rec in data.records() {
        let x = lambda[rec.i - 1] - lambda[rec.j - 1];
        // log p = -softplus(-x), log(1-p) = -softplus(x)
        ll -= rec.wins as f64 * softplus(-x) + (rec.total - rec.wins) as f64 * softplus(x);
    }
    let dev = lambda - prior.mean();
    ll - 0.5 * dev.dot(&chol.solve(&dev))
}

/// Log posterior density up to an additive constant: the Binomial
/// log-likelihood (coefficients dropped) plus the Gaussian prior quadratic
/// term. Zero at `lambda = mean` with no data.
pub fn log_posterior(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior: &PriorSpec,
) -> Result<f64> {
    check_dims(lambda, data, prior)?;
    let chol = prior_cholesky(prior)?;
    Ok(log_posterior_impl(lambda, data, prior, &chol))
}

fn gradient_impl(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior: &PriorSpec,
    chol: &Cholesky<f64, nalgebra::Dyn>,
) -> DVector<f64> {
    let mut grad = DVector::zeros(lambda.len());
    for rec in data.records() {
        let x = lambda[rec.i - 1] - lambda[rec.j - 1];
        let pull = rec.wins as f64 - rec.total as f64 * sigmoid(x);
        grad[rec.i - 1] += pull;
        grad[rec.j - 1] -= pull;
    }
    grad -= chol.solve(&(lambda - prior.mean()));
    grad
}

/// Analytic gradient of [`log_posterior`].
pub fn log_posterior_gradient(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior: &PriorSpec,
) -> Result<DVector<f64>> {
    check_dims(lambda, data, prior)?;
    let chol = prior_cholesky(prior)?;
    Ok(gradient_impl(lambda, data, prior, &chol))
}

/// Hessian of the negative log posterior:
/// `C^{-1} + sum n_ij p_ij (1 - p_ij) (e_i - e_j)(e_i - e_j)^T`.
fn negative_hessian(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior_precision: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut h = prior_precision.clone();
    for rec in data.records() {
        let x = lambda[rec.i - 1] - lambda[rec.j - 1];
        let p = sigmoid(x);
        let w = rec.total as f64 * p * (1.0 - p);
        let (a, b) = (rec.i - 1, rec.j - 1);
        h[(a, a)] += w;
        h[(b, b)] += w;
        h[(a, b)] -= w;
        h[(b, a)] -= w;
    }
    h
}

/// Analytic Hessian of the negative log posterior, exposed for
/// finite-difference checks.
pub fn negative_log_posterior_hessian(
    lambda: &DVector<f64>,
    data: &ComparisonData,
    prior: &PriorSpec,
) -> Result<DMatrix<f64>> {
    check_dims(lambda, data, prior)?;
    let chol = prior_cholesky(prior)?;
    Ok(negative_hessian(lambda, data, &chol.inverse()))
}

fn laplace_covariance(hessian: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = Cholesky::new(hessian)
        .ok_or(Error::EigenFailure)?
        .inverse();
    let t = inv.transpose();
    Ok((inv + t) * 0.5)
}

/// Newton ascent with step halving to the posterior mode, returning the mode
/// and the Laplace covariance.
pub fn map_fit(
    data: &ComparisonData,
    prior: &PriorSpec,
    options: &FitOptions,
) -> Result<PosteriorSummary> {
    let chol = prior_cholesky(prior)?;
    check_dims(prior.mean(), data, prior)?;
    let precision = chol.inverse();

    let mut lambda = prior.mean().clone();
    let mut objective = log_posterior_impl(&lambda, data, prior, &chol);

    for iteration in 0..=options.max_iterations {
        let grad = gradient_impl(&lambda, data, prior, &chol);
        let grad_norm = grad.amax();
        if grad_norm <= options.gradient_tolerance {
            let covariance = laplace_covariance(negative_hessian(&lambda, data, &precision))?;
            return Ok(PosteriorSummary {
                map_estimate: lambda,
                covariance,
                converged: true,
                iterations: iteration,
            });
        }
        if iteration == options.max_iterations {
            break;
        }

        let hessian = negative_hessian(&lambda, data, &precision);
        let direction = Cholesky::new(hessian)
            .ok_or(Error::EigenFailure)?
            .solve(&grad);

        let mut step = 1.0;
        let mut accepted = false;
        // near the mode the true improvement sinks below roundoff of the
        // objective; accept within that slack so the last Newton step (which
        // still collapses the gradient) is not rejected
        let slack = 8.0 * f64::EPSILON * (1.0 + objective.abs());
        for _ in 0..=MAX_STEP_HALVINGS {
            let candidate = &lambda + &direction * step;
            let value = log_posterior_impl(&candidate, data, prior, &chol);
            if value.is_finite() && value > objective - slack {
                lambda = candidate;
                objective = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            let covariance =
                laplace_covariance(negative_hessian(&lambda, data, &precision))?;
            return Err(Error::FitDidNotConverge {
                iterations: iteration,
                gradient_norm: grad_norm,
                last: Box::new(PosteriorSummary {
                    map_estimate: lambda,
                    covariance,
                    converged: false,
                    iterations: iteration,
                }),
            });
        }
    }

    let gradient_norm = gradient_impl(&lambda, data, prior, &chol).amax();
    let covariance = laplace_covariance(negative_hessian(&lambda, data, &precision))?;
    Err(Error::FitDidNotConverge {
        iterations: options.max_iterations,
        gradient_norm,
        last: Box::new(PosteriorSummary {
            map_estimate: lambda,
            covariance,
            converged: false,
            iterations: options.max_iterations,
        }),
    })
}

/// Two-phase design: fit phase-1 comparisons, take the Laplace posterior
/// covariance as the prior covariance (zero mean), and schedule phase 2 with
/// the reduced-basis pipeline.
pub fn two_phase_schedule(
    phase1: &ComparisonData,
    prior: &PriorSpec,
    cfg: &RbdConfig,
) -> Result<SchedulingDistribution> {
    let fit = map_fit(phase1, prior, &FitOptions::default())?;
    let spec = PriorSpec::new(
        DVector::zeros(prior.n_objects()),
        fit.covariance().clone(),
    )?;
    approx_schedule(&spec, cfg)
}
