//! The approximate design pipeline, distribution comparison, and pair
//! sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::exact::{degeneracy_floor, schedule_from_spectrum_with_floor};
use crate::pairs::PairIndex;
use crate::prior::PriorSpec;
use crate::rbd::{approx_eigenpairs, project_covariance, rbd, RbdConfig};
use crate::schedule::SchedulingDistribution;

/// Approximate design together with diagnostics from the reduced-basis run.
#[derive(Debug, Clone)]
pub struct ApproxDesign {
    pub schedule: SchedulingDistribution,
    pub rbd_dim: usize,
    pub final_residual: f64,
    pub tolerance_warning: bool,
}

/// Construct the approximate scheduling distribution directly from the prior
/// covariance: difference operator, greedy basis, projected decomposition,
/// design probabilities. The M x M pairwise covariance is never formed.
pub fn approx_schedule(spec: &PriorSpec, cfg: &RbdConfig) -> Result<SchedulingDistribution> {
    Ok(approx_schedule_with_info(spec, cfg)?.schedule)
}

/// As [`approx_schedule`], returning the basis dimension, final residual,
/// and tolerance-warning flag alongside the distribution.
pub fn approx_schedule_with_info(spec: &PriorSpec, cfg: &RbdConfig) -> Result<ApproxDesign> {
    let e = DiffOperator::new(spec.n_objects())?;
    let basis = rbd(&e, cfg)?;
    let projected = project_covariance(&basis, spec.covariance())?;
    let eigen = approx_eigenpairs(&basis, &projected)?;
    let floor = degeneracy_floor(spec.n_objects(), spec.covariance());
    let schedule = schedule_from_spectrum_with_floor(spec.n_objects(), &eigen, floor)?;
    Ok(ApproxDesign {
        schedule,
        rbd_dim: basis.dim(),
        final_residual: basis.final_residual(),
        tolerance_warning: basis.tolerance_warning(),
    })
}

/// Kullback-Leibler divergence `sum_r S_r log(S_r / S~_r)`.
///
/// Terms with `S_r = 0` contribute zero. A support mismatch (`S_r > 0` where
/// `S~_r = 0`) returns positive infinity, which is a meaningful comparison
/// outcome rather than an error. Sub-roundoff negative sums round to zero.
pub fn kl_divergence(
    p: &SchedulingDistribution,
    q: &SchedulingDistribution,
) -> Result<f64> {
    if p.n_objects() != q.n_objects() {
        return Err(Error::DimensionMismatch {
            context: "KL divergence",
            expected: p.n_objects(),
            actual: q.n_objects(),
        });
    }
    let mut total = 0.0f64;
    for (&a, &b) in p.probs().iter().zip(q.probs().iter()) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * (a / b).ln();
        }
    }
    Ok(total.max(0.0))
}

/// Draw `count` independent pairs from the distribution.
///
/// Inverse-CDF sampling over the canonical pair order with one uniform draw
/// per comparison; reproducible for a fixed seed.
pub fn sample_pairs(
    schedule: &SchedulingDistribution,
    count: usize,
    seed: u64,
) -> Vec<PairIndex> {
    let m = schedule.n_pairs();
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0f64;
    for &q in schedule.probs().iter() {
        acc += q;
        cumulative.push(acc);
    }
    let total = acc;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u = rng.random::<f64>() * total;
        let r0 = cumulative.partition_point(|&c| c <= u).min(m - 1);
        out.push(
            PairIndex::from_linear(r0 + 1, schedule.n_objects())
                .expect("cumulative index within range"),
        );
    }
    out
}
