//! The baseline design path: materialize the dense pairs-of-pairs covariance,
//! decompose it fully, and read the scheduling distribution off the spectrum.
//!
//! This is the correctness oracle for the reduced-basis path and is the only
//! place the M x M matrix is ever formed. Memory grows as N^4/4 doubles, so
//! construction refuses object counts above a cap unless the caller raises it
//! explicitly.

use nalgebra::{DMatrix, DVector};

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::pairs::n_pairs;
use crate::prior::{eigen_iteration_cap, PriorSpec};
use crate::schedule::SchedulingDistribution;

/// Default refusal threshold for dense construction (N=256 is ~4.3 GB).
pub const DEFAULT_DENSE_CAP: usize = 256;

/// The distribution of pairwise quality differences: mean differences `nu`
/// and the dense M x M covariance `delta`.
#[derive(Debug, Clone)]
pub struct DeltaModel {
    n_objects: usize,
    nu: DVector<f64>,
    delta: DMatrix<f64>,
}

impl DeltaModel {
    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    /// Mean differences mu_i - mu_j in canonical pair order. Carried for
    /// completeness; the design itself depends on the covariance only.
    pub fn nu(&self) -> &DVector<f64> {
        &self.nu
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }
}

/// Eigenvalues (nonincreasing, clamped at zero) with their orthonormal
/// eigenvectors as columns. Produced by the full decomposition here and by
/// the projected decomposition in the reduced-basis path.
#[derive(Debug, Clone)]
pub struct EigenpairSet {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    clamped: usize,
}

impl EigenpairSet {
    pub(crate) fn new(values: DVector<f64>, vectors: DMatrix<f64>, clamped: usize) -> Self {
        Self {
            values,
            vectors,
            clamped,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Number of (small negative) eigenvalues clamped to zero.
    pub fn clamped_count(&self) -> usize {
        self.clamped
    }
}

/// Symmetric eigendecomposition sorted nonincreasing with negative roundoff
/// eigenvalues clamped to zero.
pub(crate) fn sorted_clamped_eigen(matrix: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>, usize)> {
    let dim = matrix.nrows();
    let eigen =
        nalgebra::SymmetricEigen::try_new(matrix, f64::EPSILON, eigen_iteration_cap(dim))
            .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let mut values = DVector::zeros(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut clamped = 0;
    for (new, &old) in order.iter().enumerate() {
        let v = eigen.eigenvalues[old];
        values[new] = if v < 0.0 {
            clamped += 1;
            0.0
        } else {
            v
        };
        vectors.column_mut(new).copy_from(&eigen.eigenvectors.column(old));
    }
    Ok((values, vectors, clamped))
}

/// Materialize the pairwise-difference distribution under the default cap.
pub fn build_delta(spec: &PriorSpec) -> Result<DeltaModel> {
    build_delta_with_cap(spec, DEFAULT_DENSE_CAP)
}

/// Materialize the pairwise-difference distribution, refusing
/// `n_objects > cap`.
pub fn build_delta_with_cap(spec: &PriorSpec, cap: usize) -> Result<DeltaModel> {
    let n = spec.n_objects();
    if n > cap {
        return Err(Error::DenseCapExceeded {
            n_objects: n,
            cap,
        });
    }
    let e = DiffOperator::new(n)?;
    let pairs = e.pairs0();
    let m = pairs.len();
    let c = spec.covariance();
    let mu = spec.mean();

    let mut delta = DMatrix::zeros(m, m);
    for s in 0..m {
        let (k, l) = (pairs[s].0 as usize, pairs[s].1 as usize);
        for r in 0..=s {
            let (i, j) = (pairs[r].0 as usize, pairs[r].1 as usize);
            let v = c[(i, k)] - c[(i, l)] - c[(j, k)] + c[(j, l)];
            delta[(r, s)] = v;
            delta[(s, r)] = v;
        }
    }
    let nu = DVector::from_iterator(
        m,
        pairs.iter().map(|&(i, j)| mu[i as usize] - mu[j as usize]),
    );
    Ok(DeltaModel {
        n_objects: n,
        nu,
        delta,
    })
}

/// Complete eigendecomposition of the dense pairwise covariance.
pub fn full_spectrum(model: &DeltaModel) -> Result<EigenpairSet> {
    let (values, vectors, clamped) = sorted_clamped_eigen(model.delta.clone())?;
    Ok(EigenpairSet::new(values, vectors, clamped))
}

/// Spectra whose total variance falls below this floor are degenerate: the
/// eigenvalues are pure roundoff of a zero matrix (a constant prior leaves
/// every pairwise difference with zero variance).
pub(crate) fn degeneracy_floor(n_objects: usize, covariance: &DMatrix<f64>) -> f64 {
    f64::EPSILON * (n_objects as f64).powi(3) * covariance.amax()
}

/// Design probabilities from a spectrum: `q_r = sum_c (u_r^c)^2 psi_c / sum
/// psi`. Works for both the full spectrum and the reduced one.
pub fn schedule_from_spectrum(
    n_objects: usize,
    eigen: &EigenpairSet,
) -> Result<SchedulingDistribution> {
    schedule_from_spectrum_with_floor(n_objects, eigen, 0.0)
}

pub(crate) fn schedule_from_spectrum_with_floor(
    n_objects: usize,
    eigen: &EigenpairSet,
    floor: f64,
) -> Result<SchedulingDistribution> {
    let m = n_pairs(n_objects);
    if eigen.vectors.nrows() != m {
        return Err(Error::DimensionMismatch {
            context: "schedule from spectrum",
            expected: m,
            actual: eigen.vectors.nrows(),
        });
    }
    let total: f64 = eigen.values.iter().sum();
    if total <= floor {
        return Err(Error::DegeneratePrior);
    }
    let mut q = DVector::zeros(m);
    for (c, &value) in eigen.values.iter().enumerate() {
        if value == 0.0 {
            continue;
        }
        let weight = value / total;
        let column = eigen.vectors.column(c);
        for r in 0..m {
            let u = column[r];
            q[r] += weight * u * u;
        }
    }
    SchedulingDistribution::new(n_objects, q)
}

/// The standard method: build the dense pairwise covariance, decompose it,
/// and form the design probabilities.
pub fn exact_schedule(spec: &PriorSpec) -> Result<SchedulingDistribution> {
    exact_schedule_with_cap(spec, DEFAULT_DENSE_CAP)
}

pub fn exact_schedule_with_cap(spec: &PriorSpec, cap: usize) -> Result<SchedulingDistribution> {
    let model = build_delta_with_cap(spec, cap)?;
    let eigen = full_spectrum(&model)?;
    let floor = degeneracy_floor(spec.n_objects(), spec.covariance());
    schedule_from_spectrum_with_floor(spec.n_objects(), &eigen, floor)
}

/// Independent O(N^2) oracle for the same distribution.
///
/// Summing the weighted squared loadings over a complete eigenbasis
/// reconstructs the matrix diagonal, so the design probabilities collapse to
/// `q_r = (C_ii + C_jj - 2 C_ij) / trace(Delta)`. No decomposition, and no
/// shared code with the spectral path.
pub fn closed_form_schedule(spec: &PriorSpec) -> Result<SchedulingDistribution> {
    let n = spec.n_objects();
    let m = n_pairs(n);
    if m == 0 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 objects, got {n}"
        )));
    }
    let c = spec.covariance();
    let mut q = DVector::zeros(m);
    let mut r = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let variance = c[(i, i)] + c[(j, j)] - 2.0 * c[(i, j)];
            q[r] = variance.max(0.0);
            r += 1;
        }
    }
    let total = q.sum();
    if total <= degeneracy_floor(n, c) {
        return Err(Error::DegeneratePrior);
    }
    q /= total;
    SchedulingDistribution::new(n, q)
}
