//! Prior specification over object qualities and its validation.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on `||C - C^T||_inf / ||C||_inf`.
pub const SYMMETRY_RTOL: f64 = 1e-10;
/// Eigenvalues are accepted down to `-PSD_RTOL * ||C||_2`.
pub const PSD_RTOL: f64 = 1e-8;

/// Multivariate normal prior on the N object qualities.
///
/// Construction validates the covariance (symmetry, numerical positive
/// semidefiniteness, matching dimensions); instances are immutable afterwards.
/// The scheduling design depends on the covariance only; the mean is carried
/// for completeness.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl PriorSpec {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let report = validate_prior(&mean, &covariance);
        if !report.passed() {
            return Err(Error::InvalidPrior(report));
        }
        Ok(Self { mean, covariance })
    }

    /// Zero-mean prior with the given covariance.
    pub fn from_covariance(covariance: DMatrix<f64>) -> Result<Self> {
        let mean = DVector::zeros(covariance.nrows());
        Self::new(mean, covariance)
    }

    /// Zero-mean isotropic prior `sd^2 * I`.
    pub fn isotropic(n_objects: usize, sd: f64) -> Result<Self> {
        if n_objects < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 objects, got {n_objects}"
            )));
        }
        if !sd.is_finite() || sd <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "prior standard deviation must be positive, got {sd}"
            )));
        }
        Self::new(
            DVector::zeros(n_objects),
            DMatrix::identity(n_objects, n_objects) * (sd * sd),
        )
    }

    pub fn n_objects(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Outcome of checking a (mean, covariance) pair against the prior invariants.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub mean_len: usize,
    pub covariance_rows: usize,
    pub covariance_cols: usize,
    /// `max_ij |C_ij - C_ji|`, absolute.
    pub symmetry_violation: f64,
    /// `||C||_inf` used to scale the symmetry check.
    pub infinity_norm: f64,
    /// Most negative eigenvalue of the symmetrized covariance.
    pub min_eigenvalue: f64,
    /// Acceptance floor `-PSD_RTOL * ||C||_2`.
    pub psd_floor: f64,
}

impl ValidationReport {
    pub fn dimensions_ok(&self) -> bool {
        self.covariance_rows == self.covariance_cols && self.mean_len == self.covariance_rows
    }

    pub fn symmetric(&self) -> bool {
        self.symmetry_violation <= SYMMETRY_RTOL * self.infinity_norm
    }

    pub fn psd(&self) -> bool {
        self.min_eigenvalue >= self.psd_floor
    }

    pub fn passed(&self) -> bool {
        self.dimensions_ok() && self.symmetric() && self.psd()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.dimensions_ok() {
            return write!(
                f,
                "dimension mismatch: mean length {} vs covariance {}x{}",
                self.mean_len, self.covariance_rows, self.covariance_cols
            );
        }
        write!(
            f,
            "symmetry violation {:.3e} (tol {:.1e} * ||C||_inf = {:.3e}); \
             min eigenvalue {:.3e} (floor {:.3e})",
            self.symmetry_violation,
            SYMMETRY_RTOL,
            SYMMETRY_RTOL * self.infinity_norm,
            self.min_eigenvalue,
            self.psd_floor,
        )
    }
}

/// Check prior invariants without constructing a [`PriorSpec`].
///
/// Reports the worst symmetry violation, the most negative eigenvalue, and
/// dimension mismatches; callers decide what to do with failures.
pub fn validate_prior(mean: &DVector<f64>, covariance: &DMatrix<f64>) -> ValidationReport {
    let rows = covariance.nrows();
    let cols = covariance.ncols();
    let mut report = ValidationReport {
        mean_len: mean.len(),
        covariance_rows: rows,
        covariance_cols: cols,
        symmetry_violation: f64::INFINITY,
        infinity_norm: 0.0,
        min_eigenvalue: f64::NEG_INFINITY,
        psd_floor: 0.0,
    };
    if rows != cols {
        return report;
    }

    let mut sym_viol = 0.0f64;
    let mut inf_norm = 0.0f64;
    for i in 0..rows {
        let mut row_sum = 0.0;
        for j in 0..cols {
            row_sum += covariance[(i, j)].abs();
            if j > i {
                sym_viol = sym_viol.max((covariance[(i, j)] - covariance[(j, i)]).abs());
            }
        }
        inf_norm = inf_norm.max(row_sum);
    }
    report.symmetry_violation = sym_viol;
    report.infinity_norm = inf_norm;

    if rows == 0 {
        report.min_eigenvalue = 0.0;
        return report;
    }
    let sym = (covariance + covariance.transpose()) * 0.5;
    match nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, eigen_iteration_cap(rows)) {
        Some(eigen) => {
            let mut min_ev = f64::INFINITY;
            let mut max_abs = 0.0f64;
            for &v in eigen.eigenvalues.iter() {
                min_ev = min_ev.min(v);
                max_abs = max_abs.max(v.abs());
            }
            report.min_eigenvalue = min_ev;
            report.psd_floor = -PSD_RTOL * max_abs;
        }
        None => {
            // leave min_eigenvalue at -inf so the report fails the PSD check
        }
    }
    report
}

/// Iteration budget for the symmetric QL sweep; generous relative to the
/// usual 2-3 iterations per eigenvalue.
pub(crate) fn eigen_iteration_cap(dim: usize) -> usize {
    64 * dim + 1024
}
