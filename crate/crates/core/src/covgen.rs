//! Prior covariance generators: graph-Laplacian, Toeplitz, inverse-Wishart,
//! and normalized matrix-exponential structures.
//!
//! All randomness is driven by an explicit seed through a fixed generator
//! (ChaCha8), so every draw is reproducible.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::prior::eigen_iteration_cap;

/// Default autoregressive decay for the Toeplitz structure.
pub const DEFAULT_TOEPLITZ_RHO: f64 = 0.5;

/// Smallest inverse-Wishart degrees of freedom with a finite mean.
pub fn default_invwishart_dof(n_objects: usize) -> f64 {
    (n_objects + 2) as f64
}

/// Symmetric binary adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: DMatrix<f64>,
}

impl AdjacencyMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::InvalidAdjacency(format!(
                "matrix is {}x{}, expected square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..n {
            if entries[(i, i)] != 0.0 {
                return Err(Error::InvalidAdjacency(format!(
                    "nonzero diagonal at ({},{})",
                    i + 1,
                    i + 1
                )));
            }
            for j in (i + 1)..n {
                let a = entries[(i, j)];
                let b = entries[(j, i)];
                if a != b {
                    return Err(Error::InvalidAdjacency(format!(
                        "asymmetric entries at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
                if a != 0.0 && a != 1.0 {
                    return Err(Error::InvalidAdjacency(format!(
                        "entry ({},{}) is {}, expected 0 or 1",
                        i + 1,
                        j + 1,
                        a
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Node degrees (row sums).
    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_nodes(),
            self.entries.row_iter().map(|row| row.sum()),
        )
    }

    pub fn edge_count(&self) -> usize {
        (self.entries.sum() / 2.0).round() as usize
    }
}

/// Erdos-Renyi graph G(n, p): each unordered pair receives an edge
/// independently with probability p.
pub fn erdos_renyi(n_nodes: usize, p: f64, seed: u64) -> Result<AdjacencyMatrix> {
    if n_nodes < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 nodes, got {n_nodes}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n_nodes, n_nodes);
    for i in 0..n_nodes {
        for j in (i + 1)..n_nodes {
            if rng.random::<f64>() < p {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    AdjacencyMatrix::new(a)
}

/// Regularized graph-Laplacian covariance `(D - A + I)^{-1}`.
///
/// `D - A + I` is the Laplacian plus the identity, hence symmetric positive
/// definite for every adjacency matrix, so the inverse always exists.
pub fn laplacian_covariance(adjacency: &AdjacencyMatrix) -> DMatrix<f64> {
    let n = adjacency.n_nodes();
    let degrees = adjacency.degrees();
    let mut l = -adjacency.entries().clone();
    for i in 0..n {
        l[(i, i)] = degrees[i] + 1.0;
    }
    let inv = nalgebra::Cholesky::new(l)
        .expect("L + I is positive definite")
        .inverse();
    symmetrize(inv)
}

/// Toeplitz covariance `C_ij = rho^{|i-j|}`.
pub fn toeplitz_covariance(n_objects: usize, rho: f64) -> Result<DMatrix<f64>> {
    if n_objects < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 objects, got {n_objects}"
        )));
    }
    if !rho.is_finite() || rho <= 0.0 || rho >= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "Toeplitz decay must lie in (0, 1), got {rho}"
        )));
    }
    Ok(DMatrix::from_fn(n_objects, n_objects, |i, j| {
        rho.powi((i as i32 - j as i32).abs())
    }))
}

/// A draw from the inverse-Wishart distribution with identity scale.
///
/// Samples W ~ Wishart(I, dof) by the Bartlett construction: a lower
/// triangular factor with chi-distributed diagonal and standard-normal
/// subdiagonal, so W = A A^T and the draw is `W^{-1} = A^{-T} A^{-1}`.
pub fn inverse_wishart_covariance(n_objects: usize, dof: f64, seed: u64) -> Result<DMatrix<f64>> {
    if n_objects < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 objects, got {n_objects}"
        )));
    }
    if !dof.is_finite() || dof <= (n_objects + 1) as f64 {
        return Err(Error::InvalidDof { dof, n: n_objects });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_objects;
    let mut factor = DMatrix::zeros(n, n);
    for k in 0..n {
        let chi2 = ChiSquared::new(dof - k as f64)
            .expect("dof - k > 0 given dof > n + 1");
        factor[(k, k)] = chi2.sample(&mut rng).sqrt();
        for l in (k + 1)..n {
            factor[(l, k)] = StandardNormal.sample(&mut rng);
        }
    }
    let inv_factor = factor
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("Bartlett factor has positive diagonal");
    Ok(symmetrize(inv_factor.transpose() * inv_factor))
}

/// Rescale to unit diagonal: `C' = D^{-1/2} C D^{-1/2}` with D = diag(C).
pub fn correlation_normalize(covariance: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = covariance.nrows();
    if covariance.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "correlation normalization",
            expected: n,
            actual: covariance.ncols(),
        });
    }
    let mut scale = Vec::with_capacity(n);
    for i in 0..n {
        let d = covariance[(i, i)];
        if d.is_nan() || d <= 0.0 {
            return Err(Error::NonPositiveDiagonal { index: i + 1 });
        }
        scale.push(d.sqrt());
    }
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = covariance[(i, j)] / (scale[i] * scale[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Matrix exponential of a symmetric matrix via eigendecomposition
/// `Q exp(diag) Q^T`.
pub fn symmetric_expm(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let n = matrix.nrows();
    let eigen = nalgebra::SymmetricEigen::try_new(
        matrix.clone(),
        f64::EPSILON,
        eigen_iteration_cap(n),
    )
    .expect("symmetric eigendecomposition converges");
    let mut scaled = eigen.eigenvectors.clone();
    for (c, &v) in eigen.eigenvalues.iter().enumerate() {
        scaled.column_mut(c).scale_mut(v.exp());
    }
    symmetrize(scaled * eigen.eigenvectors.transpose())
}

/// Spatial prior `D^{-1/2} e^A D^{-1/2}` with D = diag(e^A).
///
/// Well-connected node pairs receive high prior covariance; the
/// normalization gives every object unit prior variance.
pub fn expm_covariance(adjacency: &AdjacencyMatrix) -> DMatrix<f64> {
    let lambda = symmetric_expm(adjacency.entries());
    correlation_normalize(&lambda).expect("exp(A) has positive diagonal")
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::validate_prior;
    use approx::assert_abs_diff_eq;

    fn passes_prior_validation(c: &DMatrix<f64>) -> bool {
        validate_prior(&DVector::zeros(c.nrows()), c).passed()
    }

    #[test]
    fn erdos_renyi_extremes() {
        let empty = erdos_renyi(4, 0.0, 1).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let complete = erdos_renyi(4, 1.0, 1).unwrap();
        assert_eq!(complete.edge_count(), 6);
        for i in 0..4 {
            assert_eq!(complete.entries()[(i, i)], 0.0);
        }
        assert!(erdos_renyi(4, 1.5, 1).is_err());
        assert!(erdos_renyi(1, 0.5, 1).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_within_binomial_bound() {
        // 4 standard deviations around 0.5 * C(64,2).
        let a = erdos_renyi(64, 0.5, 42).unwrap();
        let m: f64 = 64.0 * 63.0 / 2.0;
        let mean = 0.5 * m;
        let sd = (m * 0.25).sqrt();
        let count = a.edge_count() as f64;
        assert!(
            (count - mean).abs() <= 4.0 * sd,
            "edge count {count} outside 4 sd of {mean}"
        );
    }

    #[test]
    fn erdos_renyi_is_reproducible() {
        let a = erdos_renyi(16, 0.3, 7).unwrap();
        let b = erdos_renyi(16, 0.3, 7).unwrap();
        assert_eq!(a, b);
        let c = erdos_renyi(16, 0.3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn laplacian_of_two_node_complete_graph() {
        let a = erdos_renyi(2, 1.0, 0).unwrap();
        let c = laplacian_covariance(&a);
        // (D - A + I) = [[2,-1],[-1,2]], inverse (1/3)[[2,1],[1,2]]
        assert_abs_diff_eq!(c[(0, 0)], 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[(0, 1)], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[(1, 1)], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn laplacian_of_empty_graph_is_identity() {
        let a = erdos_renyi(3, 0.0, 0).unwrap();
        let c = laplacian_covariance(&a);
        assert_abs_diff_eq!(c, DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn laplacian_inverse_check_and_validation() {
        let a = erdos_renyi(12, 0.4, 3).unwrap();
        let c = laplacian_covariance(&a);
        assert!(passes_prior_validation(&c));
        let n = a.n_nodes();
        let degrees = a.degrees();
        let mut l = -a.entries().clone();
        for i in 0..n {
            l[(i, i)] = degrees[i] + 1.0;
        }
        let product = &c * &l;
        let err = (&product - DMatrix::identity(n, n)).abs().max();
        assert!(err < 1e-10, "inverse check failed: {err}");
    }

    #[test]
    fn toeplitz_matches_formula() {
        let c = toeplitz_covariance(3, 0.5).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0],
        );
        assert_eq!(c, expected);
        assert!(toeplitz_covariance(3, 1.0).is_err());
        assert!(toeplitz_covariance(3, 0.0).is_err());
    }

    #[test]
    fn toeplitz_is_positive_definite() {
        let c = toeplitz_covariance(8, 0.5).unwrap();
        assert!(passes_prior_validation(&c));
        let eigen = c.symmetric_eigen();
        assert!(eigen.eigenvalues.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn inverse_wishart_is_spd_and_reproducible() {
        let c = inverse_wishart_covariance(6, 9.0, 11).unwrap();
        assert!(passes_prior_validation(&c));
        assert!(nalgebra::Cholesky::new(c.clone()).is_some());
        let again = inverse_wishart_covariance(6, 9.0, 11).unwrap();
        assert_eq!(c, again);
        assert!(inverse_wishart_covariance(4, 5.0, 0).is_err());
    }

    #[test]
    fn inverse_wishart_monte_carlo_mean() {
        // Mean of IW(I, dof) is I / (dof - n - 1) = I / 5 for n=4, dof=10.
        let n = 4;
        let dof = 10.0;
        let draws = 10_000;
        let mut acc = DMatrix::zeros(n, n);
        for seed in 0..draws {
            acc += inverse_wishart_covariance(n, dof, seed).unwrap();
        }
        acc /= draws as f64;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 0.2 } else { 0.0 };
                assert!(
                    (acc[(i, j)] - expected).abs() < 0.01,
                    "entry ({i},{j}) = {} vs {expected}",
                    acc[(i, j)]
                );
            }
        }
    }

    #[test]
    fn correlation_normalize_examples() {
        let c = DMatrix::from_row_slice(2, 2, &[4.0, 3.0, 3.0, 9.0]);
        let normalized = correlation_normalize(&c).unwrap();
        assert_abs_diff_eq!(normalized[(0, 1)], 0.5, epsilon = 1e-15);
        assert_eq!(normalized[(0, 0)], 1.0);
        assert_eq!(normalized[(1, 1)], 1.0);

        let id = DMatrix::identity(3, 3);
        assert_eq!(correlation_normalize(&id).unwrap(), id);

        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(correlation_normalize(&bad).is_err());
    }

    #[test]
    fn expm_of_empty_graph_is_identity() {
        let a = erdos_renyi(3, 0.0, 0).unwrap();
        let c = expm_covariance(&a);
        assert_abs_diff_eq!(c, DMatrix::identity(3, 3), epsilon = 1e-12);
    }

    #[test]
    fn expm_two_node_closed_form() {
        // e^A for the 2-node complete graph is [[cosh 1, sinh 1],[sinh 1, cosh 1]];
        // normalized off-diagonal is tanh(1).
        let a = erdos_renyi(2, 1.0, 0).unwrap();
        let c = expm_covariance(&a);
        assert_abs_diff_eq!(c[(0, 1)], 1f64.tanh(), epsilon = 1e-12);
        assert_eq!(c[(0, 0)], 1.0);
    }

    #[test]
    fn expm_inverse_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let n = 5;
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let sym = (&raw + raw.transpose()) * 0.5;
            let forward = symmetric_expm(&sym);
            let backward = symmetric_expm(&(-&sym));
            let err = (forward * backward - DMatrix::identity(n, n)).abs().max();
            assert!(err < 1e-10, "exp(A) exp(-A) deviates from I by {err}");
        }
    }

    #[test]
    fn expm_output_is_valid_prior() {
        let a = erdos_renyi(10, 0.4, 9).unwrap();
        let c = expm_covariance(&a);
        assert!(passes_prior_validation(&c));
        for i in 0..10 {
            assert!((c[(i, i)] - 1.0).abs() < 1e-14);
        }
    }
}
