//! The sparse pairwise-difference operator E.
//!
//! Row r of E holds e_i - e_j for the pair (i, j) at canonical linear index
//! r: +1 in column i and -1 in column j, giving N(N-1) stored nonzeros in
//! total and the factorization `Delta = E C E^T`. The operator is kept in
//! implicit form (the pair list); columns are derived analytically rather
//! than stored, which halves memory while serving both row products and the
//! column scans the greedy basis selection needs. The dense pairs-of-pairs
//! matrix is never materialized here.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::pairs::{index_to_pair, n_pairs, PairIndex};

#[derive(Debug, Clone)]
pub struct DiffOperator {
    n_objects: usize,
    /// 0-based (i, j) per row, in canonical order.
    pairs: Vec<(u32, u32)>,
}

impl DiffOperator {
    pub fn new(n_objects: usize) -> Result<Self> {
        if n_objects < 2 {
            return Err(Error::InvalidConfig(format!(
                "difference operator needs at least 2 objects, got {n_objects}"
            )));
        }
        if n_objects > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!(
                "{n_objects} objects exceeds the supported range"
            )));
        }
        let mut pairs = Vec::with_capacity(n_pairs(n_objects));
        for i in 0..n_objects {
            for j in (i + 1)..n_objects {
                pairs.push((i as u32, j as u32));
            }
        }
        Ok(Self { n_objects, pairs })
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    /// Number of rows M = N(N-1)/2.
    pub fn n_rows(&self) -> usize {
        self.pairs.len()
    }

    /// Stored nonzeros: N(N-1).
    pub fn nnz(&self) -> usize {
        self.n_objects * (self.n_objects - 1)
    }

    /// The pair at row r (1-based).
    pub fn pair_at(&self, r: usize) -> Result<PairIndex> {
        if r < 1 || r > self.pairs.len() {
            return Err(Error::LinearIndexOutOfRange {
                r,
                m: self.pairs.len(),
            });
        }
        let (i, j) = self.pairs[r - 1];
        Ok(PairIndex {
            i: i as usize + 1,
            j: j as usize + 1,
            r,
        })
    }

    /// 0-based pair list in canonical row order.
    pub(crate) fn pairs0(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Visit the nonzeros of column k (0-based) as (0-based row, value).
    ///
    /// Column k carries -1 in every row pairing some a < k with k, and +1 in
    /// the contiguous block of rows pairing k with each b > k. Rows are
    /// visited in increasing order.
    pub(crate) fn for_each_column_entry(&self, k0: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.n_objects;
        let m = self.pairs.len();
        for a in 0..k0 {
            let r0 = m - (n - a) * (n - a - 1) / 2 + (k0 - a - 1);
            f(r0, -1.0);
        }
        let start = m - (n - k0) * (n - k0 - 1) / 2;
        for off in 0..(n - k0 - 1) {
            f(start + off, 1.0);
        }
    }

    /// Write column k (0-based) into a dense buffer of length M. The buffer
    /// must be zeroed by the caller.
    pub(crate) fn scatter_column(&self, k0: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.pairs.len());
        self.for_each_column_entry(k0, |r0, v| out[r0] = v);
    }

    /// Column k (1-based) as a sparse list of (1-based row, value), with
    /// exactly N-1 nonzeros.
    pub fn column(&self, k: usize) -> Result<Vec<(usize, f64)>> {
        if k < 1 || k > self.n_objects {
            return Err(Error::ObjectOutOfRange {
                k,
                n: self.n_objects,
            });
        }
        let mut entries = Vec::with_capacity(self.n_objects - 1);
        self.for_each_column_entry(k - 1, |r0, v| entries.push((r0 + 1, v)));
        Ok(entries)
    }

    /// `E x`: vector of pairwise differences x_i - x_j, length M.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n_objects {
            return Err(Error::DimensionMismatch {
                context: "difference operator apply",
                expected: self.n_objects,
                actual: x.len(),
            });
        }
        let mut out = DVector::zeros(self.pairs.len());
        for (r0, &(i, j)) in self.pairs.iter().enumerate() {
            out[r0] = x[i as usize] - x[j as usize];
        }
        Ok(out)
    }

    /// `E^T y`, length N.
    pub fn transpose_apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch {
                context: "difference operator transpose apply",
                expected: self.pairs.len(),
                actual: y.len(),
            });
        }
        Ok(DVector::from_vec(self.transpose_apply_slice(y.as_slice())))
    }

    pub(crate) fn transpose_apply_slice(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_objects];
        for (r0, &(i, j)) in self.pairs.iter().enumerate() {
            let v = y[r0];
            out[i as usize] += v;
            out[j as usize] -= v;
        }
        out
    }

    /// Dense M x N form, for small-N tests and rank checks only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.pairs.len(), self.n_objects);
        for (r0, &(i, j)) in self.pairs.iter().enumerate() {
            dense[(r0, i as usize)] = 1.0;
            dense[(r0, j as usize)] = -1.0;
        }
        dense
    }
}

/// Entry (r, s) of `Delta = E C E^T` without forming it:
/// `C_ik - C_il - C_jk + C_jl` for pairs (i,j) = pair(r), (k,l) = pair(s).
pub fn delta_entry(covariance: &DMatrix<f64>, r: usize, s: usize) -> Result<f64> {
    let n = covariance.nrows();
    if covariance.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "delta entry",
            expected: n,
            actual: covariance.ncols(),
        });
    }
    let (i, j) = index_to_pair(r, n)?;
    let (k, l) = index_to_pair(s, n)?;
    let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
    Ok(covariance[(i, k)] - covariance[(i, l)] - covariance[(j, k)] + covariance[(j, l)])
}
