//! Canonical linear indexing of unordered object pairs.
//!
//! Pairs (i, j) with 1 <= i < j <= N are enumerated i-major:
//! (1,2), (1,3), ..., (1,N), (2,3), ..., (N-1,N). The linear index of (i, j) is
//!
//! ```text
//! r = N(N-1)/2 - (N-i+1)(N-i)/2 + j - i
//! ```
//!
//! running from 1 to M = N(N-1)/2. All public indices in this crate are
//! 1-based; zero-based bookkeeping is internal.

use crate::error::{Error, Result};

/// Number of unordered pairs M = N(N-1)/2.
pub fn n_pairs(n_objects: usize) -> usize {
    n_objects * n_objects.saturating_sub(1) / 2
}

/// An unordered object pair together with its canonical linear index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex {
    pub i: usize,
    pub j: usize,
    pub r: usize,
}

impl PairIndex {
    pub fn new(i: usize, j: usize, n_objects: usize) -> Result<Self> {
        let r = pair_to_index(i, j, n_objects)?;
        Ok(Self { i, j, r })
    }

    pub fn from_linear(r: usize, n_objects: usize) -> Result<Self> {
        let (i, j) = index_to_pair(r, n_objects)?;
        Ok(Self { i, j, r })
    }
}

/// Linear index of the pair (i, j), 1-based.
pub fn pair_to_index(i: usize, j: usize, n_objects: usize) -> Result<usize> {
    if i < 1 || j <= i || j > n_objects {
        return Err(Error::InvalidPair { i, j, n: n_objects });
    }
    let m = n_pairs(n_objects);
    let tail = (n_objects - i + 1) * (n_objects - i) / 2;
    Ok(m - tail + (j - i))
}

/// Pair (i, j) at linear index r; inverse of [`pair_to_index`].
pub fn index_to_pair(r: usize, n_objects: usize) -> Result<(usize, usize)> {
    let m = n_pairs(n_objects);
    if r < 1 || r > m {
        return Err(Error::LinearIndexOutOfRange { r, m });
    }
    let mut rem = r;
    for i in 1..n_objects {
        let block = n_objects - i;
        if rem <= block {
            return Ok((i, i + rem));
        }
        rem -= block;
    }
    unreachable!("r was validated against M");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_pair_has_index_one() {
        assert_eq!(pair_to_index(1, 2, 3).unwrap(), 1);
    }

    #[test]
    fn matches_enumeration_order() {
        // (2,3,N=3) -> 3 and (1,3,N=4) -> 2, checked against full enumeration.
        for n in [3usize, 4, 5, 9] {
            let mut r = 0usize;
            for i in 1..=n {
                for j in (i + 1)..=n {
                    r += 1;
                    assert_eq!(pair_to_index(i, j, n).unwrap(), r, "({i},{j}) in N={n}");
                    assert_eq!(index_to_pair(r, n).unwrap(), (i, j));
                }
            }
            assert_eq!(r, n_pairs(n));
        }
        assert_eq!(pair_to_index(2, 3, 3).unwrap(), 3);
        assert_eq!(pair_to_index(1, 3, 4).unwrap(), 2);
        assert_eq!(index_to_pair(3, 3).unwrap(), (2, 3));
        assert_eq!(index_to_pair(6, 4).unwrap(), (3, 4));
        assert_eq!(index_to_pair(1, 3).unwrap(), (1, 2));
    }

    #[test]
    fn bijective_up_to_64_objects() {
        for n in 2..=64usize {
            let m = n_pairs(n);
            let mut seen = vec![false; m + 1];
            for i in 1..=n {
                for j in (i + 1)..=n {
                    let r = pair_to_index(i, j, n).unwrap();
                    assert!(r >= 1 && r <= m);
                    assert!(!seen[r], "index {r} hit twice for N={n}");
                    seen[r] = true;
                    assert_eq!(index_to_pair(r, n).unwrap(), (i, j));
                }
            }
            assert!(seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn ordering_is_i_major_and_increasing_in_j() {
        let n = 12;
        let mut prev = 0;
        for i in 1..=n {
            for j in (i + 1)..=n {
                let r = pair_to_index(i, j, n).unwrap();
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn rejects_bad_pairs_and_indices() {
        assert!(pair_to_index(2, 2, 4).is_err());
        assert!(pair_to_index(3, 2, 4).is_err());
        assert!(pair_to_index(0, 1, 4).is_err());
        assert!(pair_to_index(1, 5, 4).is_err());
        assert!(index_to_pair(0, 4).is_err());
        assert!(index_to_pair(7, 4).is_err());
        assert!(PairIndex::new(1, 1, 3).is_err());
        assert_eq!(PairIndex::from_linear(2, 4).unwrap().j, 3);
    }
}
