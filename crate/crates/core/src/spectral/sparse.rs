use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real symmetric matrix stored as its upper triangle.
///
/// Entries are kept sorted and unique; a full symmetric CSR copy backs `matvec`.
#[derive(Clone, Debug)]
pub struct SparseSymMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from `(row, col, value)` triplets. Lower-triangle triplets are
    /// mirrored into the upper triangle and repeated positions are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
            }
            *acc.entry((r.min(c), r.max(c))).or_insert(0.0) += v;
        }
        let entries = acc.into_iter().map(|((r, c), v)| (r, c, v)).collect();
        Ok(Self::from_sorted_upper(dim, entries))
    }

    fn from_sorted_upper(dim: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(r, c, _) in &entries {
            counts[r + 1] += 1;
            if r != c {
                counts[c + 1] += 1;
            }
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let nnz = row_ptr[dim];
        let mut col_idx = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        let mut fill = counts;
        for &(r, c, v) in &entries {
            col_idx[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
            if r != c {
                col_idx[fill[c]] = r;
                vals[fill[c]] = v;
                fill[c] += 1;
            }
        }
        Self { dim, entries, row_ptr, col_idx, vals }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_sorted_upper(dim, (0..dim).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle entries, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Stored (upper-triangle) entry count.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (r, c) = (r.min(c), r.max(c));
        self.entries
            .binary_search_by(|&(er, ec, _)| (er, ec).cmp(&(r, c)))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                out[r] = v;
            }
        }
        out
    }

    /// Iterates the full symmetric row `r` as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.col_idx[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| if r == c { v * x[r] * x[r] } else { 2.0 * v * x[r] * x[c] })
            .sum()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Self::from_triplets(
            self.dim,
            self.entries
                .iter()
                .map(|&(r, c, v)| (r, c, alpha * v))
                .chain(other.entries.iter().map(|&(r, c, v)| (r, c, beta * v))),
        )
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_sorted_upper(
            self.dim,
            self.entries.iter().map(|&(r, c, v)| (r, c, alpha * v)).collect(),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }

    /// Largest absolute entry difference against `other`, and the largest
    /// absolute entry of either matrix (for relative comparisons).
    pub fn max_abs_diff(&self, other: &Self) -> Result<(f64, f64)> {
        let diff = self.combine(1.0, other, -1.0)?;
        let d = diff.entries.iter().map(|e| e.2.abs()).fold(0.0, f64::max);
        let s = self
            .entries
            .iter()
            .chain(&other.entries)
            .map(|e| e.2.abs())
            .fold(0.0, f64::max);
        Ok((d, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrors_and_sums_duplicates() {
        let a = SparseSymMatrix::from_triplets(3, [(1, 0, 2.0), (0, 1, 1.0), (2, 2, 4.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0, 4.0]);
        assert_eq!(a.quadratic_form(&[1.0, 1.0, 1.0]), 10.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(SparseSymMatrix::from_triplets(2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn combine_and_dense_agree() {
        let a = SparseSymMatrix::from_triplets(2, [(0, 0, 2.0), (0, 1, -1.0), (1, 1, 2.0)]).unwrap();
        let i = SparseSymMatrix::identity(2);
        let b = a.combine(0.5, &i, 1.0).unwrap();
        let dense = b.to_dense();
        assert_eq!(dense[(0, 0)], 2.0);
        assert_eq!(dense[(1, 0)], -0.5);
        assert_eq!(b.diagonal(), vec![2.0, 2.0]);
    }
}
