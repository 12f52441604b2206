use nalgebra::{DMatrix, SymmetricEigen};

use super::SparseSymMatrix;
use crate::error::{Error, Result};

/// Largest dimension the dense routines accept by default.
pub const DEFAULT_DENSE_CAP: usize = 3000;

#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn dense_sym_eig(a: &SparseSymMatrix, cap: usize) -> Result<DenseSpectrum> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if n > cap {
        return Err(Error::DenseCapExceeded { dim: n, cap });
    }
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(DenseSpectrum { values, vectors })
}

#[derive(Clone, Debug)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    /// Unit eigenvector of the most negative eigenvalue when the check fails.
    pub witness: Option<Vec<f64>>,
}

/// Positive semidefiniteness up to `-tol`, via the full dense spectrum.
pub fn psd_check(a: &SparseSymMatrix, tol: f64, cap: usize) -> Result<PsdReport> {
    let spec = dense_sym_eig(a, cap)?;
    let min = spec.values[0];
    let is_psd = min >= -tol;
    let witness = (!is_psd).then(|| {
        let mut v: Vec<f64> = spec.vectors.column(0).iter().copied().collect();
        // fix the sign so the first non-negligible entry is positive
        if let Some(&first) = v.iter().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v
    });
    Ok(PsdReport { is_psd, min_eigenvalue: min, witness })
}
