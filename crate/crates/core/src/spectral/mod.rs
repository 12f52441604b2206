//! Extremal eigenvalues of sparse symmetric matrices and pencils.

mod dense;
mod lanczos;
mod pencil;
mod sparse;

pub use dense::{dense_sym_eig, psd_check, DenseSpectrum, PsdReport, DEFAULT_DENSE_CAP};
pub use lanczos::{EigResult, LanczosOptions, Which, DEFAULT_TOL};
pub use pencil::{cg_solve, pencil_min_eig};
pub use sparse::SparseSymMatrix;

use crate::error::Result;

struct Plain<'a>(&'a SparseSymMatrix);

impl lanczos::SymOperator for Plain<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.0.matvec(x, y);
        Ok(())
    }

    fn metric(&self) -> Option<lanczos::Metric<'_>> {
        None
    }
}

/// Largest or smallest eigenpair of `a`. Starts from the normalized all-ones
/// vector, so repeated calls are bit-identical.
pub fn extremal_eig(a: &SparseSymMatrix, which: Which, opts: &LanczosOptions) -> Result<EigResult> {
    lanczos::solve(&Plain(a), which, opts)
}
