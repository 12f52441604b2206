use super::lanczos::{self, dot, EigResult, LanczosOptions, SymOperator, Which};
use super::SparseSymMatrix;
use crate::error::{Error, Result};

/// Conjugate gradients for `M x = b`, `M` symmetric positive definite.
///
/// Fails with [`Error::NotPositiveDefinite`] as soon as a search direction has
/// non-positive curvature.
pub fn cg_solve(m: &SparseSymMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = m.dim();
    let mut x = vec![0.0; n];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut mp = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        m.matvec(&p, &mut mp);
        let curv = dot(&p, &mp);
        if !(curv > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rr / curv;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::NoConvergence { iterations: (10 * n).max(100), residual: rr.sqrt() / bnorm })
}

struct Pencil<'a> {
    k: &'a SparseSymMatrix,
    m: &'a SparseSymMatrix,
    metric: Box<dyn Fn(&[f64], &mut [f64]) + 'a>,
}

impl SymOperator for Pencil<'_> {
    fn dim(&self) -> usize {
        self.k.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let kx = self.k.mul_vec(x);
        let sol = cg_solve(self.m, &kx, 1e-14)?;
        y.copy_from_slice(&sol);
        Ok(())
    }

    fn metric(&self) -> Option<lanczos::Metric<'_>> {
        Some(&*self.metric)
    }
}

/// Smallest `λ` with `K u = λ M u`, by Lanczos on `M⁻¹K` in the `M` inner product.
///
/// The reported residual is `‖M⁻¹K u − λu‖_M / (‖u‖_M ρ)` with `ρ` the
/// spectral radius estimate of the pencil.
pub fn pencil_min_eig(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    opts: &LanczosOptions,
) -> Result<EigResult> {
    if k.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), found: m.dim() });
    }
    if m.diagonal().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let op = Pencil { k, m, metric: Box::new(move |x: &[f64], y: &mut [f64]| m.matvec(x, y)) };
    lanczos::solve(&op, Which::Smallest, opts)
}
