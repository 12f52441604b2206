//! Thick-restart Lanczos (Krylov–Schur form) with full reorthogonalization.
//!
//! Every new Krylov vector is orthogonalized twice against the whole basis
//! (classical Gram–Schmidt, two passes), so the projected matrix is simply
//! `H = Vᵀ B Op V` read off the Gram–Schmidt coefficients. At a restart the
//! wanted Ritz vectors are kept and the residual vector becomes the next basis
//! vector; the coupling terms reappear automatically in the next column.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Largest,
    Smallest,
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    /// Relative residual target: `‖Op x − θx‖ ≤ tol · ρ`, with `ρ` the largest
    /// Ritz value magnitude seen (spectral radius estimate).
    pub tol: f64,
    /// Operator applications before giving up.
    pub max_iter: usize,
    /// Basis size at which the iteration restarts.
    pub max_basis: usize,
}

pub const DEFAULT_TOL: f64 = 1e-10;

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: 10_000, max_basis: 160 }
    }
}

impl LanczosOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct EigResult {
    pub value: f64,
    /// Euclidean unit vector.
    pub vector: Vec<f64>,
    /// Relative residual, in the same sense as [`LanczosOptions::tol`].
    pub residual: f64,
    pub iterations: usize,
}

/// `y = B x` for the inner-product matrix `B`.
pub(crate) type Metric<'a> = &'a dyn Fn(&[f64], &mut [f64]);

/// A self-adjoint operator with respect to the inner product `⟨x, y⟩ = xᵀ B y`.
pub(crate) trait SymOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
    /// `y = B x`; `None` means `B = I`.
    fn metric(&self) -> Option<Metric<'_>>;
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic filler used after an invariant subspace has been exhausted.
fn fill_vector(dim: usize, salt: u64) -> Vec<f64> {
    (0..dim as u64)
        .map(|i| {
            let bits = splitmix(salt.wrapping_mul(0x1_0000_0001).wrapping_add(i)) >> 11;
            bits as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

struct Basis<'a> {
    vecs: Vec<Vec<f64>>,
    /// `B v_i` when a metric is present.
    bvecs: Vec<Vec<f64>>,
    metric: Option<Metric<'a>>,
}

impl<'a> Basis<'a> {
    fn len(&self) -> usize {
        self.vecs.len()
    }

    fn bmul(&self, x: &[f64]) -> Vec<f64> {
        match self.metric {
            Some(b) => {
                let mut y = vec![0.0; x.len()];
                b(x, &mut y);
                y
            }
            None => x.to_vec(),
        }
    }

    fn norm(&self, x: &[f64]) -> Result<f64> {
        match self.metric {
            Some(_) => {
                let bx = self.bmul(x);
                let q = dot(x, &bx);
                if q < -1e-13 * dot(x, x).sqrt() * dot(&bx, &bx).sqrt() {
                    return Err(Error::NotPositiveDefinite);
                }
                Ok(q.max(0.0).sqrt())
            }
            None => Ok(dot(x, x).sqrt()),
        }
    }

    /// Two-pass classical Gram–Schmidt; returns the projection coefficients.
    fn orthogonalize(&self, w: &mut [f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.len()];
        for _ in 0..2 {
            let refs = if self.metric.is_some() { &self.bvecs } else { &self.vecs };
            let c: Vec<f64> = refs.iter().map(|bv| dot(bv, w)).collect();
            for (v, &ci) in self.vecs.iter().zip(&c) {
                axpy(-ci, v, w);
            }
            for (acc, ci) in coeffs.iter_mut().zip(c) {
                *acc += ci;
            }
        }
        coeffs
    }

    fn push(&mut self, v: Vec<f64>) {
        if self.metric.is_some() {
            let bv = self.bmul(&v);
            self.bvecs.push(bv);
        }
        self.vecs.push(v);
    }

    /// Replaces the basis by `V Y[:, cols]`.
    fn rotate(&mut self, y: &DMatrix<f64>, cols: &[usize]) {
        let combine = |src: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            cols.iter()
                .map(|&c| {
                    let mut out = vec![0.0; src[0].len()];
                    for (l, v) in src.iter().enumerate() {
                        axpy(y[(l, c)], v, &mut out);
                    }
                    out
                })
                .collect()
        };
        self.vecs = combine(&self.vecs);
        if self.metric.is_some() {
            self.bvecs = combine(&self.bvecs);
        }
    }
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    /// Column indices ordered from most to least wanted.
    order: Vec<usize>,
}

fn ritz(h: &DMatrix<f64>, len: usize, which: Which) -> Ritz {
    let block = h.view((0, 0), (len, len)).into_owned();
    let sym = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        match which {
            Which::Largest => ord.reverse(),
            Which::Smallest => ord,
        }
    });
    Ritz { values, vectors: eig.eigenvectors, order }
}

pub(crate) fn solve<O: SymOperator>(op: &O, which: Which, opts: &LanczosOptions) -> Result<EigResult> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let m = opts.max_basis.max(2).min(n);
    let keep = (m / 2).max(1);
    let check_every = 8;

    let mut basis = Basis { vecs: Vec::with_capacity(m), bvecs: Vec::new(), metric: op.metric() };
    let start = vec![1.0; n];
    let s_norm = basis.norm(&start)?;
    if !(s_norm > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    basis.push(start.iter().map(|x| x / s_norm).collect());

    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut iterations = 0usize;
    let mut since_check = 0usize;
    let mut salt = 0u64;
    // after an invariant subspace was exhausted, convergence is only judged at
    // the end of the cycle so the injected direction gets explored
    let mut deferred = false;
    let mut best = f64::INFINITY;
    let mut w = vec![0.0; n];

    loop {
        let len = basis.len();
        op.apply(&basis.vecs[len - 1], &mut w)?;
        iterations += 1;
        since_check += 1;
        let raw = basis.norm(&w)?;
        let coeffs = basis.orthogonalize(&mut w);
        for (i, &c) in coeffs.iter().enumerate() {
            h[(i, len - 1)] = c;
            h[(len - 1, i)] = c;
        }
        let mut beta = basis.norm(&w)?;
        let broke = len == n || beta <= 1e-12 * raw || beta == 0.0;
        if broke {
            beta = 0.0;
        }
        let at_end = len == m || len == n;

        if at_end || (!deferred && since_check >= check_every) {
            since_check = 0;
            let r = ritz(&h, len, which);
            let scale = r.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
            let top = r.order[0];
            let est = beta * r.vectors[(len - 1, top)].abs() / scale;
            best = best.min(est.max(f64::MIN_POSITIVE));
            if est <= opts.tol {
                let mut x = vec![0.0; n];
                for (l, v) in basis.vecs.iter().enumerate() {
                    axpy(r.vectors[(l, top)], v, &mut x);
                }
                let theta = r.values[top];
                let mut ax = vec![0.0; n];
                op.apply(&x, &mut ax)?;
                iterations += 1;
                axpy(-theta, &x, &mut ax);
                let res = basis.norm(&ax)? / basis.norm(&x)? / scale;
                best = best.min(res);
                if res <= opts.tol {
                    let nrm = dot(&x, &x).sqrt();
                    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
                    x.iter_mut().for_each(|v| *v *= sign / nrm);
                    return Ok(EigResult { value: theta, vector: x, residual: res, iterations });
                }
            }
            if len == n || iterations >= opts.max_iter {
                return Err(Error::NoConvergence { iterations, residual: best });
            }
            if len == m {
                let cols: Vec<usize> = r.order[..keep].to_vec();
                basis.rotate(&r.vectors, &cols);
                h.fill(0.0);
                for (i, &c) in cols.iter().enumerate() {
                    h[(i, i)] = r.values[c];
                }
                deferred = false;
            }
        } else if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual: best });
        }

        if !broke {
            basis.push(w.iter().map(|x| x / beta).collect());
            continue;
        }
        deferred = true;
        loop {
            salt += 1;
            let mut f = fill_vector(n, salt);
            basis.orthogonalize(&mut f);
            let nf = basis.norm(&f)?;
            if nf > 1e-8 {
                basis.push(f.iter().map(|x| x / nf).collect());
                break;
            }
            if salt > 64 {
                return Err(Error::NoConvergence { iterations, residual: best });
            }
        }
    }
}
