//! The fidelity matrix `M_est(n, d)` and the quantities derived from it.
//!
//! `(M_est)_{μν} = #[(μ+□) ∩ (ν+□)] / d²`, which reduces to `#(μ+□)/d²` on the
//! diagonal and `1/d²` between diagrams one box move apart. Entries are kept as
//! integer counts over the common denominator `d²` and only turned into floats
//! for the eigensolver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{extremal_eig, EigResult, LanczosOptions, SparseSymMatrix, Which};
use crate::young_lattice::{diagrams, LatticeIndex, ShiftVector, DEFAULT_DIMENSION_CAP};

#[derive(Clone, Debug)]
pub struct EstimationMatrix {
    lattice: LatticeIndex,
    /// Upper-triangle `(row, col, count)`; the entry is `count / d²`.
    counts: Vec<(usize, usize, u32)>,
    matrix: SparseSymMatrix,
}

fn check_nd(n: usize, d: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("d must be at least 2".into()));
    }
    Ok(())
}

impl EstimationMatrix {
    pub fn build(n: usize, d: usize) -> Result<Self> {
        Self::build_capped(n, d, DEFAULT_DIMENSION_CAP)
    }

    pub fn build_capped(n: usize, d: usize, cap: usize) -> Result<Self> {
        check_nd(n, d)?;
        let lattice = LatticeIndex::enumerate_capped(n, d, cap)?;
        let mut counts = Vec::with_capacity(lattice.len() * (1 + d * (d - 1) / 2));
        for (k, mu) in lattice.diagrams().iter().enumerate() {
            counts.push((k, k, mu.add_box_count()));
            for nu in mu.shift_neighbors() {
                let j = lattice.position(&nu).expect("shift stays in the lattice");
                if j > k {
                    counts.push((k, j, 1));
                }
            }
        }
        Ok(Self::from_counts(lattice, counts))
    }

    /// Assembles from the intersection-count definition: every diagram `λ` with
    /// `n + 1` boxes contributes one to each pair of its one-box-smaller parents.
    pub fn build_by_intersection(n: usize, d: usize) -> Result<Self> {
        check_nd(n, d)?;
        let lattice = LatticeIndex::enumerate(n, d)?;
        let mut acc = std::collections::BTreeMap::<(usize, usize), u32>::new();
        for lam in diagrams(n + 1, d) {
            let parents: Vec<usize> = (0..d)
                .filter_map(|i| {
                    let mut p = lam.parts().to_vec();
                    if p[i] == 0 {
                        return None;
                    }
                    p[i] -= 1;
                    crate::young_lattice::YoungDiagram::new(p)
                        .ok()
                        .and_then(|mu| lattice.position(&mu))
                })
                .collect();
            for &a in &parents {
                for &b in &parents {
                    if a <= b {
                        *acc.entry((a, b)).or_insert(0) += 1;
                    }
                }
            }
        }
        let counts = acc.into_iter().map(|((a, b), c)| (a, b, c)).collect();
        Ok(Self::from_counts(lattice, counts))
    }

    fn from_counts(lattice: LatticeIndex, mut counts: Vec<(usize, usize, u32)>) -> Self {
        counts.sort_unstable();
        let denom = (lattice.d() * lattice.d()) as f64;
        let matrix = SparseSymMatrix::from_triplets(
            lattice.len(),
            counts.iter().map(|&(r, c, k)| (r, c, k as f64 / denom)),
        )
        .expect("indices come from the lattice");
        Self { lattice, counts, matrix }
    }

    pub fn lattice(&self) -> &LatticeIndex {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn d(&self) -> usize {
        self.lattice.d()
    }

    pub fn dim(&self) -> usize {
        self.lattice.len()
    }

    /// Integer numerators over [`Self::denominator`], upper triangle, sorted.
    pub fn counts(&self) -> &[(usize, usize, u32)] {
        &self.counts
    }

    pub fn denominator(&self) -> u32 {
        (self.d() * self.d()) as u32
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn max_eig(&self, opts: &LanczosOptions) -> Result<EigResult> {
        extremal_eig(&self.matrix, Which::Largest, opts)
    }

    /// Rayleigh quotient `vᵀ M v / vᵀ v`.
    pub fn variational_fidelity(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if !(vv > 0.0) {
            return Err(Error::InvalidArgument("test vector has zero norm".into()));
        }
        Ok(self.matrix.quadratic_form(v) / vv)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityRecord {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub f_est: f64,
    pub h_nd: f64,
    pub residual: f64,
}

impl FidelityRecord {
    fn new(n: usize, d: usize, dim: usize, eig: &EigResult) -> Self {
        let h_nd = (n * n) as f64 * (1.0 - eig.value);
        Self { n, d, dim, f_est: eig.value, h_nd, residual: eig.residual }
    }
}

/// `F_est(n, d)` as the largest eigenvalue of `M_est`, with `h_{n,d} = n²(1 − F)`.
pub fn fidelity(n: usize, d: usize, opts: &LanczosOptions) -> Result<FidelityRecord> {
    let m = EstimationMatrix::build(n, d)?;
    let eig = m.max_eig(opts)?;
    Ok(FidelityRecord::new(n, d, m.dim(), &eig))
}

/// Same as [`fidelity`] but reuses an assembled matrix and returns the eigenvector too.
pub fn fidelity_of(m: &EstimationMatrix, opts: &LanczosOptions) -> Result<(FidelityRecord, Vec<f64>)> {
    let eig = m.max_eig(opts)?;
    Ok((FidelityRecord::new(m.n(), m.d(), m.dim(), &eig), eig.vector))
}

/// `u(x) = x_d ∏_{i<d} (x_i − x_{i+1})`, vanishing on the boundary of the ordered simplex.
pub fn kahn_polynomial(x: &[f64]) -> f64 {
    let last = *x.last().unwrap_or(&0.0);
    x.windows(2).map(|w| w[0] - w[1]).product::<f64>() * last
}

/// `u(μ)` on integer coordinates; equals `n^d u(μ/n)`.
fn kahn_integer(parts: &[u32]) -> f64 {
    let last = *parts.last().unwrap_or(&0) as f64;
    parts.windows(2).map(|w| (w[0] - w[1]) as f64).product::<f64>() * last
}

/// Unit vector `v_μ ∝ u(μ/n)` over the lattice.
pub fn kahn_test_vector(lattice: &LatticeIndex) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = lattice.diagrams().iter().map(|mu| kahn_integer(mu.parts())).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroTestVector { n: lattice.n(), d: lattice.d() });
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// `n²(1 − vᵀ M_est v)` for Kahn's test vector, streamed over the lattice without
/// assembling `M_est`, so it runs far beyond the eigensolver dimension cap.
///
/// Uses `d²(1 − M)` written as a graph energy, which avoids subtracting two
/// numbers close to one.
pub fn kahn_variational_h(n: usize, d: usize) -> Result<f64> {
    check_nd(n, d)?;
    let dd = (d * d) as f64;
    let mut energy = 0.0;
    let mut mass = 0.0;
    for mu in diagrams(n, d) {
        let u = kahn_integer(mu.parts());
        if u == 0.0 {
            continue;
        }
        let mut diag = dd - mu.add_box_count() as f64;
        let mut flux = 0.0;
        for f in ShiftVector::all(d) {
            if let Some(nu) = mu.shift(f) {
                diag -= 1.0;
                flux += u - kahn_integer(nu.parts());
            }
        }
        energy += u * (diag * u + flux);
        mass += u * u;
    }
    if mass == 0.0 {
        return Err(Error::ZeroTestVector { n, d });
    }
    Ok((n * n) as f64 * energy / (dd * mass))
}
