//! The lattice graph with a one-step halo and its Dirichlet Laplacian.
//!
//! Points are kept as integer vectors `μ` (the scaled point is `μ/n`). The
//! halo consists of every `μ + f_ij` that is not itself a diagram; those points
//! enter vertex degrees but carry no matrix rows.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::EstimationMatrix;
use crate::spectral::{
    extremal_eig, psd_check, EigResult, LanczosOptions, SparseSymMatrix, Which, DEFAULT_DENSE_CAP,
};
use crate::young_lattice::{LatticeIndex, ShiftVector, DEFAULT_DIMENSION_CAP};

pub type Point = Vec<i64>;

#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    n: usize,
    d: usize,
    /// Interior points first, in lattice order, then halo points in discovery order.
    points: Vec<Point>,
    interior: usize,
    index: HashMap<Point, usize>,
    /// `(a, b)` with `a < b`, sorted.
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl BoundaryGraph {
    pub fn build(n: usize, d: usize) -> Result<Self> {
        Self::build_capped(n, d, DEFAULT_DIMENSION_CAP)
    }

    pub fn build_capped(n: usize, d: usize, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidArgument("d must be at least 2".into()));
        }
        let lattice = LatticeIndex::enumerate_capped(n, d, cap)?;
        Ok(Self::from_lattice(&lattice))
    }

    pub fn from_lattice(lattice: &LatticeIndex) -> Self {
        let d = lattice.d();
        let mut points: Vec<Point> = lattice
            .diagrams()
            .iter()
            .map(|mu| mu.parts().iter().map(|&p| p as i64).collect())
            .collect();
        let interior = points.len();
        let mut index: HashMap<Point, usize> =
            points.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect();
        for k in 0..interior {
            for f in ShiftVector::all(d) {
                let mut q = points[k].clone();
                f.apply(&mut q);
                if !index.contains_key(&q) {
                    index.insert(q.clone(), points.len());
                    points.push(q);
                }
            }
        }
        let mut edges = Vec::new();
        let mut degrees = vec![0usize; points.len()];
        for (a, p) in points.iter().enumerate() {
            for f in ShiftVector::all(d) {
                let mut q = p.clone();
                f.apply(&mut q);
                if let Some(&b) = index.get(&q) {
                    degrees[a] += 1;
                    if a < b {
                        edges.push((a, b));
                    }
                }
            }
        }
        edges.sort_unstable();
        Self { n: lattice.n(), d, points, interior, index, edges, degrees }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn interior_count(&self) -> usize {
        self.interior
    }

    pub fn boundary_count(&self) -> usize {
        self.points.len() - self.interior
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn interior(&self) -> &[Point] {
        &self.points[..self.interior]
    }

    pub fn boundary(&self) -> &[Point] {
        &self.points[self.interior..]
    }

    pub fn is_interior(&self, k: usize) -> bool {
        k < self.interior
    }

    pub fn position(&self, p: &[i64]) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree counted over the whole graph, halo included.
    pub fn degree(&self, k: usize) -> usize {
        self.degrees[k]
    }

    /// Interior-restricted Laplacian: full-graph degree on the diagonal, `-1`
    /// for each interior-interior edge.
    pub fn dirichlet_laplacian(&self) -> DirichletLaplacian {
        let m = self.interior;
        let diag = (0..m).map(|k| (k, k, self.degrees[k] as f64));
        let off = self
            .edges
            .iter()
            .filter(|&&(a, b)| a < m && b < m)
            .map(|&(a, b)| (a, b, -1.0));
        let matrix = SparseSymMatrix::from_triplets(m, diag.chain(off)).expect("indices in range");
        DirichletLaplacian { matrix }
    }

    /// One edge per line: `a1,a2,.. b1,b2,..` in integer coordinates.
    pub fn write_edges<W: Write>(&self, mut out: W) -> Result<()> {
        let fmt = |p: &Point| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        for &(a, b) in &self.edges {
            writeln!(out, "{} {}", fmt(&self.points[a]), fmt(&self.points[b]))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DirichletLaplacian {
    matrix: SparseSymMatrix,
}

impl DirichletLaplacian {
    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn min_eig(&self, opts: &LanczosOptions) -> Result<EigResult> {
        extremal_eig(&self.matrix, Which::Smallest, opts)
    }
}

pub fn dirichlet_laplacian(n: usize, d: usize) -> Result<DirichletLaplacian> {
    Ok(BoundaryGraph::build(n, d)?.dirichlet_laplacian())
}

/// `λ_min` of the Dirichlet Laplacian.
pub fn lambda_min_graph(n: usize, d: usize, opts: &LanczosOptions) -> Result<f64> {
    Ok(dirichlet_laplacian(n, d)?.min_eig(opts)?.value)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DominationViolation {
    /// Off-diagonal entries of `L` and `d²(1 − M_est)` disagree.
    OffDiagonal { mu: Vec<u32>, nu: Vec<u32>, laplacian: i64, scaled: i64 },
    /// `L_μμ > d² − #(μ+□)`.
    Diagonal { mu: Vec<u32>, laplacian: i64, bound: i64 },
    /// `d²(1 − M_est) − L` has a negative eigenvalue.
    NotPsd { min_eigenvalue: f64, witness: Vec<f64> },
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    /// Smallest eigenvalue of the difference; `None` when above the dense cap.
    pub min_eigenvalue: Option<f64>,
    pub violations: Vec<DominationViolation>,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `L ≤ d²(1 − M_est)`: off-diagonals equal, diagonals ordered, and
/// (up to the dense cap) the difference is positive semidefinite with
/// eigenvalues at least `-tol`.
pub fn domination_check(n: usize, d: usize, tol: f64) -> Result<DominationReport> {
    domination_check_capped(n, d, tol, DEFAULT_DENSE_CAP)
}

pub fn domination_check_capped(n: usize, d: usize, tol: f64, dense_cap: usize) -> Result<DominationReport> {
    let m = EstimationMatrix::build(n, d)?;
    let graph = BoundaryGraph::from_lattice(m.lattice());
    let lap = graph.dirichlet_laplacian();
    let dd = (d * d) as i64;
    let parts = |k: usize| m.lattice().diagrams()[k].parts().to_vec();

    // d²(1 − M_est) − L, all integers
    let mut diff: HashMap<(usize, usize), i64> = HashMap::new();
    for &(r, c, k) in m.counts() {
        let v = if r == c { dd - k as i64 } else { -(k as i64) };
        *diff.entry((r, c)).or_default() += v;
    }
    for &(r, c, v) in lap.matrix().entries() {
        *diff.entry((r, c)).or_default() -= v as i64;
    }

    let mut violations = Vec::new();
    let mut keys: Vec<_> = diff.keys().copied().collect();
    keys.sort_unstable();
    for &(r, c) in &keys {
        let v = diff[&(r, c)];
        if r != c && v != 0 {
            let laplacian = lap.matrix().get(r, c) as i64;
            violations.push(DominationViolation::OffDiagonal {
                mu: parts(r),
                nu: parts(c),
                laplacian,
                scaled: laplacian + v,
            });
        } else if r == c && v < 0 {
            let laplacian = lap.matrix().get(r, r) as i64;
            violations.push(DominationViolation::Diagonal { mu: parts(r), laplacian, bound: laplacian + v });
        }
    }

    let mut min_eigenvalue = None;
    if m.dim() <= dense_cap {
        let mat = SparseSymMatrix::from_triplets(
            m.dim(),
            keys.iter().map(|&(r, c)| (r, c, diff[&(r, c)] as f64)),
        )?;
        let psd = psd_check(&mat, tol, dense_cap)?;
        min_eigenvalue = Some(psd.min_eigenvalue);
        if let Some(witness) = psd.witness {
            violations.push(DominationViolation::NotPsd { min_eigenvalue: psd.min_eigenvalue, witness });
        }
    }
    Ok(DominationReport { n, d, dim: m.dim(), min_eigenvalue, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn graph_examples() {
        let g = BoundaryGraph::build(2, 2).unwrap();
        assert_eq!(g.interior(), &[vec![2, 0], vec![1, 1]]);
        let mut b = g.boundary().to_vec();
        b.sort();
        assert_eq!(b, vec![vec![0, 2], vec![3, -1]]);
        assert_eq!(g.edges().len(), 3);
        let degs: Vec<usize> = (0..4).map(|k| g.degree(k)).collect();
        let mut sorted = degs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 1, 2, 2]);

        let g = BoundaryGraph::build(4, 2).unwrap();
        assert_eq!((g.interior_count(), g.boundary_count()), (3, 2));
        assert_eq!(g.edges().len(), 4);

        let g = BoundaryGraph::build(3, 3).unwrap();
        assert_eq!(g.interior(), &[vec![3, 0, 0], vec![2, 1, 0], vec![1, 1, 1]]);
        for k in 0..3 {
            assert_eq!(g.degree(k), 6);
        }
    }

    #[test]
    fn every_edge_is_a_shift() {
        for (n, d) in [(7, 2), (9, 3), (6, 4)] {
            let g = BoundaryGraph::build(n, d).unwrap();
            for &(a, b) in g.edges() {
                let diff: Vec<i64> = g.points()[a].iter().zip(&g.points()[b]).map(|(x, y)| y - x).collect();
                assert_eq!(diff.iter().filter(|&&x| x == 1).count(), 1);
                assert_eq!(diff.iter().filter(|&&x| x == -1).count(), 1);
                assert_eq!(diff.iter().filter(|&&x| x == 0).count(), d - 2);
            }
            for p in g.boundary() {
                assert!(ShiftVector::all(d).any(|f| {
                    let mut q = p.clone();
                    f.apply(&mut q);
                    g.position(&q).is_some_and(|k| g.is_interior(k))
                }));
            }
        }
    }

    #[test]
    fn laplacian_examples() {
        let l = dirichlet_laplacian(2, 2).unwrap();
        assert_eq!(l.matrix().to_dense(), nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let l = dirichlet_laplacian(3, 3).unwrap();
        let want = [6.0, -1.0, 0.0, -1.0, 6.0, -1.0, 0.0, -1.0, 6.0];
        assert_eq!(l.matrix().to_dense(), nalgebra::DMatrix::from_row_slice(3, 3, &want));
    }

    #[test]
    fn constant_diagonals() {
        for n in 1..=40 {
            let l = dirichlet_laplacian(n, 2).unwrap();
            assert!(l.matrix().diagonal().iter().all(|&x| x == 2.0));
            for r in 0..l.dim() {
                for (c, v) in l.matrix().row(r) {
                    assert!(c == r || (v == -1.0 && c.abs_diff(r) == 1));
                }
            }
            let l = dirichlet_laplacian(n, 3).unwrap();
            assert!(l.matrix().diagonal().iter().all(|&x| x == 6.0));
        }
    }

    #[test]
    fn lambda_examples() {
        let opts = LanczosOptions::default();
        assert_abs_diff_eq!(lambda_min_graph(4, 2, &opts).unwrap(), 2.0 - 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(lambda_min_graph(2, 2, &opts).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lambda_min_graph(3, 3, &opts).unwrap(), 6.0 - 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn scaled_lambda_converges_at_first_order() {
        // n²λ_min climbs towards its limit with increments shrinking like 1/n
        let opts = LanczosOptions::default();
        for d in [2usize, 3] {
            let vals: Vec<f64> = [50usize, 100, 200, 400]
                .iter()
                .map(|&n| (n * n) as f64 * lambda_min_graph(n, d, &opts).unwrap())
                .collect();
            let steps: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            assert!(steps.iter().all(|&s| s > 0.0), "d={d}: {vals:?}");
            for w in steps.windows(2) {
                assert!(w[1] < 0.7 * w[0], "d={d}: {vals:?}");
            }
        }
        // d = 2 is a path: n²λ = 2n²(1 − cos(π/(m+1))) < n²π²/(m+1)² < 4π²
        for n in [50usize, 100, 200, 400] {
            let v = (n * n) as f64 * lambda_min_graph(n, 2, &opts).unwrap();
            assert!(v < 4.0 * std::f64::consts::PI.powi(2));
        }
    }

    #[test]
    fn domination_examples() {
        let r = domination_check(2, 2, 1e-10).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.min_eigenvalue.unwrap(), 0.0, epsilon = 1e-14);
        let r = domination_check(3, 3, 1e-10).unwrap();
        assert!(r.passed());
        assert_abs_diff_eq!(r.min_eigenvalue.unwrap(), 0.0, epsilon = 1e-14);
        let r = domination_check(4, 4, 1e-10).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn domination_small_exhaustive() {
        for d in [2usize, 3] {
            for n in 1..=20 {
                let r = domination_check(n, d, 1e-10).unwrap();
                assert!(r.passed(), "n={n} d={d}: {:?}", r.violations);
            }
        }
    }

    #[test]
    fn entrywise_checks_above_dense_cap() {
        let r = domination_check_capped(30, 3, 1e-10, 10).unwrap();
        assert!(r.min_eigenvalue.is_none());
        assert!(r.passed());
    }

    #[test]
    fn edge_dump() {
        let g = BoundaryGraph::build(2, 2).unwrap();
        let mut buf = Vec::new();
        g.write_edges(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().any(|l| l == "2,0 1,1"));
    }
}
