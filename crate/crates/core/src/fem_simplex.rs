//! P1 finite elements on the simplicial meshes spanned by the boundary graph.
//!
//! For `d = 2` the mesh is a chain of segments, for `d = 3` a patch of
//! equilateral triangles; both are the `d`-cliques of the graph. Points live
//! in the hyperplane `Σx_i = 1`, embedded isometrically into `ℝ^{d−1}`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dirichlet_graph::{BoundaryGraph, Point};
use crate::error::{Error, Result};
use crate::spectral::{pencil_min_eig, LanczosOptions, SparseSymMatrix};

fn check_d(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { d })
    }
}

/// Orthonormal basis of `{x : Σx_i = 0}` from Gram–Schmidt on `f_12, f_23, …`.
fn hyperplane_basis(d: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        v[k + 1] = -1.0;
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    n: usize,
    d: usize,
    points: Vec<Point>,
    /// Embedded coordinates in `ℝ^{d−1}`.
    vertices: Vec<Vec<f64>>,
    interior: usize,
    /// `d` vertex indices each, ascending; list sorted.
    simplices: Vec<Vec<usize>>,
}

impl Triangulation {
    pub fn build(n: usize, d: usize) -> Result<Self> {
        check_d(d)?;
        if n < 2 {
            return Err(Error::InvalidArgument("mesh needs n >= 2".into()));
        }
        Ok(Self::from_graph(&BoundaryGraph::build(n, d)?))
    }

    /// Meshes any `d ∈ {2, 3}` graph; the cells are exactly its `d`-cliques.
    pub fn from_graph(g: &BoundaryGraph) -> Self {
        let (n, d) = (g.n(), g.d());
        let basis = hyperplane_basis(d);
        let scale = n as f64;
        let vertices = g
            .points()
            .iter()
            .map(|p| {
                basis
                    .iter()
                    .map(|b| p.iter().zip(b).map(|(&x, y)| x as f64 * y).sum::<f64>() / scale)
                    .collect()
            })
            .collect();
        let simplices = match d {
            2 => g.edges().iter().map(|&(a, b)| vec![a, b]).collect(),
            _ => {
                let mut adj = vec![Vec::new(); g.points().len()];
                for &(a, b) in g.edges() {
                    adj[a].push(b);
                    adj[b].push(a);
                }
                let edge_set: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
                let mut tris = Vec::new();
                for &(a, b) in g.edges() {
                    for &c in &adj[b] {
                        if c > b && edge_set.contains(&(a, c)) {
                            tris.push(vec![a, b, c]);
                        }
                    }
                }
                tris.sort_unstable();
                tris
            }
        };
        Self {
            n,
            d,
            points: g.points().to_vec(),
            vertices,
            interior: g.interior_count(),
            simplices,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn interior_count(&self) -> usize {
        self.interior
    }

    pub fn is_interior(&self, k: usize) -> bool {
        k < self.interior
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    /// Total `(d−1)`-volume of the mesh.
    pub fn measure(&self) -> Result<f64> {
        (0..self.simplices.len()).map(|s| Ok(self.element(s)?.volume)).sum()
    }

    fn element(&self, s: usize) -> Result<Element> {
        let idx = &self.simplices[s];
        let k = self.d - 1;
        let x0 = &self.vertices[idx[0]];
        let e = DMatrix::from_fn(k, k, |r, c| self.vertices[idx[c + 1]][r] - x0[r]);
        let det = e.determinant();
        let len = (0..k).map(|c| e.column(c).norm()).fold(1.0, |a, b| a * b);
        if !(det.abs() > 1e-12 * len) {
            return Err(Error::DegenerateSimplex { index: s });
        }
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        let inv = e.try_inverse().ok_or(Error::DegenerateSimplex { index: s })?;
        // rows of E⁻¹ are ∇λ_1..∇λ_k; ∇λ_0 = −Σ
        let mut grads = vec![vec![0.0; k]; k + 1];
        for i in 0..k {
            for c in 0..k {
                grads[i + 1][c] = inv[(i, c)];
                grads[0][c] -= inv[(i, c)];
            }
        }
        Ok(Element { volume: det.abs() / factorial, grads })
    }

    /// Header `d n V S`, then one vertex per line, then one simplex per line.
    pub fn write_mesh<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.d, self.n, self.vertices.len(), self.simplices.len())?;
        for v in &self.vertices {
            let line: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        for s in &self.simplices {
            let line: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

struct Element {
    volume: f64,
    grads: Vec<Vec<f64>>,
}

/// Stiffness and mass matrices over interior vertices.
#[derive(Clone, Debug)]
pub struct FemPair {
    pub k: SparseSymMatrix,
    pub m: SparseSymMatrix,
}

/// Exact P1 assembly: `K_ij = ∫∇ψ_i·∇ψ_j`, `M_ij = ∫ψ_iψ_j`, boundary rows dropped.
pub fn assemble_generic(t: &Triangulation) -> Result<FemPair> {
    let k = t.d - 1;
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    // ∫λ_iλ_j = V(1 + δ_ij) / ((k+1)(k+2))
    let mass_den = ((k + 1) * (k + 2)) as f64;
    for s in 0..t.simplices.len() {
        let el = t.element(s)?;
        let idx = &t.simplices[s];
        for (a, &p) in idx.iter().enumerate() {
            for (b, &q) in idx.iter().enumerate() {
                if p > q || !t.is_interior(p) || !t.is_interior(q) {
                    continue;
                }
                let g: f64 = el.grads[a].iter().zip(&el.grads[b]).map(|(x, y)| x * y).sum();
                kt.push((p, q, el.volume * g));
                let w = if a == b { 2.0 } else { 1.0 };
                mt.push((p, q, el.volume * w / mass_den));
            }
        }
    }
    Ok(FemPair {
        k: SparseSymMatrix::from_triplets(t.interior, kt)?,
        m: SparseSymMatrix::from_triplets(t.interior, mt)?,
    })
}

/// `L`-scaling constants: `K = κ L`, `M = m₀(I − L/c)`.
fn closed_form_constants(n: usize, d: usize) -> (f64, f64, f64) {
    let n = n as f64;
    if d == 2 {
        (n / 2f64.sqrt(), 2f64.sqrt() / n, 6.0)
    } else {
        (1.0 / 3f64.sqrt(), 3f64.sqrt() / (n * n), 12.0)
    }
}

/// The pair written directly in terms of the Dirichlet Laplacian.
pub fn closed_form_pair(n: usize, d: usize) -> Result<FemPair> {
    check_d(d)?;
    let l = BoundaryGraph::build(n, d)?.dirichlet_laplacian();
    let l = l.matrix();
    let (kappa, m0, c) = closed_form_constants(n, d);
    let id = SparseSymMatrix::identity(l.dim());
    Ok(FemPair { k: l.scaled(kappa), m: id.combine(m0, l, -m0 / c)? })
}

#[derive(Clone, Debug, Serialize)]
pub struct FemEig {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    /// Smallest eigenvalue of the assembled pencil `(K, M)`.
    pub pencil: f64,
    /// `(n²/d) λ / (1 − λ/c)` from the graph eigenvalue `λ`.
    pub closed_form: f64,
    pub lambda_graph: f64,
    pub residual: f64,
}

/// Upper bound on the Dirichlet eigenvalue of the meshed region, computed
/// twice: from the generic pencil and from the graph eigenvalue.
pub fn fem_min_eig(n: usize, d: usize, opts: &LanczosOptions) -> Result<FemEig> {
    let t = Triangulation::build(n, d)?;
    let pair = assemble_generic(&t)?;
    let pencil = pencil_min_eig(&pair.k, &pair.m, opts)?;
    let g = BoundaryGraph::build(n, d)?;
    let lambda = g.dirichlet_laplacian().min_eig(opts)?.value;
    let c = closed_form_constants(n, d).2;
    let closed_form = (n * n) as f64 / d as f64 * lambda / (1.0 - lambda / c);
    Ok(FemEig {
        n,
        d,
        dim: pair.k.dim(),
        pencil: pencil.value,
        closed_form,
        lambda_graph: lambda,
        residual: pencil.residual,
    })
}

/// Lowest Dirichlet eigenvalue of the continuum region: the segment of length
/// `1/√2` for `d = 2`, and via Lamé's formula `28π²/(27r²)` with inradius
/// `r = 1/(3√2)` for `d = 3`.
pub fn continuous_reference(d: usize) -> Result<f64> {
    check_d(d)?;
    Ok(if d == 2 {
        2.0 * PI * PI
    } else {
        let r = 1.0 / (3.0 * 2f64.sqrt());
        28.0 * PI * PI / (27.0 * r * r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{extremal_eig, Which};
    use approx::assert_abs_diff_eq;

    fn rel_diff(a: &SparseSymMatrix, b: &SparseSymMatrix) -> f64 {
        let (d, s) = a.max_abs_diff(b).unwrap();
        d / s
    }

    #[test]
    fn unsupported_dimensions() {
        assert!(matches!(Triangulation::build(5, 4), Err(Error::UnsupportedDimension { d: 4 })));
        assert!(matches!(closed_form_pair(5, 4), Err(Error::UnsupportedDimension { d: 4 })));
        assert!(continuous_reference(5).is_err());
        assert!(Triangulation::build(1, 2).is_err());
    }

    #[test]
    fn segment_mesh() {
        let t = Triangulation::build(4, 2).unwrap();
        assert_eq!(t.vertices().len(), 5);
        assert_eq!(t.simplices().len(), 4);
        assert_abs_diff_eq!(t.measure().unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        for n in 2..40 {
            let t = Triangulation::build(n, 2).unwrap();
            assert_eq!(t.vertices().len() - t.interior_count(), 2);
        }
    }

    #[test]
    fn edges_have_lattice_length() {
        for (n, d) in [(7, 2), (8, 3), (11, 3)] {
            let t = Triangulation::build(n, d).unwrap();
            let h = 2f64.sqrt() / n as f64;
            for s in t.simplices() {
                for a in 0..s.len() {
                    for b in a + 1..s.len() {
                        let (p, q) = (&t.vertices()[s[a]], &t.vertices()[s[b]]);
                        let len = p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                        assert_abs_diff_eq!(len, h, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn triangles_of_small_mesh() {
        // (3,0,0), (2,1,0), (1,1,1) plus halo; every interior vertex is surrounded
        // by a full hexagon of six triangles
        let t = Triangulation::build(3, 3).unwrap();
        for v in 0..t.interior_count() {
            assert_eq!(t.simplices().iter().filter(|s| s.contains(&v)).count(), 6);
        }
        let area = 3f64.sqrt() / 4.0 * 2.0 / 9.0;
        assert_abs_diff_eq!(t.measure().unwrap(), area * t.simplices().len() as f64, epsilon = 1e-13);
    }

    #[test]
    fn simplices_meet_in_faces() {
        // two distinct triangles share at most an edge, and never overlap: their
        // centroids are at least the inradius-based distance apart
        let t = Triangulation::build(6, 3).unwrap();
        let centroid = |s: &Vec<usize>| -> Vec<f64> {
            (0..2).map(|c| s.iter().map(|&v| t.vertices()[v][c]).sum::<f64>() / 3.0).collect()
        };
        let h = 2f64.sqrt() / 6.0;
        let cs: Vec<Vec<f64>> = t.simplices().iter().map(centroid).collect();
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                let shared = t.simplices()[i].iter().filter(|v| t.simplices()[j].contains(v)).count();
                assert!(shared <= 2);
                let dist = ((cs[i][0] - cs[j][0]).powi(2) + (cs[i][1] - cs[j][1]).powi(2)).sqrt();
                assert!(dist > h / 3f64.sqrt() - 1e-12);
            }
        }
    }

    #[test]
    fn single_segment_element() {
        // n = 2: chain halo-(2,0)-(1,1)-halo; the middle segment has both ends interior
        let t = Triangulation::build(2, 2).unwrap();
        let pair = assemble_generic(&t).unwrap();
        let l = 2f64.sqrt() / 2.0;
        // each interior vertex touches two segments
        assert_abs_diff_eq!(pair.k.get(0, 0), 2.0 / l, epsilon = 1e-13);
        assert_abs_diff_eq!(pair.k.get(0, 1), -1.0 / l, epsilon = 1e-13);
        assert_abs_diff_eq!(pair.m.get(0, 0), 2.0 * l / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pair.m.get(0, 1), l / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_entries() {
        let p = closed_form_pair(4, 2).unwrap();
        assert_abs_diff_eq!(p.k.get(0, 0), 4.0 * 2f64.sqrt(), epsilon = 1e-13);
        for n in [5, 9] {
            let p = closed_form_pair(n, 3).unwrap();
            assert_abs_diff_eq!(p.k.get(0, 0), 2.0 * 3f64.sqrt(), epsilon = 1e-13);
            assert_abs_diff_eq!(p.m.get(0, 0), 3f64.sqrt() / (2.0 * (n * n) as f64), epsilon = 1e-15);
        }
    }

    #[test]
    fn generic_matches_closed_form() {
        for d in [2usize, 3] {
            for n in 2..=60 {
                let g = assemble_generic(&Triangulation::build(n, d).unwrap()).unwrap();
                let c = closed_form_pair(n, d).unwrap();
                assert!(rel_diff(&g.k, &c.k) <= 1e-12, "K n={n} d={d}");
                assert!(rel_diff(&g.m, &c.m) <= 1e-12, "M n={n} d={d}");
            }
        }
    }

    #[test]
    fn stiffness_is_positive_definite() {
        for (n, d) in [(2, 2), (9, 2), (3, 3), (12, 3)] {
            let p = assemble_generic(&Triangulation::build(n, d).unwrap()).unwrap();
            let lo = extremal_eig(&p.k, Which::Smallest, &LanczosOptions::default()).unwrap();
            assert!(lo.value > 0.0);
            let lo = extremal_eig(&p.m, Which::Smallest, &LanczosOptions::default()).unwrap();
            assert!(lo.value > 0.0);
        }
    }

    #[test]
    fn fem_examples() {
        let opts = LanczosOptions::default();
        let r = fem_min_eig(4, 2, &opts).unwrap();
        let lam = 2.0 - 2f64.sqrt();
        let want = 8.0 * lam / (1.0 - lam / 6.0);
        assert_abs_diff_eq!(r.pencil, want, epsilon = 1e-9);
        assert_abs_diff_eq!(r.closed_form, want, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pencil, 5.1933, epsilon = 1e-4);
        for (n, d) in [(17, 2), (10, 3), (31, 3)] {
            let r = fem_min_eig(n, d, &opts).unwrap();
            assert!((r.pencil - r.closed_form).abs() <= 1e-8 * r.closed_form, "{r:?}");
        }
    }

    #[test]
    fn continuum_references() {
        assert_abs_diff_eq!(continuous_reference(2).unwrap(), 19.7392088, epsilon = 1e-7);
        assert_abs_diff_eq!(continuous_reference(3).unwrap(), 56.0 * PI * PI / 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(continuous_reference(3).unwrap(), 184.2326155, epsilon = 1e-7);
    }

    #[test]
    fn segment_bound_holds() {
        // the meshed segment has length (m+1)√2/n and exact eigenvalue π²/ℓ²
        let opts = LanczosOptions::default();
        for n in (2..=200).step_by(9) {
            let r = fem_min_eig(n, 2, &opts).unwrap();
            let ell = (r.dim + 1) as f64 * 2f64.sqrt() / n as f64;
            assert!(r.pencil >= PI * PI / (ell * ell) - 1e-9, "n={n}");
        }
    }

    #[test]
    fn error_to_continuum_shrinks() {
        let opts = LanczosOptions::default();
        for d in [2usize, 3] {
            let reference = continuous_reference(d).unwrap();
            let errs: Vec<f64> = [25usize, 50, 100, 200]
                .iter()
                .map(|&n| (fem_min_eig(n, d, &opts).unwrap().closed_form - reference).abs())
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] < w[0], "d={d}: {errs:?}");
            }
        }
    }

    #[test]
    fn mesh_export_header() {
        let t = Triangulation::build(4, 2).unwrap();
        let mut buf = Vec::new();
        t.write_mesh(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "2 4 5 4");
        assert_eq!(lines.len(), 1 + 5 + 4);
    }
}
