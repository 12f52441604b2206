//! Sweeps of `h_{n,d}` over `n`, extrapolation to `n → ∞`, and the table of
//! known bounds on `h(d)`.

use std::f64::consts::{E, LN_2, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet_graph::BoundaryGraph;
use crate::error::{Error, Result};
use crate::estimation::{fidelity_of, kahn_variational_h, EstimationMatrix};
use crate::kahn_bound::{h_upper, to_f64};
use crate::spectral::LanczosOptions;

/// Options for [`sweep`]; `max_basis` is tuned up front because the relative
/// gap of `M_est` shrinks like `1/n²`.
pub fn sweep_options(tol: f64) -> LanczosOptions {
    LanczosOptions { tol, max_iter: 200_000, max_basis: 80 }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub f_est: f64,
    pub h_nd: f64,
    pub lambda_graph: Option<f64>,
    /// `n² λ_graph / d²`.
    pub sandwich_lower: Option<f64>,
    /// `n²(1 − vᵀ M_est v)` for Kahn's test vector.
    pub variational_upper: Option<f64>,
}

impl SweepRow {
    /// `lower ≤ h ≤ upper + slack`, skipping absent sides.
    pub fn sandwich_holds(&self, slack: f64) -> bool {
        self.sandwich_lower.is_none_or(|lo| lo <= self.h_nd)
            && self.variational_upper.is_none_or(|hi| self.h_nd <= hi + slack)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepFailure {
    pub n: usize,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSeries {
    pub d: usize,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

impl SweepSeries {
    pub fn has_sandwich(&self) -> bool {
        has_sandwich(self.d)
    }

    pub fn points(&self) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.n, r.h_nd)).collect()
    }
}

fn has_sandwich(d: usize) -> bool {
    d == 2 || d == 3
}

pub fn sweep_row(n: usize, d: usize, opts: &LanczosOptions) -> Result<SweepRow> {
    let m = EstimationMatrix::build(n, d)?;
    let (rec, _) = fidelity_of(&m, opts)?;
    let (mut lambda_graph, mut sandwich_lower, mut variational_upper) = (None, None, None);
    if has_sandwich(d) {
        let lap = BoundaryGraph::from_lattice(m.lattice()).dirichlet_laplacian();
        let lam = lap.min_eig(opts)?.value;
        lambda_graph = Some(lam);
        sandwich_lower = Some((n * n) as f64 * lam / (d * d) as f64);
        variational_upper = match kahn_variational_h(n, d) {
            Ok(v) => Some(v),
            Err(Error::ZeroTestVector { .. }) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(SweepRow {
        n,
        d,
        dim: rec.dim,
        f_est: rec.f_est,
        h_nd: rec.h_nd,
        lambda_graph,
        sandwich_lower,
        variational_upper,
    })
}

/// One row per `n`, computed in parallel; failed rows are collected separately
/// and the remaining rows keep the input order.
pub fn sweep(d: usize, ns: &[usize], opts: &LanczosOptions) -> SweepSeries {
    let results: Vec<(usize, Result<SweepRow>)> =
        ns.par_iter().map(|&n| (n, sweep_row(n, d, opts))).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(SweepFailure { n, message: e.to_string() }),
        }
    }
    SweepSeries { d, rows, failures }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `h∞ + c₁/n`.
    Linear,
    /// `h∞ + c₁/n + c₂/n²`.
    Quadratic,
}

impl FitModel {
    fn terms(self) -> usize {
        match self {
            FitModel::Linear => 2,
            FitModel::Quadratic => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Extrapolation {
    pub model: FitModel,
    pub limit: f64,
    /// Leave-one-out jackknife standard error of `limit`; absent when
    /// dropping a point leaves the fit underdetermined.
    pub spread: Option<f64>,
    /// `[h∞, c₁, (c₂)]`.
    pub coefficients: Vec<f64>,
    pub points: usize,
}

/// Largest singular-value ratio the scaled design matrix may have.
const MAX_CONDITION: f64 = 1e10;

fn least_squares(points: &[(usize, f64)], model: FitModel) -> Result<Vec<f64>> {
    let p = model.terms();
    let n0 = points.iter().map(|&(n, _)| n).min().unwrap_or(1) as f64;
    // columns (n0/n)^k keep the matrix well scaled
    let a = DMatrix::from_fn(points.len(), p, |r, c| (n0 / points[r].0 as f64).powi(c as i32));
    let b = DVector::from_iterator(points.len(), points.iter().map(|&(_, h)| h));
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(Error::IllConditionedFit(format!(
            "design condition number {:.3e} over {} points",
            smax / smin,
            points.len()
        )));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    Ok((0..p).map(|k| x[k] * n0.powi(k as i32)).collect())
}

/// Fits `h_{n,d}` against powers of `1/n` over the points with `n` in `window`
/// (inclusive) and reports the constant term.
pub fn extrapolate(
    points: &[(usize, f64)],
    window: Option<(usize, usize)>,
    model: FitModel,
) -> Result<Extrapolation> {
    let mut pts: Vec<(usize, f64)> = points
        .iter()
        .copied()
        .filter(|&(n, _)| window.is_none_or(|(lo, hi)| lo <= n && n <= hi))
        .collect();
    pts.sort_by_key(|&(n, _)| n);
    pts.dedup_by_key(|&mut (n, _)| n);
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 distinct n in the window, got {}", pts.len())));
    }
    if pts.len() < model.terms() {
        return Err(Error::IllConditionedFit(format!(
            "{} points cannot determine {} coefficients",
            pts.len(),
            model.terms()
        )));
    }
    let coefficients = least_squares(&pts, model)?;
    let limit = coefficients[0];
    let spread = if pts.len() > model.terms() {
        let k = pts.len() as f64;
        let mut loo = Vec::with_capacity(pts.len());
        for skip in 0..pts.len() {
            let sub: Vec<(usize, f64)> =
                pts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &p)| p).collect();
            loo.push(least_squares(&sub, model)?[0]);
        }
        let mean = loo.iter().sum::<f64>() / k;
        Some(((k - 1.0) / k * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt())
    } else {
        None
    };
    Ok(Extrapolation { model, limit, spread, coefficients, points: pts.len() })
}

/// `[(25 − ln 2) / (20000(π/100 + ln 2))]²`.
pub fn haah_alpha() -> f64 {
    ((25.0 - LN_2) / (20000.0 * (PI / 100.0 + LN_2))).powi(2)
}

/// `√(50(π/100 + ln 2) / (25 − ln 2))`.
pub fn haah_beta() -> f64 {
    (50.0 * (PI / 100.0 + LN_2) / (25.0 - LN_2)).sqrt()
}

/// Known value of `h(d)`: `π²` for `d = 2`, `56π²/9` for `d = 3`.
pub fn exact_h(d: usize) -> Option<f64> {
    match d {
        2 => Some(PI * PI),
        3 => Some(56.0 * PI * PI / 9.0),
        _ => None,
    }
}

/// Leading terms of the published bounds on `h(d)`; lower-order remainders
/// are dropped.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsRow {
    pub d: usize,
    pub christandl_lo: f64,
    pub christandl_hi: f64,
    pub yang_hi: f64,
    pub haah_lo: f64,
    pub kahn_hi: f64,
    pub conjecture_lo: f64,
    pub exact: Option<f64>,
}

pub fn bounds_row(d: usize) -> Result<BoundsRow> {
    let kahn_hi = to_f64(&h_upper(d)?);
    let x = d as f64;
    let (alpha, beta) = (haah_alpha(), haah_beta());
    Ok(BoundsRow {
        d,
        christandl_lo: (x * x - 1.0) / 16.0,
        christandl_hi: x.powi(5) / (4.0 * 2f64.sqrt()),
        yang_hi: 18.0 * PI * PI * x.powi(4),
        haah_lo: alpha * (x * x - beta * beta).powi(2),
        kahn_hi,
        conjecture_lo: PI * x.powi(4) / (8.0 * E.powi(3)),
        exact: exact_h(d),
    })
}

pub fn bounds_table(ds: &[usize]) -> Result<Vec<BoundsRow>> {
    ds.iter().map(|&d| bounds_row(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_sweep() {
        let s = sweep(2, &[1, 2, 3, 10], &sweep_options(1e-10));
        assert!(s.failures.is_empty());
        assert_eq!(s.rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2, 3, 10]);
        assert_abs_diff_eq!(s.rows[1].h_nd, 4.0 * (1.0 - (3.0 + 5f64.sqrt()) / 8.0), epsilon = 1e-11);
        // n = 1 has no nonzero test vector
        assert!(s.rows[0].variational_upper.is_none());
        for r in &s.rows {
            assert!(r.sandwich_holds(1e-9), "{r:?}");
        }
    }

    #[test]
    fn failures_are_reported_and_sweep_continues() {
        let s = sweep(2, &[0, 4], &sweep_options(1e-10));
        assert_eq!(s.failures.len(), 1);
        assert_eq!(s.failures[0].n, 0);
        assert_eq!(s.rows.len(), 1);
    }

    #[test]
    fn no_sandwich_outside_two_and_three() {
        let s = sweep(5, &[10, 15], &sweep_options(1e-10));
        assert!(s.rows.iter().all(|r| r.lambda_graph.is_none() && r.variational_upper.is_none()));
        assert!(!s.has_sandwich());
    }

    #[test]
    fn sandwich_over_ranges() {
        for (d, ns) in [(2usize, (3..=120).collect::<Vec<_>>()), (3, (6..=60).collect())] {
            let s = sweep(d, &ns, &sweep_options(1e-10));
            assert!(s.failures.is_empty());
            for r in &s.rows {
                let lo = r.sandwich_lower.unwrap();
                assert!(lo <= r.h_nd + 1e-9 * r.h_nd, "{r:?}");
                assert!(r.h_nd <= r.variational_upper.unwrap() + 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn extrapolation_recovers_synthetic_limits() {
        let pts: Vec<(usize, f64)> = (1..=8).map(|k| (100 * k, 7.0 + 3.0 / (100 * k) as f64)).collect();
        for model in [FitModel::Linear, FitModel::Quadratic] {
            let e = extrapolate(&pts, None, model).unwrap();
            assert_abs_diff_eq!(e.limit, 7.0, epsilon = 1e-10);
            assert!(e.spread.unwrap() < 1e-9);
        }
        let pts: Vec<(usize, f64)> =
            (1..=6).map(|k| (50 * k, 2.0 - 4.0 / (50 * k) as f64 + 90.0 / ((50 * k) as f64).powi(2))).collect();
        let e = extrapolate(&pts, Some((50, 300)), FitModel::Quadratic).unwrap();
        assert_abs_diff_eq!(e.limit, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e.coefficients[1], -4.0, epsilon = 1e-7);
        assert_abs_diff_eq!(e.coefficients[2], 90.0, epsilon = 1e-4);
    }

    #[test]
    fn extrapolation_rejects_bad_windows() {
        let pts = [(100, 1.0), (200, 1.1)];
        assert!(extrapolate(&pts, None, FitModel::Linear).is_err());
        let clustered = [(1_000_000, 1.0), (1_000_001, 1.0), (1_000_002, 1.0)];
        assert!(matches!(
            extrapolate(&clustered, None, FitModel::Quadratic),
            Err(Error::IllConditionedFit(_))
        ));
        let exact3 = [(10, 1.0), (20, 2.0), (30, 1.5)];
        assert!(extrapolate(&exact3, None, FitModel::Quadratic).unwrap().spread.is_none());
    }

    #[test]
    fn haah_constants() {
        assert_abs_diff_eq!(haah_alpha(), 2.81e-6, epsilon = 0.01e-6);
        assert_abs_diff_eq!(haah_beta(), 1.22, epsilon = 0.005);
    }

    #[test]
    fn bounds_examples() {
        let t = bounds_table(&[2, 3, 4, 10]).unwrap();
        assert_eq!(t[0].kahn_hi, 10.0);
        assert_abs_diff_eq!(t[0].exact.unwrap(), 9.8696044, epsilon = 1e-7);
        assert_abs_diff_eq!(t[1].kahn_hi, 224.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[1].exact.unwrap(), 61.4108718, epsilon = 1e-7);
        assert!(t[2].exact.is_none());
        let b2 = haah_beta().powi(2);
        assert_abs_diff_eq!(t[3].haah_lo, haah_alpha() * (100.0 - b2).powi(2), epsilon = 1e-15);
        for r in &t {
            for v in [r.christandl_lo, r.christandl_hi, r.yang_hi, r.haah_lo, r.kahn_hi, r.conjecture_lo] {
                assert!(v.is_finite());
            }
        }
    }

    #[test]
    fn large_d_ratios() {
        let r = bounds_row(10_000).unwrap();
        let want = 3.0 / (2.0 * haah_alpha());
        assert!((r.kahn_hi / r.haah_lo - want).abs() <= 0.01 * want);
        assert_abs_diff_eq!(want, 5.33e5, epsilon = 0.01e5);
        let want = 12.0 * E.powi(3) / PI;
        assert!((r.kahn_hi / r.conjecture_lo - want).abs() <= 0.01 * want);
        assert_abs_diff_eq!(want, 76.7, epsilon = 0.05);
    }

    #[test]
    fn ordering_against_previous_bounds() {
        for d in 2..=100 {
            let r = bounds_row(d).unwrap();
            assert!(r.kahn_hi <= r.yang_hi, "d={d}");
            // the Christandl upper bound is only a leading term, d⁵/(4√2); it
            // overtakes 3d⁴/2 from d = 8 on
            assert_eq!(r.kahn_hi <= r.christandl_hi, d >= 8, "d={d}");
        }
    }
}
