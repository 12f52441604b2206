//! Self-check suites: each re-derives a family of results through an
//! independent route and reports one line per check.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{bounds_row, haah_alpha};
use crate::dirichlet_graph::domination_check;
use crate::error::{Error, Result};
use crate::fem_simplex::{assemble_generic, closed_form_pair, fem_min_eig, Triangulation};
use crate::kahn_bound::{h_upper, mc_oracle, ratios_closed_form, ratios_recursive, to_f64, DEFAULT_RECURSION_CAP};
use crate::spectral::{dense_sym_eig, extremal_eig, LanczosOptions, SparseSymMatrix, Which, DEFAULT_DENSE_CAP};
use crate::young_lattice::{diagrams, LatticeIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lattice,
    Eigensolver,
    Domination,
    Fem,
    Kahn,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Lattice, Suite::Eigensolver, Suite::Domination, Suite::Fem, Suite::Kahn, Suite::Bounds];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lattice => "lattice",
            Suite::Eigensolver => "eigensolver",
            Suite::Domination => "domination",
            Suite::Fem => "fem",
            Suite::Kahn => "kahn",
            Suite::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Largest `n` for lattice, domination and FEM checks.
    pub n_max: usize,
    /// Random instances for the eigensolver suite.
    pub instances: usize,
    /// Monte-Carlo samples per `d` in the Kahn suite; zero skips sampling.
    pub samples: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { n_max: 20, instances: 50, samples: 0, seed: 20240601 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Lattice => lattice(cfg)?,
        Suite::Eigensolver => eigensolver(cfg)?,
        Suite::Domination => domination(cfg)?,
        Suite::Fem => fem(cfg)?,
        Suite::Kahn => kahn(cfg)?,
        Suite::Bounds => bounds()?,
    };
    Ok(SuiteReport { suite, checks })
}

/// Number of partitions of `n` into at most `d` parts, by dynamic programming
/// over part sizes (conjugation swaps "≤ d parts" with "parts ≤ d").
pub fn partition_count(n: usize, d: usize) -> u64 {
    let mut ways = vec![0u64; n + 1];
    ways[0] = 1;
    for part in 1..=d {
        for k in part..=n {
            ways[k] += ways[k - part];
        }
    }
    ways[n]
}

fn lattice(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let top = cfg.n_max.min(30);
    let mut bad_counts = Vec::new();
    let mut bad_symmetry = 0usize;
    let mut bad_add = 0usize;
    for d in 1..=4 {
        for n in 0..=top {
            let l = LatticeIndex::enumerate(n, d)?;
            if l.len() as u64 != partition_count(n, d) {
                bad_counts.push((n, d));
            }
            for mu in l.diagrams() {
                for nu in mu.shift_neighbors() {
                    if !nu.shift_neighbors().contains(mu) {
                        bad_symmetry += 1;
                    }
                }
                let adds = mu.add_box_set();
                let strict = mu.parts().windows(2).all(|w| w[0] > w[1]);
                if (adds.len() == d) != strict || adds.iter().any(|a| a.boxes() != n + 1) {
                    bad_add += 1;
                }
            }
        }
    }
    let brute = (1..=4).all(|d| (0..=top.min(15)).all(|n| diagrams(n, d).count() as u64 == partition_count(n, d)));
    Ok(vec![
        check("partition counts", bad_counts.is_empty() && brute, format!("n <= {top}, d <= 4, mismatches {bad_counts:?}")),
        check("shift symmetry", bad_symmetry == 0, format!("{bad_symmetry} one-sided pairs")),
        check("full add-box sets", bad_add == 0, format!("{bad_add} diagrams violate |μ+□| = d ⟺ strict rows")),
    ])
}

/// Random sparse symmetric matrix with entries in `[-1, 1)`.
pub fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> SparseSymMatrix {
    let mut t = Vec::new();
    for i in 0..dim {
        t.push((i, i, rng.random_range(-1.0..1.0)));
        for j in i + 1..dim {
            if rng.random_bool(density.min(1.0)) {
                t.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseSymMatrix::from_triplets(dim, t).expect("indices in range")
}

fn eigensolver(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = LanczosOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..cfg.instances {
        let dim = rng.random_range(1..=500);
        let a = random_symmetric(&mut rng, dim, 4.0 / dim as f64);
        let dense = dense_sym_eig(&a, DEFAULT_DENSE_CAP)?;
        let hi = extremal_eig(&a, Which::Largest, &opts)?.value;
        let lo = extremal_eig(&a, Which::Smallest, &opts)?.value;
        worst = worst.max((hi - dense.values[dim - 1]).abs()).max((lo - dense.values[0]).abs());
    }
    Ok(vec![check(
        "sparse vs dense extremes",
        worst <= 1e-9,
        format!("{} instances, dim <= 500, max deviation {worst:.3e}", cfg.instances),
    )])
}

fn domination(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for d in [2usize, 3] {
        let mut failed = Vec::new();
        let mut min_eig = f64::INFINITY;
        for n in 1..=cfg.n_max {
            let r = domination_check(n, d, 1e-10)?;
            if let Some(m) = r.min_eigenvalue {
                min_eig = min_eig.min(m);
            }
            if !r.passed() {
                failed.push(n);
            }
        }
        out.push(check(
            format!("d^2(1 - M_est) - L dominated, d={d}"),
            failed.is_empty(),
            format!("n <= {}, min eigenvalue {min_eig:.3e}, failing n {failed:?}", cfg.n_max),
        ));
    }
    Ok(out)
}

fn fem(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let top = cfg.n_max.clamp(2, 60);
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        for n in 2..=top {
            let g = assemble_generic(&Triangulation::build(n, d)?)?;
            let c = closed_form_pair(n, d)?;
            for (x, y) in [(&g.k, &c.k), (&g.m, &c.m)] {
                let (diff, scale) = x.max_abs_diff(y)?;
                worst = worst.max(diff / scale);
            }
        }
    }
    let mut agree = 0.0f64;
    for (n, d) in [(top, 2usize), (top, 3)] {
        let r = fem_min_eig(n, d, &LanczosOptions::default())?;
        agree = agree.max((r.pencil - r.closed_form).abs() / r.closed_form);
    }
    Ok(vec![
        check("generic vs closed-form K, M", worst <= 1e-12, format!("n <= {top}, max relative deviation {worst:.3e}")),
        check("pencil vs closed-form eigenvalue", agree <= 1e-8, format!("n = {top}, relative deviation {agree:.3e}")),
    ])
}

fn kahn(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut mismatched = Vec::new();
    for d in 2..=DEFAULT_RECURSION_CAP {
        if ratios_recursive(d)? != ratios_closed_form(d)? {
            mismatched.push(d);
        }
    }
    let r2 = ratios_closed_form(2)?;
    let r3 = ratios_closed_form(3)?;
    let anchors = [to_f64(&r2.a), to_f64(&r2.b), to_f64(&r2.c)] == [50.0, 10.0, 40.0]
        && to_f64(&(&r3.b * &r3.d_coefficient)) == 1.0 / 9720.0;
    let h2 = h_upper(2)?;
    let h3 = h_upper(3)?;
    let mut out = vec![
        check(
            "recursion equals closed form",
            mismatched.is_empty(),
            format!("2 <= d <= {DEFAULT_RECURSION_CAP}, mismatches {mismatched:?}"),
        ),
        check("base anchors", anchors, "A2/D2 = 50, B2/D2 = 10, C2/D2 = 40, B3 = √5/9720"),
        check(
            "h_upper(2), h_upper(3)",
            h2 == BigRational::from_integer(10.into()) && h3 == BigRational::new(224.into(), 3.into()),
            format!("{h2}, {h3}"),
        ),
    ];
    if cfg.samples > 0 {
        for d in 2..=6 {
            let mc = mc_oracle(d, cfg.samples, cfg.seed)?;
            let exact = ratios_closed_form(d)?;
            let ok = mc.a.within(to_f64(&exact.a), 3.0)
                && mc.b.within(to_f64(&exact.b), 3.0)
                && mc.c.within(to_f64(&exact.c), 3.0);
            out.push(check(
                format!("Monte-Carlo ratios, d={d}"),
                ok,
                format!(
                    "A/D {:.6} ± {:.2e}, B/D {:.6} ± {:.2e}, C/D {:.6} ± {:.2e}",
                    mc.a.mean, mc.a.std_err, mc.b.mean, mc.b.std_err, mc.c.mean, mc.c.std_err
                ),
            ));
        }
    }
    Ok(out)
}

fn bounds() -> Result<Vec<Check>> {
    let r = bounds_row(10_000)?;
    let want_haah = 3.0 / (2.0 * haah_alpha());
    let want_conj = 12.0 * std::f64::consts::E.powi(3) / std::f64::consts::PI;
    let haah = r.kahn_hi / r.haah_lo;
    let conj = r.kahn_hi / r.conjecture_lo;
    Ok(vec![
        check(
            "kahn/haah at d = 10^4",
            (haah - want_haah).abs() <= 0.01 * want_haah,
            format!("{haah:.6e} vs {want_haah:.6e}"),
        ),
        check(
            "kahn/conjecture at d = 10^4",
            (conj - want_conj).abs() <= 0.01 * want_conj,
            format!("{conj:.6} vs {want_conj:.6}"),
        ),
    ])
}
