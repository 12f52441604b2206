//! `uest`: batch front end for the unitary-estimation computations.

mod render;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use uest_core::asymptotics::{bounds_table, extrapolate, sweep, sweep_options, FitModel, SweepSeries};
use uest_core::dirichlet_graph::{domination_check, BoundaryGraph};
use uest_core::estimation::fidelity;
use uest_core::fem_simplex::{continuous_reference, fem_min_eig, Triangulation};
use uest_core::kahn_bound::{format_rational, h_upper, mc_oracle, ratios_closed_form, to_f64, McRatios};
use uest_core::spectral::DEFAULT_TOL;
use uest_core::verify::{self, Suite, VerifyConfig};

use render::{csv_line, g15, json, opt};

#[derive(Parser)]
#[command(name = "uest", version, about = "Optimal unitary-estimation fidelity on the Young lattice")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "UEST_THREADS", default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write results here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Largest eigenvalue of M_est and h = n²(1 − F).
    Fidelity(Single),
    /// h_{n,d} over a range of n, with bounds and an extrapolated limit.
    Sweep(SweepArgs),
    /// Lowest eigenvalue of the P1 finite-element pencil on the lattice mesh.
    Fem(FemArgs),
    /// Dirichlet Laplacian of the boundary graph.
    Graph(GraphArgs),
    /// Exact ratios of Kahn's test function and the resulting bound on h(d).
    Kahn(KahnArgs),
    /// Table of known bounds on h(d).
    Bounds(BoundsArgs),
    /// Run self-check suites and print one line per check.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Single {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    d: u32,
    /// Relative residual tolerance of the eigensolver.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive)]
    tol: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    d: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n_min: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n_max: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    step: u32,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Fit::Quadratic)]
    fit: Fit,
    /// Smallest n used by the fit.
    #[arg(long)]
    fit_min: Option<u32>,
    /// Largest n used by the fit.
    #[arg(long)]
    fit_max: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fit {
    Linear,
    Quadratic,
}

#[derive(Args)]
struct FemArgs {
    #[command(flatten)]
    single: Single,
    /// Also write the mesh to this file.
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    single: Single,
    /// Also check L ≤ d²(1 − M_est) entrywise and, for small sizes, by eigenvalues.
    #[arg(long)]
    domination: bool,
    /// Also write the edge list to this file.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct KahnArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    d: u32,
    /// Compare the ratios with a Monte-Carlo estimate.
    #[arg(long)]
    verify_mc: bool,
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(10_000..))]
    samples: u64,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u32).range(2..))]
    d: Vec<u32>,
}

#[derive(Args)]
struct VerifyArgs {
    /// A suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    n_max: u32,
    #[arg(long, default_value_t = 50)]
    instances: usize,
    /// Monte-Carlo samples per d in the kahn suite; 0 skips sampling.
    #[arg(long, default_value_t = 0)]
    samples: u64,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err("must be a positive finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Outcome of a command that produced output but should still exit nonzero.
#[derive(Debug)]
struct Failed;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = validate(&cli) {
        Cli::command().error(ErrorKind::ValueValidation, msg).exit();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Cross-flag checks clap cannot express, run before any computation.
fn validate(cli: &Cli) -> std::result::Result<(), String> {
    match &cli.command {
        Command::Sweep(s) if s.n_max < s.n_min => {
            Err(format!("--n-max ({}) is below --n-min ({})", s.n_max, s.n_min))
        }
        Command::Sweep(s) => match (s.fit_min, s.fit_max) {
            (Some(lo), Some(hi)) if hi < lo => Err(format!("--fit-max ({hi}) is below --fit-min ({lo})")),
            _ => Ok(()),
        },
        Command::Verify(v) => parse_suites(&v.suite).map(|_| ()).map_err(|e| e.to_string()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<bool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("configuring the thread pool")?;

    let mut out: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let fmt = cli.format;
    let result = match cli.command {
        Command::Fidelity(a) => cmd_fidelity(&mut out, fmt, &a),
        Command::Sweep(a) => cmd_sweep(&mut out, fmt, &a),
        Command::Fem(a) => cmd_fem(&mut out, fmt, &a),
        Command::Graph(a) => cmd_graph(&mut out, fmt, &a),
        Command::Kahn(a) => cmd_kahn(&mut out, fmt, &a),
        Command::Bounds(a) => cmd_bounds(&mut out, fmt, &a),
        Command::Verify(a) => cmd_verify(&mut out, fmt, &a),
    };
    out.flush()?;
    match result {
        Ok(()) => Ok(true),
        Err(e) if e.is::<Failed>() => Ok(false),
        Err(e) => Err(e),
    }
}

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("one or more results failed")
    }
}

impl std::error::Error for Failed {}

fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    if s == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    s.split(',').map(|x| x.trim().parse::<Suite>().map_err(Into::into)).collect()
}

type Out<'a> = &'a mut dyn Write;

fn cmd_fidelity(out: Out, fmt: Format, a: &Single) -> Result<()> {
    let r = fidelity(a.n as usize, a.d as usize, &sweep_options(a.tol))?;
    match fmt {
        Format::Json => json(out, &r),
        Format::Csv => {
            csv_line(out, &strings(&["n", "d", "dim", "f_est", "h_nd", "residual"]))?;
            csv_line(
                out,
                &[r.n.to_string(), r.d.to_string(), r.dim.to_string(), g15(r.f_est), g15(r.h_nd), g15(r.residual)],
            )
        }
    }
}

fn cmd_sweep(out: Out, fmt: Format, a: &SweepArgs) -> Result<()> {
    let d = a.d as usize;
    let ns: Vec<usize> = (a.n_min..=a.n_max).step_by(a.step as usize).map(|n| n as usize).collect();
    let series = sweep(d, &ns, &sweep_options(a.tol));
    if !series.has_sandwich() {
        eprintln!(
            "warning: d={d} has no boundary graph; lambda_graph and sandwich_lower are left empty"
        );
    }
    let model = match a.fit {
        Fit::Linear => FitModel::Linear,
        Fit::Quadratic => FitModel::Quadratic,
    };
    let window = match (a.fit_min, a.fit_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(0) as usize, hi.map_or(usize::MAX, |x| x as usize))),
    };
    let fit = extrapolate(&series.points(), window, model);

    match fmt {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                series: &'a SweepSeries,
                extrapolation: Option<uest_core::asymptotics::Extrapolation>,
                extrapolation_error: Option<String>,
            }
            let (ex, err) = match fit {
                Ok(x) => (Some(x), None),
                Err(e) => (None, Some(e.to_string())),
            };
            json(out, &Doc { series: &series, extrapolation: ex, extrapolation_error: err })?;
        }
        Format::Csv => {
            csv_line(
                out,
                &strings(&[
                    "n", "d", "dim", "f_est", "h_nd", "lambda_graph", "sandwich_lower", "variational_upper",
                ]),
            )?;
            let mut rows = series.rows.iter().peekable();
            let mut fails = series.failures.iter().peekable();
            loop {
                let take_row = match (rows.peek(), fails.peek()) {
                    (Some(r), Some(f)) => r.n < f.n,
                    (Some(_), None) => true,
                    (None, Some(_)) => false,
                    (None, None) => break,
                };
                if take_row {
                    let r = rows.next().expect("peeked");
                    csv_line(
                        out,
                        &[
                            r.n.to_string(),
                            r.d.to_string(),
                            r.dim.to_string(),
                            g15(r.f_est),
                            g15(r.h_nd),
                            opt(r.lambda_graph),
                            opt(r.sandwich_lower),
                            opt(r.variational_upper),
                        ],
                    )?;
                } else {
                    let f = fails.next().expect("peeked");
                    writeln!(out, "# failed n={}: {}", f.n, f.message)?;
                }
            }
            match &fit {
                Ok(x) => {
                    let spread = x.spread.map(|s| format!(" +/- {}", g15(s))).unwrap_or_default();
                    writeln!(
                        out,
                        "# h_inf = {}{} ({} fit over {} points)",
                        g15(x.limit),
                        spread,
                        model_name(x.model),
                        x.points
                    )?;
                }
                Err(e) => writeln!(out, "# h_inf unavailable: {e}")?,
            }
        }
    }
    for f in &series.failures {
        eprintln!("error: n={}: {}", f.n, f.message);
    }
    if series.failures.is_empty() {
        Ok(())
    } else {
        Err(Failed.into())
    }
}

fn model_name(m: FitModel) -> &'static str {
    match m {
        FitModel::Linear => "linear",
        FitModel::Quadratic => "quadratic",
    }
}

fn cmd_fem(out: Out, fmt: Format, a: &FemArgs) -> Result<()> {
    let (n, d) = (a.single.n as usize, a.single.d as usize);
    let reference = continuous_reference(d)?;
    if let Some(path) = &a.mesh {
        let t = Triangulation::build(n, d)?;
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        t.write_mesh(BufWriter::new(f))?;
    }
    let r = fem_min_eig(n, d, &sweep_options(a.single.tol))?;
    let rel = (r.pencil - reference) / reference;
    match fmt {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                fem: &'a uest_core::fem_simplex::FemEig,
                continuum: f64,
                relative_error: f64,
            }
            json(out, &Doc { fem: &r, continuum: reference, relative_error: rel })
        }
        Format::Csv => {
            csv_line(
                out,
                &strings(&[
                    "n", "d", "dim", "pencil", "closed_form", "lambda_graph", "continuum", "relative_error",
                ]),
            )?;
            csv_line(
                out,
                &[
                    r.n.to_string(),
                    r.d.to_string(),
                    r.dim.to_string(),
                    g15(r.pencil),
                    g15(r.closed_form),
                    g15(r.lambda_graph),
                    g15(reference),
                    g15(rel),
                ],
            )
        }
    }
}

fn cmd_graph(out: Out, fmt: Format, a: &GraphArgs) -> Result<()> {
    let (n, d) = (a.single.n as usize, a.single.d as usize);
    let g = BoundaryGraph::build(n, d)?;
    if let Some(path) = &a.edges {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        g.write_edges(BufWriter::new(f))?;
    }
    let eig = g.dirichlet_laplacian().min_eig(&sweep_options(a.single.tol))?;
    let scaled = (n * n) as f64 * eig.value / (d * d) as f64;
    let dom = if a.domination { Some(domination_check(n, d, 1e-10)?) } else { None };

    #[derive(Serialize)]
    struct Doc<'a> {
        n: usize,
        d: usize,
        interior: usize,
        boundary: usize,
        edges: usize,
        lambda_min: f64,
        sandwich_lower: f64,
        residual: f64,
        domination: Option<&'a uest_core::dirichlet_graph::DominationReport>,
    }
    let doc = Doc {
        n,
        d,
        interior: g.interior_count(),
        boundary: g.boundary_count(),
        edges: g.edges().len(),
        lambda_min: eig.value,
        sandwich_lower: scaled,
        residual: eig.residual,
        domination: dom.as_ref(),
    };
    match fmt {
        Format::Json => json(out, &doc)?,
        Format::Csv => {
            let mut head = strings(&[
                "n", "d", "interior", "boundary", "edges", "lambda_min", "sandwich_lower", "residual",
            ]);
            let mut row = vec![
                n.to_string(),
                d.to_string(),
                doc.interior.to_string(),
                doc.boundary.to_string(),
                doc.edges.to_string(),
                g15(doc.lambda_min),
                g15(doc.sandwich_lower),
                g15(doc.residual),
            ];
            if let Some(r) = &dom {
                head.extend(strings(&["domination_min_eigenvalue", "domination_violations"]));
                row.extend([opt(r.min_eigenvalue), r.violations.len().to_string()]);
            }
            csv_line(out, &head)?;
            csv_line(out, &row)?;
        }
    }
    match dom {
        Some(r) if !r.passed() => {
            eprintln!("error: domination fails with {} violations", r.violations.len());
            Err(Failed.into())
        }
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct Rational {
    exact: String,
    decimal: f64,
}

impl Rational {
    fn new(x: &num_rational::BigRational) -> Self {
        Self { exact: format_rational(x), decimal: to_f64(x) }
    }
}

fn cmd_kahn(out: Out, fmt: Format, a: &KahnArgs) -> Result<()> {
    let d = a.d as usize;
    let ratios = ratios_closed_form(d)?;
    let h = h_upper(d)?;
    let mc = if a.verify_mc { Some(mc_oracle(d, a.samples, a.seed)?) } else { None };
    let passed = mc.as_ref().is_none_or(|m| mc_agrees(m, &ratios));

    let entries = [
        ("a_over_d", Rational::new(&ratios.a)),
        ("b_over_d", Rational::new(&ratios.b)),
        ("c_over_d", Rational::new(&ratios.c)),
        ("rayleigh", Rational::new(&ratios.rayleigh())),
        ("h_upper", Rational::new(&h)),
    ];
    match fmt {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                d: usize,
                a_over_d: &'a Rational,
                b_over_d: &'a Rational,
                c_over_d: &'a Rational,
                rayleigh: &'a Rational,
                h_upper: &'a Rational,
                monte_carlo: Option<&'a McRatios>,
                monte_carlo_agrees: Option<bool>,
            }
            json(
                out,
                &Doc {
                    d,
                    a_over_d: &entries[0].1,
                    b_over_d: &entries[1].1,
                    c_over_d: &entries[2].1,
                    rayleigh: &entries[3].1,
                    h_upper: &entries[4].1,
                    monte_carlo: mc.as_ref(),
                    monte_carlo_agrees: mc.as_ref().map(|_| passed),
                },
            )?;
        }
        Format::Csv => {
            csv_line(out, &strings(&["quantity", "exact", "decimal", "mc_mean", "mc_std_err"]))?;
            let est = mc.as_ref().map(|m| [Some(m.a), Some(m.b), Some(m.c), None, None]);
            for (k, (name, r)) in entries.iter().enumerate() {
                let e = est.and_then(|e| e[k]);
                csv_line(
                    out,
                    &[
                        name.to_string(),
                        r.exact.clone(),
                        g15(r.decimal),
                        opt(e.map(|e| e.mean)),
                        opt(e.map(|e| e.std_err)),
                    ],
                )?;
            }
        }
    }
    if passed {
        Ok(())
    } else {
        eprintln!("error: Monte-Carlo estimate differs from the exact ratios by more than 3 standard errors");
        Err(Failed.into())
    }
}

fn mc_agrees(m: &McRatios, exact: &uest_core::kahn_bound::KahnRatios) -> bool {
    m.a.within(to_f64(&exact.a), 3.0) && m.b.within(to_f64(&exact.b), 3.0) && m.c.within(to_f64(&exact.c), 3.0)
}

fn cmd_bounds(out: Out, fmt: Format, a: &BoundsArgs) -> Result<()> {
    let ds: Vec<usize> = a.d.iter().map(|&d| d as usize).collect();
    let table = bounds_table(&ds)?;
    match fmt {
        Format::Json => json(out, &table),
        Format::Csv => {
            csv_line(
                out,
                &strings(&[
                    "d", "christandl_lo", "christandl_hi", "yang_hi", "haah_lo", "kahn_hi", "conjecture_lo", "exact",
                ]),
            )?;
            for r in &table {
                csv_line(
                    out,
                    &[
                        r.d.to_string(),
                        g15(r.christandl_lo),
                        g15(r.christandl_hi),
                        g15(r.yang_hi),
                        g15(r.haah_lo),
                        g15(r.kahn_hi),
                        g15(r.conjecture_lo),
                        opt(r.exact),
                    ],
                )?;
            }
            Ok(())
        }
    }
}

fn cmd_verify(out: Out, fmt: Format, a: &VerifyArgs) -> Result<()> {
    let suites = parse_suites(&a.suite)?;
    let cfg = VerifyConfig {
        n_max: a.n_max as usize,
        instances: a.instances,
        samples: a.samples,
        seed: a.seed,
    };
    let reports = suites.iter().map(|&s| verify::run(s, &cfg)).collect::<uest_core::Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed());
    match fmt {
        Format::Json => json(out, &reports)?,
        Format::Csv => {
            for r in &reports {
                for c in &r.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    writeln!(out, "{tag} {}: {} ({})", r.suite, c.name, c.detail)?;
                }
            }
            let total: usize = reports.iter().map(|r| r.checks.len()).sum();
            let failed: usize = reports.iter().map(|r| r.checks.iter().filter(|c| !c.passed).count()).sum();
            writeln!(out, "{} of {} checks passed", total - failed, total)?;
        }
    }
    if passed {
        Ok(())
    } else {
        Err(Failed.into())
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}
