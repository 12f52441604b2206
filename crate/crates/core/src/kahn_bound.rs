//! Kahn's polynomial test function and the exact upper bound it gives on `h(d)`.
//!
//! The Rayleigh quotient reduces to four integrals over
//! `S_{d−1} = {y ≥ 0, Σ i·y_i = 1}`:
//!
//! ```text
//! A_d = ∫ Σ_i y_{i}²          B_d = ∫ Σ_{i≥2} y_{i−1} y_{i}
//! C_d = ∫ y_{d}²              D_d = ∫ Π_i y_i²
//! ```
//!
//! where `y_{i} = Π_{j≠i} y_j`. Under the Euclidean surface measure of the
//! embedded simplex every one of them is a rational multiple of `√5`
//! (e.g. `D_2 = √5/240`); only the rational coefficient is stored. Everything
//! that feeds the bound is a ratio, so the measure convention drops out.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Highest `d` the recursion is evaluated to unless asked otherwise.
pub const DEFAULT_RECURSION_CAP: usize = 50;

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("d must be at least 2, got {d}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KahnRatios {
    pub d: usize,
    /// `A_d / D_d`.
    pub a: BigRational,
    /// `B_d / D_d`.
    pub b: BigRational,
    /// `C_d / D_d`.
    pub c: BigRational,
    /// `D_d / √5`.
    pub d_coefficient: BigRational,
}

impl KahnRatios {
    /// `R(u) = (2d(A − B) − (d+1)C) / (d·D)`.
    pub fn rayleigh(&self) -> BigRational {
        let d = int(self.d as i64);
        (int(2) * &d * (&self.a - &self.b) - (&d + int(1)) * &self.c) / d
    }
}

/// `D_d / √5 = 2^d / ((d!)³ (3d−1)!)`.
pub fn d_coefficient(d: usize) -> BigRational {
    let fact = |m: usize| (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let num = BigInt::one() << d;
    let f = fact(d);
    BigRational::new(num, &f * &f * &f * fact(3 * d - 1))
}

pub fn ratios_closed_form(d: usize) -> Result<KahnRatios> {
    check_d(d)?;
    let k = d as i64;
    let common = (3 * k - 1) * (3 * k - 2);
    Ok(KahnRatios {
        d,
        a: frac(k * (k + 1) * (2 * k + 1) * common, 12),
        b: frac(k * (k - 1) * (k + 1) * common, 12),
        c: frac(k * k * common, 2),
        d_coefficient: d_coefficient(d),
    })
}

/// Absolute values (coefficients of `√5`) of `A_d, B_d, C_d, D_d`.
#[derive(Clone, Debug)]
struct Integrals {
    a: BigRational,
    b: BigRational,
    c: BigRational,
    d: BigRational,
}

/// Runs the dimension recursions up from the `d = 2` values (and `B_3`).
pub fn ratios_recursive(d: usize) -> Result<KahnRatios> {
    ratios_recursive_capped(d, DEFAULT_RECURSION_CAP)
}

pub fn ratios_recursive_capped(d: usize, cap: usize) -> Result<KahnRatios> {
    check_d(d)?;
    if d > cap {
        return Err(Error::RecursionCap { d, cap });
    }
    let mut table: Vec<Integrals> = Vec::with_capacity(d + 1);
    for k in 2..=d {
        let next = if k == 2 {
            Integrals { a: frac(5, 24), b: frac(1, 24), c: frac(1, 6), d: frac(1, 240) }
        } else {
            let prev = &table[k - 3];
            let m = k as i64;
            let step = frac(2, m * m * m * (3 * m - 5) * (3 * m - 4) * (3 * m - 3));
            let dk = frac(2, m * m * m * (3 * m - 3) * (3 * m - 2) * (3 * m - 1)) * &prev.d;
            let ck = &prev.d / int(m * (3 * m - 3));
            let ak = &step * &prev.a + &ck;
            let bk = if k == 3 {
                frac(1, 9720)
            } else {
                let dm2 = &table[k - 4].d;
                let den = m * m * (m - 1) * (m - 1) * (3 * m - 6) * (3 * m - 5) * (3 * m - 4) * (3 * m - 3);
                &step * &prev.b + dm2 / int(den)
            };
            Integrals { a: ak, b: bk, c: ck, d: dk }
        };
        table.push(next);
    }
    let last = table.pop().expect("d >= 2");
    Ok(KahnRatios {
        d,
        a: &last.a / &last.d,
        b: &last.b / &last.d,
        c: &last.c / &last.d,
        d_coefficient: last.d,
    })
}

/// `R(u)` for Kahn's test function.
pub fn rayleigh_kahn(d: usize) -> Result<BigRational> {
    Ok(ratios_closed_form(d)?.rayleigh())
}

/// `(d+1)(d−1)(3d−2)(3d−1)/6`, the bound `h(d) ≤ R(u)/d`.
pub fn h_upper(d: usize) -> Result<BigRational> {
    check_d(d)?;
    let k = BigInt::from(d);
    let one = BigInt::one();
    let num = (&k + &one) * (&k - &one) * (BigInt::from(3) * &k - 2) * (BigInt::from(3) * &k - &one);
    Ok(BigRational::new(num, BigInt::from(6)))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `u(x) = x_d Π (x_i − x_{i+1})` via `y_i = x_i − x_{i+1}`, `y_d = x_d`.
pub fn kahn_gradient(x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let y: Vec<f64> = (0..d).map(|i| if i + 1 < d { x[i] - x[i + 1] } else { x[i] }).collect();
    let yc = complementary_products(&y);
    (0..d).map(|i| if i == 0 { yc[0] } else { yc[i] - yc[i - 1] }).collect()
}

/// `y_{i} = Π_{j≠i} y_j` without division.
fn complementary_products(y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let mut out = vec![1.0; d];
    let mut acc = 1.0;
    for i in 0..d {
        out[i] = acc;
        acc *= y[i];
    }
    acc = 1.0;
    for i in (0..d).rev() {
        out[i] *= acc;
        acc *= y[i];
    }
    out
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// `|mean − exact| ≤ k·σ`.
    pub fn within(&self, exact: f64, k: f64) -> bool {
        (self.mean - exact).abs() <= k * self.std_err
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McRatios {
    pub d: usize,
    pub samples: u64,
    pub seed: u64,
    pub a: Estimate,
    pub b: Estimate,
    pub c: Estimate,
}

const BATCH: u64 = 1 << 16;

/// Power sums of `(f_A, f_B, f_C, f_D)` over one batch.
#[derive(Clone, Copy, Default)]
struct Sums {
    f: [f64; 4],
    /// `Σ f_X f_D` for X = A, B, C, D.
    fd: [f64; 4],
    /// `Σ f_X²` for X = A, B, C.
    ff: [f64; 3],
}

impl Sums {
    fn add(&mut self, o: &Sums) {
        for k in 0..4 {
            self.f[k] += o.f[k];
            self.fd[k] += o.fd[k];
        }
        for k in 0..3 {
            self.ff[k] += o.ff[k];
        }
    }
}

fn mc_batch(d: usize, seed: u64, batch: u64, count: u64) -> Sums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut s = Sums::default();
    let mut y = vec![0.0; d];
    for _ in 0..count {
        // uniform on the standard simplex, then y_i = s_i / i keeps uniformity
        // on {Σ i·y_i = 1} up to a constant Jacobian
        let mut total = 0.0;
        for v in y.iter_mut() {
            *v = Exp1.sample(&mut rng);
            total += *v;
        }
        for (i, v) in y.iter_mut().enumerate() {
            *v /= total * (i + 1) as f64;
        }
        let yc = complementary_products(&y);
        let fa: f64 = yc.iter().map(|v| v * v).sum();
        let fb: f64 = yc.windows(2).map(|w| w[0] * w[1]).sum();
        let fc = yc[d - 1] * yc[d - 1];
        let p: f64 = y.iter().product();
        let fd = p * p;
        let f = [fa, fb, fc, fd];
        for (k, &v) in f.iter().enumerate() {
            s.f[k] += v;
            s.fd[k] += v * fd;
            if k < 3 {
                s.ff[k] += v * v;
            }
        }
    }
    s
}

/// Monte-Carlo estimates of `A/D`, `B/D`, `C/D` with delta-method standard
/// errors. Batches draw from independent ChaCha streams of `seed` and are
/// reduced in batch order, so the output depends only on `(d, samples, seed)`.
pub fn mc_oracle(d: usize, samples: u64, seed: u64) -> Result<McRatios> {
    check_d(d)?;
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!("need at least 10000 samples, got {samples}")));
    }
    let batches = samples.div_ceil(BATCH);
    let parts: Vec<Sums> = (0..batches)
        .into_par_iter()
        .map(|b| mc_batch(d, seed, b, BATCH.min(samples - b * BATCH)))
        .collect();
    let mut s = Sums::default();
    for p in &parts {
        s.add(p);
    }
    let n = samples as f64;
    let md = s.f[3] / n;
    let ed2 = s.fd[3] / n;
    let est = |k: usize| {
        let mx = s.f[k] / n;
        let r = mx / md;
        // Var(f_X − r f_D) / (n · E[f_D]²)
        let var = s.ff[k] / n - 2.0 * r * s.fd[k] / n + r * r * ed2 - (mx - r * md).powi(2);
        Estimate { mean: r, std_err: (var.max(0.0) / n).sqrt() / md }
    };
    Ok(McRatios { d, samples, seed, a: est(0), b: est(1), c: est(2) })
}
