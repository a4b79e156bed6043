//! Classical ground truth for the quantum search (activation, brute-force
//! separator enumeration, random-search baseline) and the unit-ball band
//! probability analytics used to compare uniform and Gaussian sampling.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracle::Dataset;
use crate::qft_arith::FixedPointSpec;

/// Margin band query: the probability that a uniformly sampled direction lands
/// within distance `gamma` of a fixed hyperplane through the unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandQuery {
    pub gamma: f64,
    pub dimension: usize,
}

impl BandQuery {
    pub fn new(gamma: f64, dimension: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Structural(format!("gamma {gamma} outside (0, 1]")));
        }
        if dimension == 0 {
            return Err(Error::Structural("dimension must be >= 1".into()));
        }
        Ok(Self { gamma, dimension })
    }
}

/// Perceptron activation: +1 when w.x >= 0, else -1. Ties count as +1.
pub fn activation(w: &[i64], x: &[i64]) -> Result<i64> {
    if w.len() != x.len() {
        return Err(Error::Structural(format!(
            "dimension mismatch: {} vs {}",
            w.len(),
            x.len()
        )));
    }
    let dot: i64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
    Ok(if dot >= 0 { 1 } else { -1 })
}

/// True iff `w` classifies every sample correctly, i.e. activation(w, x_k)
/// equals the label y_k for all k (vacuously true when empty). Because the
/// activation sends ties to +1, a boundary sample w.x = 0 is only correct
/// when its label is +1; in merged form w.x̃ = y(w.x) this reads "w.x̃ > 0,
/// or w.x̃ = 0 with y = +1".
pub fn separates(w: &[i64], dataset: &Dataset) -> bool {
    dataset
        .samples
        .iter()
        .all(|s| activation(w, &s.x).map_or(false, |v| v == s.y))
}

/// Enumerate every weight code (including the +0/-0 duplicates) whose decoded
/// vector separates the dataset. Reference set for the quantum oracle.
pub fn brute_force_separators(dataset: &Dataset, spec: &FixedPointSpec) -> Result<BTreeSet<u64>> {
    let bits = dataset.features * spec.code_bits();
    if bits > 24 {
        return Err(Error::Capacity(format!(
            "{bits} weight bits exceed the 24-bit enumeration cap"
        )));
    }
    let mut out = BTreeSet::new();
    for code in 0..1u64 << bits {
        let w = spec.decode_vector(code, dataset.features);
        if separates(&w, dataset) {
            out.insert(code);
        }
    }
    Ok(out)
}

const SEARCH_BUDGET: u64 = 1_000_000;

/// Uniform random code search: draw codes until one separates, counting
/// full-dataset evaluations. Expectation is N/k draws.
pub fn classical_search(dataset: &Dataset, spec: &FixedPointSpec, seed: u64) -> Result<u64> {
    let bits = dataset.features * spec.code_bits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queries = 0u64;
    loop {
        let code = rng.gen_range(0..1u64 << bits);
        queries += 1;
        if separates(&spec.decode_vector(code, dataset.features), dataset) {
            return Ok(queries);
        }
        if queries >= SEARCH_BUDGET {
            return Err(Error::Budget(queries));
        }
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// P(-gamma < Z < gamma) for a uniform draw from the unit n-ball, computed by
/// adaptive quadrature of (1 - z^2)^((n-1)/2) to 1e-10 absolute tolerance.
pub fn band_probability_uniform(q: &BandQuery) -> Result<f64> {
    let expo = (q.dimension as f64 - 1.0) / 2.0;
    let f = move |z: f64| (1.0 - z * z).max(0.0).powf(expo);
    let num = adaptive_simpson(&f, 0.0, q.gamma, 1e-10);
    let den = adaptive_simpson(&f, 0.0, 1.0, 1e-10);
    Ok((num / den).clamp(0.0, 1.0))
}

fn binomial(k: u64, m: u64) -> f64 {
    // k choose m in f64; k stays tiny here
    (1..=m).map(|i| (k - m + i) as f64 / i as f64).product()
}

/// Closed form for odd dimension n = 2k + 1: the binomial expansion of
/// (1 - z^2)^k integrated term by term, normalized to reach 1 at gamma = 1.
pub fn band_probability_uniform_odd(gamma: f64, k: u64) -> f64 {
    let series = |g: f64| -> f64 {
        (0..=k)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * binomial(k, m) / (2 * m + 1) as f64 * g.powi(2 * m as i32 + 1)
            })
            .sum()
    };
    series(gamma) / series(1.0)
}

/// P(|Z| < gamma) for a standard normal Z: erf(gamma / sqrt(2)). For
/// unit-norm data and spherical Gaussian weights the margin variable is
/// standard normal in every dimension.
pub fn band_probability_gaussian(gamma: f64) -> f64 {
    statrs::function::erf::erf(gamma / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo validation of the band probability: draw w uniformly from the
/// unit n-ball (Gaussian direction scaled by U^(1/n)) and count hits of
/// |w . e_1| < gamma.
pub fn monte_carlo_band(q: &BandQuery, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 1_000 {
        return Err(Error::Structural("need at least 1000 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = q.dimension;
    let mut hits = 0u64;
    for _ in 0..samples {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radius = rng.gen_range(0.0f64..1.0).powf(1.0 / n as f64);
        let w1 = g[0] / norm * radius;
        if w1.abs() < q.gamma {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ComparisonRow {
    pub gamma: f64,
    pub dimension: usize,
    pub p_uniform: f64,
    pub p_gaussian: f64,
    pub delta: f64,
}

/// Uniform-vs-Gaussian band probabilities over a (gamma, dimension) grid.
pub fn comparison_table(gammas: &[f64], dims: &[usize]) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(gammas.len() * dims.len());
    for &gamma in gammas {
        for &dimension in dims {
            let q = BandQuery::new(gamma, dimension)?;
            let p_uniform = band_probability_uniform(&q)?;
            let p_gaussian = band_probability_gaussian(gamma);
            rows.push(ComparisonRow {
                gamma,
                dimension,
                p_uniform,
                p_gaussian,
                delta: p_uniform - p_gaussian,
            });
        }
    }
    Ok(rows)
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("gamma,n,p_uniform,p_gaussian,delta\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12},{:.12},{:.12}\n",
            r.gamma, r.dimension, r.p_uniform, r.p_gaussian, r.delta
        ));
    }
    out
}
