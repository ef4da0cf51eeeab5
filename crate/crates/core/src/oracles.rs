//! Ground truth that shares no code path with the closed forms.
//!
//! * [`exact_moment_first_principles`] integrates `|t - y|^a` against two
//!   Gamma densities directly, with exact rationals.
//! * [`mc_moment`] estimates the same moment (for any real exponent) by
//!   simulating both Poisson processes.
//!
//! Sampling uses ChaCha8 addressed by `(seed, stream)`, so every draw is a
//! pure function of its address and results do not depend on thread count.

use num_traits::{Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact_arith::{binomial, factorial, factorial_int, pow_rat, Rat};

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// Two-pass mean and `sd / sqrt(n)` over values in a fixed order.
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("an estimate needs at least two samples"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1.0)).sqrt();
        Ok(Self {
            mean,
            stderr: sd / n.sqrt(),
            samples: values.len() as u64,
            seed,
        })
    }

    /// `(mean - exact) / stderr`.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.mean - exact) / self.stderr
    }

    pub fn within(&self, exact: f64, sigmas: f64) -> bool {
        (self.mean - exact).abs() <= sigmas * self.stderr
    }
}

/// Counter-based stream of uniforms: one ChaCha8 key per seed, one stream per
/// independent sequence.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential gap by inverse CDF, `-ln(1 - U) / rate`. A zero gap
    /// (U = 0) is redrawn so arrival times stay strictly increasing.
    pub fn next_gap(&mut self, rate: f64) -> f64 {
        loop {
            let gap = -(-self.next_uniform()).ln_1p() / rate;
            if gap > 0.0 {
                return gap;
            }
        }
    }

    /// Time of the `n`-th arrival, summing gaps in the same order as
    /// [`sample_arrivals`].
    pub fn nth_arrival(&mut self, n: u64, rate: f64) -> f64 {
        let mut t = 0.0;
        for _ in 0..n {
            t += self.next_gap(rate);
        }
        t
    }
}

/// Arrival times `X_1 < X_2 < ... < X_n` of a Poisson process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalSequence {
    times: Vec<f64>,
    rate: f64,
}

impl ArrivalSequence {
    pub fn new(times: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("rate must be positive and finite, got {rate}")));
        }
        if times.first().is_some_and(|&t| !(t > 0.0)) {
            return Err(invalid("arrival times must be positive"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("arrival times must be strictly increasing"));
        }
        Ok(Self { times, rate })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Gaps `X_i - X_{i-1}` with `X_0 = 0`.
    pub fn gaps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let g = t - prev;
                prev = t;
                g
            })
            .collect()
    }
}

/// First `n` arrivals of a rate-`lambda` Poisson process, drawn from
/// `(seed, stream)`.
pub fn sample_arrivals(n: usize, lambda: f64, seed: u64, stream: u64) -> Result<ArrivalSequence> {
    if n == 0 {
        return Err(invalid("need at least one arrival"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("rate must be positive and finite, got {lambda}")));
    }
    let mut rng = StreamRng::new(seed, stream);
    let mut t = 0.0;
    let times = (0..n)
        .map(|_| {
            t += rng.next_gap(lambda);
            t
        })
        .collect();
    ArrivalSequence::new(times, lambda)
}

/// Evaluates `f(m)` for `m in 0..samples` in parallel and reduces in index
/// order.
pub fn mc_estimate<F>(samples: u64, seed: u64, f: F) -> Result<MCEstimate>
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    if samples < 2 {
        return Err(invalid("samples must be >= 2"));
    }
    let values: Vec<f64> = (0..samples).into_par_iter().map(f).collect();
    MCEstimate::from_values(&values, seed)
}

/// Monte Carlo estimate of `E|X_{k+r} - Y_k|^b` for real `b > 0`. Pair `m`
/// draws `X` from stream `2m` and `Y` from stream `2m + 1`.
pub fn mc_moment(k: u64, r: u64, b: f64, lambda: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("exponent must be positive, got {b}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("rate must be positive and finite, got {lambda}")));
    }
    mc_estimate(samples, seed, |m| {
        let x = StreamRng::new(seed, 2 * m).nth_arrival(k + r, lambda);
        let y = StreamRng::new(seed, 2 * m + 1).nth_arrival(k, lambda);
        (x - y).abs().powf(b)
    })
}

/// A function of `y` of the form `sum_p plain[p] y^p + e^{-lambda y} sum_p damped[p] y^p`.
#[derive(Debug, Default)]
struct ExpPoly {
    plain: Vec<Rat>,
    damped: Vec<Rat>,
}

impl ExpPoly {
    fn add(coeffs: &mut Vec<Rat>, power: usize, c: Rat) {
        if coeffs.len() <= power {
            coeffs.resize(power + 1, Rat::zero());
        }
        coeffs[power] += c;
    }
}

/// Exact `E|X_i - Y_k|^a` for `X_i ~ Gamma(i, lambda)`, `Y_k ~ Gamma(k, lambda)`
/// independent, by direct integration.
///
/// The inner expectation over `X_i` at fixed `y` is expanded binomially; for
/// odd `a` the absolute value is handled as the full-line integral minus twice
/// the integral over `[0, y]`, and the truncated Gamma moments are written
/// with the finite incomplete-Gamma series. That leaves a sum of `y^p` and
/// `y^p e^{-lambda y}` terms, each of which integrates against the density of
/// `Y_k` to a ratio of factorials.
pub fn exact_moment_first_principles(i: u64, k: u64, a: u64, lambda: &Rat) -> Result<Rat> {
    if i == 0 || k == 0 || a == 0 {
        return Err(invalid("need i, k, a >= 1"));
    }
    if !lambda.is_positive() {
        return Err(invalid("rate must be positive"));
    }
    let fact = |n: u64| Rat::from_integer(factorial_int(n));

    // E[X_i^j] = (i+j-1)! / ((i-1)! lambda^j)
    let raw_moment = |j: u64| fact(i + j - 1) / fact(i - 1) / pow_rat(lambda, j as i64);

    let mut inner = ExpPoly::default();
    for j in 0..=a {
        let sign = if (a - j) % 2 == 0 { 1 } else { -1 };
        let c = binomial(a, j as i64) * raw_moment(j) * Rat::from_integer(sign.into());
        let p = (a - j) as usize;
        ExpPoly::add(&mut inner.plain, p, c.clone());
        if a % 2 == 1 {
            // -2 * c * y^{a-j} * (1 - e^{-lambda y} sum_{l < i+j} (lambda y)^l / l!)
            ExpPoly::add(&mut inner.plain, p, -Rat::from_integer(2.into()) * &c);
            for l in 0..i + j {
                let d = Rat::from_integer(2.into()) * &c * pow_rat(lambda, l as i64) / factorial(l);
                ExpPoly::add(&mut inner.damped, p + l as usize, d);
            }
        }
    }

    // Integrals against f_{k, lambda}(y) = lambda^k y^{k-1} e^{-lambda y} / (k-1)!
    let two_lambda = Rat::from_integer(2.into()) * lambda;
    let mut total = Rat::zero();
    for (p, c) in inner.plain.iter().enumerate() {
        let p = p as u64;
        total += c * fact(k + p - 1) / fact(k - 1) / pow_rat(lambda, p as i64);
    }
    for (p, c) in inner.damped.iter().enumerate() {
        let p = p as u64;
        total += c * pow_rat(lambda, k as i64) * fact(p + k - 1)
            / fact(k - 1)
            / pow_rat(&two_lambda, (p + k) as i64);
    }
    Ok(total)
}
