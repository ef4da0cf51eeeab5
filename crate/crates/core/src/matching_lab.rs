//! Bicolored matching on a line: `n` points of one Poisson sample matched to
//! `n` points of an independent sample, with cost `sum |X_k - Y_k|^b`.
//!
//! With the rate coupled to the point count (`lambda = n`) the expected cost
//! scales like `n^{1 - b/2}`; [`scaling_experiment`] measures that exponent.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::closed_forms::sum_moments;
use crate::error::{invalid, Error, Result};
use crate::exact_arith::{rat, Rat};
use crate::oracles::{mc_estimate, sample_arrivals, ArrivalSequence, MCEstimate, StreamRng};

/// Largest instance the permutation oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// One sampled configuration and its costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingRun {
    pub n: usize,
    pub b: f64,
    pub xs: ArrivalSequence,
    pub ys: ArrivalSequence,
    pub sorted_cost: f64,
    pub optimal_cost: Option<f64>,
}

/// Least-squares fit of `log(mean cost)` against `log(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub b: f64,
    pub n_grid: Vec<u64>,
    pub mean_costs: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Minimum over all bijections, with the winning assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceMatching {
    pub cost: f64,
    /// `permutation[k]` is the index of the `y` matched to `x_k`.
    pub permutation: Vec<usize>,
}

/// Arrival rate used for an `n`-point instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateCoupling {
    /// `lambda = n`, so the points occupy an interval of length about 1.
    PointCount,
    Fixed(f64),
}

impl RateCoupling {
    pub fn rate(self, n: u64) -> f64 {
        match self {
            RateCoupling::PointCount => n as f64,
            RateCoupling::Fixed(l) => l,
        }
    }
}

fn check_exponent(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid(format!("cost exponent must be positive, got {b}")));
    }
    Ok(())
}

fn index_cost(xs: &[f64], ys: &[f64], b: f64) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (x - y).abs().powf(b)).sum()
}

/// `sum_k |X_k - Y_k|^b`, the cost of matching the sequences in sorted order.
pub fn sorted_matching_cost(xs: &ArrivalSequence, ys: &ArrivalSequence, b: f64) -> Result<f64> {
    check_exponent(b)?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    Ok(index_cost(xs.times(), ys.times(), b))
}

/// Enumerates all `n!` assignments. Ties keep the lexicographically first
/// permutation, so the identity wins whenever it is optimal.
pub fn optimal_matching_bruteforce(xs: &[f64], ys: &[f64], b: f64) -> Result<BruteForceMatching> {
    check_exponent(b)?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n == 0 || n > BRUTE_FORCE_MAX_N {
        return Err(invalid(format!(
            "brute force needs 1 <= n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let mut best = BruteForceMatching {
        cost: f64::INFINITY,
        permutation: Vec::new(),
    };
    for perm in (0..n).permutations(n) {
        let cost: f64 = perm
            .iter()
            .enumerate()
            .map(|(k, &j)| (xs[k] - ys[j]).abs().powf(b))
            .sum();
        if cost < best.cost {
            best = BruteForceMatching {
                cost,
                permutation: perm,
            };
        }
    }
    Ok(best)
}

pub fn optimal_matching_cost_bruteforce(xs: &[f64], ys: &[f64], b: f64) -> Result<f64> {
    optimal_matching_bruteforce(xs, ys, b).map(|m| m.cost)
}

/// Exact `E sum_{k<=n} |X_k - Y_k|^a` at `lambda = n`.
pub fn expected_sorted_cost_exact(n: u64, a: u64) -> Result<Rat> {
    Ok(sum_moments(n, a, &rat(n as i64))?.value)
}

/// Stream for color `color` of trial `trial` at size `n`.
fn stream_id(n: u64, trial: u64, color: u64) -> u64 {
    (n << 40) | (trial << 1) | color
}

/// Samples one instance; the permutation oracle runs when `brute_force` is set
/// and `n <= BRUTE_FORCE_MAX_N`.
pub fn sample_matching_run(
    n: usize,
    b: f64,
    coupling: RateCoupling,
    seed: u64,
    trial: u64,
    brute_force: bool,
) -> Result<MatchingRun> {
    check_exponent(b)?;
    let rate = coupling.rate(n as u64);
    let xs = sample_arrivals(n, rate, seed, stream_id(n as u64, trial, 0))?;
    let ys = sample_arrivals(n, rate, seed, stream_id(n as u64, trial, 1))?;
    let sorted_cost = sorted_matching_cost(&xs, &ys, b)?;
    let optimal_cost = if brute_force && n <= BRUTE_FORCE_MAX_N {
        Some(optimal_matching_cost_bruteforce(xs.times(), ys.times(), b)?)
    } else {
        None
    };
    Ok(MatchingRun {
        n,
        b,
        xs,
        ys,
        sorted_cost,
        optimal_cost,
    })
}

/// Monte Carlo mean of the sorted cost over `trials` independent instances.
pub fn mean_sorted_cost(
    n: u64,
    b: f64,
    coupling: RateCoupling,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_exponent(b)?;
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let rate = coupling.rate(n);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid(format!("rate must be positive, got {rate}")));
    }
    mc_estimate(trials, seed, |t| {
        // same draws as sample_matching_run, without materializing the sequences
        let mut xr = StreamRng::new(seed, stream_id(n, t, 0));
        let mut yr = StreamRng::new(seed, stream_id(n, t, 1));
        let (mut x, mut y, mut cost) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            x += xr.next_gap(rate);
            y += yr.next_gap(rate);
            cost += (x - y).abs().powf(b);
        }
        cost
    })
}

/// Ordinary least squares `y = slope * x + intercept`; returns
/// `(slope, intercept, r_squared)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(invalid("a fit needs at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x values are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, intercept, r_squared))
}

/// Measures the growth exponent of the expected sorted cost with
/// `lambda = n`.
pub fn scaling_experiment(b: f64, n_grid: &[u64], trials: u64, seed: u64) -> Result<ScalingFit> {
    scaling_experiment_with(b, n_grid, trials, seed, RateCoupling::PointCount)
}

pub fn scaling_experiment_with(
    b: f64,
    n_grid: &[u64],
    trials: u64,
    seed: u64,
    coupling: RateCoupling,
) -> Result<ScalingFit> {
    check_exponent(b)?;
    if n_grid.len() < 2 {
        return Err(invalid("the n grid needs at least two points"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("the n grid must be strictly increasing and start at n >= 1"));
    }
    if trials < 2 {
        return Err(invalid("trials must be >= 2"));
    }
    let estimates = n_grid
        .iter()
        .map(|&n| mean_sorted_cost(n, b, coupling, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    let mean_costs: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let stderrs = estimates.iter().map(|e| e.stderr).collect();
    let log_n: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let log_c: Vec<f64> = mean_costs.iter().map(|c| c.ln()).collect();
    let (slope, intercept, r_squared) = least_squares(&log_n, &log_c)?;
    Ok(ScalingFit {
        b,
        n_grid: n_grid.to_vec(),
        mean_costs,
        stderrs,
        slope,
        intercept,
        r_squared,
    })
}

/// `[n_min, n_min * factor, ...]` up to and including `n_max`.
pub fn geometric_grid(n_min: u64, n_max: u64, factor: u64) -> Result<Vec<u64>> {
    if n_min == 0 || factor < 2 || n_max < n_min {
        return Err(invalid("grid needs 1 <= n_min <= n_max and factor >= 2"));
    }
    let mut grid = vec![n_min];
    while let Some(next) = grid.last().and_then(|n| n.checked_mul(factor)) {
        if next > n_max {
            break;
        }
        grid.push(next);
    }
    Ok(grid)
}

/// Sorted-versus-optimal comparison over random small instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCheck {
    pub b: f64,
    pub instances: u64,
    /// Instances where the sorted cost exceeds the optimum by more than the
    /// relative tolerance.
    pub mismatches: u64,
    pub max_relative_gap: f64,
}

/// Samples `instances` configurations with `n` cycling through `1..=max_n`
/// and compares the sorted cost with the permutation oracle.
pub fn check_sorted_optimality(
    b: f64,
    max_n: usize,
    instances: u64,
    seed: u64,
    rel_tol: f64,
) -> Result<OptimalityCheck> {
    if max_n == 0 || max_n > BRUTE_FORCE_MAX_N {
        return Err(invalid(format!("max_n must be in 1..={BRUTE_FORCE_MAX_N}")));
    }
    let mut mismatches = 0;
    let mut max_relative_gap: f64 = 0.0;
    for t in 0..instances {
        let n = 1 + (t as usize % max_n);
        let run = sample_matching_run(n, b, RateCoupling::PointCount, seed, t, true)?;
        let opt = run.optimal_cost.expect("brute force requested");
        let gap = (run.sorted_cost - opt) / opt.max(f64::MIN_POSITIVE);
        max_relative_gap = max_relative_gap.max(gap);
        if gap > rel_tol {
            mismatches += 1;
        }
    }
    Ok(OptimalityCheck {
        b,
        instances,
        mismatches,
        max_relative_gap,
    })
}
