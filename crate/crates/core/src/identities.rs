//! Exact checks of the combinatorial and special-function identities the
//! moment formulas rest on, plus grid sweeps that produce [`IdentityReport`]s.
//!
//! Every check except [`check_incomplete_gamma`] is an exact rational
//! comparison.

use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact_arith::{
    binomial, factorial, gamma_half, pochhammer_int, pow2, GammaFactor, HalfInt, Rat,
};

/// Relative tolerance for the quadrature-based incomplete Gamma check.
pub const INCOMPLETE_GAMMA_REL_TOL: f64 = 1e-12;

/// Outcome of sweeping one identity over a parameter grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub parameter_set: Vec<Vec<i64>>,
    pub all_passed: bool,
    pub first_failure: Option<Vec<i64>>,
}

impl IdentityReport {
    fn sweep<I, F>(name: &str, params: I, mut check: F) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<i64>>,
        F: FnMut(&[i64]) -> Result<bool>,
    {
        let mut parameter_set = Vec::new();
        let mut first_failure = None;
        for p in params {
            if first_failure.is_none() && !check(&p)? {
                first_failure = Some(p.clone());
            }
            parameter_set.push(p);
        }
        Ok(Self {
            name: name.to_string(),
            parameter_set,
            all_passed: first_failure.is_none(),
            first_failure,
        })
    }
}

/// Legendre duplication in the pi-free form
/// `Gamma(2z) sqrt(pi) = 2^{2z-1} Gamma(z) Gamma(z + 1/2)`.
pub fn check_legendre_duplication(z: HalfInt) -> Result<bool> {
    let lhs = &gamma_half(z + z)? * &GammaFactor::sqrt_pi();
    let rhs = (&gamma_half(z)? * &gamma_half(z + HalfInt::half(1))?).scale(&pow2(z.doubled() - 1));
    Ok(lhs == rhs)
}

/// `sum_{k=1}^{n} Gamma(a/2+k)/Gamma(k) = (2n/(2+a)) Gamma(n+1+a/2)/Gamma(n+1)`,
/// compared with the `sqrt(pi)` factor carried on both sides.
pub fn check_telescoping_sum(n: u64, a: u64) -> Result<bool> {
    if n == 0 || a == 0 {
        return Err(invalid("telescoping sum needs n >= 1 and a >= 1"));
    }
    let half_a = HalfInt::half(a as i64);
    let mut lhs = GammaFactor::rational(Rat::zero());
    for k in 1..=n as i64 {
        let term = &gamma_half(half_a.plus_int(k))? / &gamma_half(HalfInt::from_int(k))?;
        lhs = lhs.checked_add(&term)?;
    }
    let rhs = (&gamma_half(half_a.plus_int(n as i64 + 1))?
        / &gamma_half(HalfInt::from_int(n as i64 + 1))?)
        .scale(&Rat::new((2 * n).into(), (2 + a).into()));
    Ok(lhs == rhs)
}

/// `sum_j (-1)^{a-j} C(j+k-1,k-1) C(a-j+k-1,k-1)` is `C(a/2+k-1,k-1)` for even
/// `a` and 0 for odd `a`.
pub fn check_alternating_binomial(a: u64, k: u64) -> Result<bool> {
    if k == 0 {
        return Err(invalid("alternating binomial sum needs k >= 1"));
    }
    let lhs = alternating_binomial_sum(a, k);
    let rhs = if a % 2 == 0 {
        binomial(a / 2 + k - 1, (k - 1) as i64)
    } else {
        Rat::zero()
    };
    Ok(lhs == rhs)
}

pub fn alternating_binomial_sum(a: u64, k: u64) -> Rat {
    (0..=a)
        .map(|j| {
            let t = binomial(j + k - 1, (k - 1) as i64) * binomial(a - j + k - 1, (k - 1) as i64);
            if (a - j) % 2 == 1 {
                -t
            } else {
                t
            }
        })
        .sum()
}

/// Left-hand side of the Pochhammer identity used for the odd diagonal case:
/// `sum_{l<a} (sum_{j<=l} (-1)^j k^{(a-j)} k^{(j)} C(a,j)) k^{((a+1)/2)} / (k^{(1+l)} k^{(a-l)})`.
pub fn d_polynomial_lhs(k: u64, a: u64) -> Result<Rat> {
    if k == 0 || a % 2 == 0 {
        return Err(invalid(format!(
            "the Pochhammer identity needs k >= 1 and odd a (got k={k}, a={a})"
        )));
    }
    let lift = pochhammer_int(k, (a + 1) / 2);
    let mut total = Rat::zero();
    let mut head = Rat::zero();
    for l in 0..a {
        let t = pochhammer_int(k, a - l) * pochhammer_int(k, l) * binomial(a, l as i64);
        if l % 2 == 1 {
            head -= t;
        } else {
            head += t;
        }
        total += &head * &lift / (pochhammer_int(k, 1 + l) * pochhammer_int(k, a - l));
    }
    Ok(total)
}

/// Right-hand side `a! sqrt(pi) / (2 Gamma(a/2 + 1))`, rational for odd `a`.
pub fn d_polynomial_rhs(a: u64) -> Result<Rat> {
    let g = &GammaFactor::sqrt_pi().scale(&(factorial(a) / Rat::from_integer(2.into())))
        / &gamma_half(HalfInt::half(a as i64 + 2))?;
    g.to_rational()
}

pub fn d_polynomial_identity(k: u64, a: u64) -> Result<bool> {
    Ok(d_polynomial_lhs(k, a)? == d_polynomial_rhs(a)?)
}

/// `sum_{j<=b} C(a,j) C(a-1-b-j, b-j) = (2^b/b!) prod_{j=1}^{b} (a-(2j-1))`,
/// and 1 when `b = 0`.
pub fn gould_identity(a: u64, b: u64) -> Result<bool> {
    if a == 0 || 2 * b > a - 1 {
        return Err(invalid(format!("need a >= 1 and 0 <= b <= (a-1)/2 (got a={a}, b={b})")));
    }
    let lhs: Rat = (0..=b)
        .map(|j| binomial(a, j as i64) * binomial(a - 1 - b - j, (b - j) as i64))
        .sum();
    let rhs = if b == 0 {
        Rat::from_integer(1.into())
    } else {
        (1..=b).fold(pow2(b as i64) / factorial(b), |acc, j| {
            acc * Rat::from_integer((a as i64 - (2 * j as i64 - 1)).into())
        })
    };
    Ok(lhs == rhs)
}

/// `sum_{j=0}^{m} C(m+j, m) 2^{-j} = 2^m`.
pub fn check_partial_geometric(m: u64) -> bool {
    let lhs: Rat = (0..=m)
        .map(|j| binomial(m + j, m as i64) * pow2(-(j as i64)))
        .sum();
    lhs == pow2(m as i64)
}

/// Gamma(m, lambda) density `lambda e^{-lambda t} (lambda t)^{m-1} / (m-1)!`.
pub fn gamma_density(m: u64, lambda: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let y = lambda * t;
    let log_norm: f64 = (1..m).map(|j| (j as f64).ln()).sum();
    let log_pow = if m == 1 { 0.0 } else { (m - 1) as f64 * y.ln() };
    lambda * (log_pow - y - log_norm).exp()
}

/// `1 - e^{-lambda x} sum_{l<m} (lambda x)^l / l!`.
pub fn incomplete_gamma_closed(m: u64, lambda: f64, x: f64) -> f64 {
    let y = lambda * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    for l in 0..m {
        if l > 0 {
            term *= y / l as f64;
        }
        sum += term;
    }
    1.0 - (-y).exp() * sum
}

/// Compares the closed form of the Gamma CDF against adaptive quadrature of
/// the density, to [`INCOMPLETE_GAMMA_REL_TOL`].
pub fn check_incomplete_gamma(m: u64, lambda: &Rat, x: &Rat) -> Result<bool> {
    if m == 0 || !(lambda > &Rat::zero()) || !(x > &Rat::zero()) {
        return Err(invalid("incomplete Gamma check needs m >= 1, lambda > 0, x > 0"));
    }
    let lam = lambda.to_f64().ok_or_else(|| invalid("lambda out of f64 range"))?;
    let xf = x.to_f64().ok_or_else(|| invalid("x out of f64 range"))?;
    let closed = incomplete_gamma_closed(m, lam, xf);
    let quad = crate::quadrature::integrate(|t| gamma_density(m, lam, t), 0.0, xf, 1e-14);
    Ok((quad - closed).abs() <= INCOMPLETE_GAMMA_REL_TOL * closed.abs())
}

/// Identity families that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Legendre,
    Telescoping,
    Binomial,
    Dpoly,
    Gould,
    Geometric,
    GammaIncomplete,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Legendre,
        Suite::Telescoping,
        Suite::Binomial,
        Suite::Dpoly,
        Suite::Gould,
        Suite::Geometric,
        Suite::GammaIncomplete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Legendre => "legendre",
            Suite::Telescoping => "telescoping",
            Suite::Binomial => "binomial",
            Suite::Dpoly => "dpoly",
            Suite::Gould => "gould",
            Suite::Geometric => "geometric",
            Suite::GammaIncomplete => "gamma-incomplete",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| invalid(format!("unknown identity suite `{s}`")))
    }
}

/// Optional overrides of a suite's default grid bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GridLimits {
    pub max_a: Option<u64>,
    pub max_k: Option<u64>,
    pub max_n: Option<u64>,
}

/// Sweeps a suite over its grid. Defaults:
///
/// | suite | grid |
/// |---|---|
/// | legendre | z in {1/2, 1, ..., max_n}, max_n = 20 |
/// | telescoping | n in [1, max_n = 50], a in [1, max_a = 12] |
/// | binomial | a in [0, max_a = 20], k in [1, max_k = 12] |
/// | dpoly | odd a in [1, max_a = 11], k in [1, max_k = 20], plus constancy in k |
/// | gould | a in [1, max_a = 25], b in [0, (a-1)/2] |
/// | geometric | m in [0, max_n = 40] |
/// | gamma-incomplete | m in [1, max_k = 4] over a fixed set of (lambda, x) |
pub fn run_suite(suite: Suite, limits: GridLimits) -> Result<Vec<IdentityReport>> {
    let pairs = |lo_a: u64, hi_a: u64, lo_b: u64, hi_b: u64| {
        (lo_a..=hi_a).flat_map(move |x| (lo_b..=hi_b).map(move |y| vec![x as i64, y as i64]))
    };
    let reports = match suite {
        Suite::Legendre => {
            let max_z = limits.max_n.unwrap_or(20) as i64;
            vec![IdentityReport::sweep(
                "legendre-duplication",
                (1..=2 * max_z).map(|d| vec![d]),
                |p| check_legendre_duplication(HalfInt::from_doubled(p[0])),
            )?]
        }
        Suite::Telescoping => {
            let (max_n, max_a) = (limits.max_n.unwrap_or(50), limits.max_a.unwrap_or(12));
            vec![IdentityReport::sweep(
                "telescoping-gamma-sum",
                pairs(1, max_n, 1, max_a),
                |p| check_telescoping_sum(p[0] as u64, p[1] as u64),
            )?]
        }
        Suite::Binomial => {
            let (max_a, max_k) = (limits.max_a.unwrap_or(20), limits.max_k.unwrap_or(12));
            vec![IdentityReport::sweep(
                "alternating-binomial",
                pairs(0, max_a, 1, max_k),
                |p| check_alternating_binomial(p[0] as u64, p[1] as u64),
            )?]
        }
        Suite::Dpoly => {
            let (max_a, max_k) = (limits.max_a.unwrap_or(11), limits.max_k.unwrap_or(20));
            let grid = || {
                (1..=max_a)
                    .filter(|a| a % 2 == 1)
                    .flat_map(move |a| (1..=max_k).map(move |k| vec![k as i64, a as i64]))
            };
            let identity = IdentityReport::sweep("pochhammer-d-polynomial", grid(), |p| {
                d_polynomial_identity(p[0] as u64, p[1] as u64)
            })?;
            let constancy = IdentityReport::sweep(
                "pochhammer-d-polynomial-constant-in-k",
                (1..=max_a).filter(|a| a % 2 == 1).map(|a| vec![a as i64]),
                |p| {
                    let a = p[0] as u64;
                    let first = d_polynomial_lhs(1, a)?;
                    for k in 2..=max_k {
                        if d_polynomial_lhs(k, a)? != first {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                },
            )?;
            vec![identity, constancy]
        }
        Suite::Gould => {
            let max_a = limits.max_a.unwrap_or(25);
            let grid = (1..=max_a)
                .flat_map(|a| (0..=(a - 1) / 2).map(move |b| vec![a as i64, b as i64]));
            vec![IdentityReport::sweep("gould", grid, |p| {
                gould_identity(p[0] as u64, p[1] as u64)
            })?]
        }
        Suite::Geometric => {
            let max_m = limits.max_n.unwrap_or(40);
            vec![IdentityReport::sweep(
                "partial-geometric",
                (0..=max_m).map(|m| vec![m as i64]),
                |p| Ok(check_partial_geometric(p[0] as u64)),
            )?]
        }
        Suite::GammaIncomplete => {
            let max_m = limits.max_k.unwrap_or(4);
            // (lambda_num, lambda_den, x_num, x_den)
            const POINTS: [[i64; 4]; 6] = [
                [1, 1, 1, 1],
                [2, 1, 1, 2],
                [1, 2, 3, 1],
                [1, 1, 5, 1],
                [3, 1, 4, 1],
                [1, 1, 700, 1],
            ];
            let grid = (1..=max_m as i64).flat_map(|m| {
                POINTS.iter().map(move |p| {
                    let mut v = vec![m];
                    v.extend_from_slice(p);
                    v
                })
            });
            vec![IdentityReport::sweep("incomplete-gamma", grid, |p| {
                check_incomplete_gamma(
                    p[0] as u64,
                    &Rat::new(p[1].into(), p[2].into()),
                    &Rat::new(p[3].into(), p[4].into()),
                )
            })?]
        }
    };
    Ok(reports)
}

/// Runs every suite with default grids.
pub fn run_all(limits: GridLimits) -> Result<Vec<IdentityReport>> {
    let mut out = Vec::new();
    for suite in Suite::ALL {
        out.extend(run_suite(suite, limits)?);
    }
    Ok(out)
}
