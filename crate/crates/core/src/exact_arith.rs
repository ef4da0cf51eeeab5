//! Exact rational arithmetic and the special-function kernel.
//!
//! Every coefficient in the moment formulas is a rational number, except for
//! Gamma at half-integers which picks up a factor of `sqrt(pi)`. That factor
//! is carried symbolically in [`GammaFactor`] so equalities stay decidable.

use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num/den` in lowest terms. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// `2^e` for any signed exponent.
pub fn pow2(e: i64) -> Rat {
    let mag = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rat::from_integer(mag)
    } else {
        Rat::new(BigInt::one(), mag)
    }
}

/// Integer power with a signed exponent. Panics on `0^e` with `e < 0`.
pub fn pow_rat(x: &Rat, e: i64) -> Rat {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Parses `p`, `p/q` or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let neg = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let num: BigInt = digits
            .parse()
            .map_err(|_| invalid(format!("cannot parse rational `{s}`")))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rat::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let r: Rat = s
        .parse()
        .map_err(|_| invalid(format!("cannot parse rational `{s}`")))?;
    Ok(r)
}

pub(crate) fn factorial_int(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, m| acc * m)
}

/// `n!` exactly.
pub fn factorial(n: u64) -> Rat {
    Rat::from_integer(factorial_int(n))
}

pub(crate) fn binomial_int(n: u64, k: i64) -> BigInt {
    if k < 0 || k as u64 > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for t in 0..k {
        // acc = C(n, t) here, so the division is exact.
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

/// `C(n, k)`, zero outside `0 <= k <= n`.
pub fn binomial(n: u64, k: i64) -> Rat {
    Rat::from_integer(binomial_int(n, k))
}

/// Rising factorial `x (x+1) ... (x+n-1)`, equal to 1 for `n = 0`.
pub fn pochhammer(x: &Rat, n: u64) -> Rat {
    let mut acc = Rat::one();
    let mut term = x.clone();
    for _ in 0..n {
        acc *= &term;
        term += Rat::one();
    }
    acc
}

/// Rising factorial at an integer base.
pub fn pochhammer_int(x: u64, n: u64) -> Rat {
    let v = (0..n).fold(BigInt::one(), |acc, t| acc * (x + t));
    Rat::from_integer(v)
}

/// A number of the form `doubled / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt {
    doubled: i64,
}

impl HalfInt {
    pub const fn from_doubled(doubled: i64) -> Self {
        Self { doubled }
    }

    pub const fn from_int(n: i64) -> Self {
        Self { doubled: 2 * n }
    }

    /// `n / 2`.
    pub const fn half(n: i64) -> Self {
        Self { doubled: n }
    }

    pub const fn doubled(self) -> i64 {
        self.doubled
    }

    pub const fn is_integer(self) -> bool {
        self.doubled % 2 == 0
    }

    pub fn is_positive(self) -> bool {
        self.doubled > 0
    }

    pub fn to_rat(self) -> Rat {
        ratio(self.doubled, 2)
    }

    pub const fn plus_int(self, n: i64) -> Self {
        Self {
            doubled: self.doubled + 2 * n,
        }
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_doubled(self.doubled + rhs.doubled)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

/// Exact value `coeff * sqrt(pi)^sqrt_pi_power`.
///
/// Gamma at a positive integer has power 0, at a positive half-integer power 1.
/// Ratios may pass through power -1; anything leaving the library as a plain
/// rational must have power 0, enforced by [`GammaFactor::to_rational`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaFactor {
    pub coeff: Rat,
    pub sqrt_pi_power: i32,
}

impl GammaFactor {
    pub fn rational(coeff: Rat) -> Self {
        Self {
            coeff,
            sqrt_pi_power: 0,
        }
    }

    pub fn sqrt_pi() -> Self {
        Self {
            coeff: Rat::one(),
            sqrt_pi_power: 1,
        }
    }

    pub fn scale(&self, by: &Rat) -> Self {
        Self {
            coeff: &self.coeff * by,
            sqrt_pi_power: self.sqrt_pi_power,
        }
    }

    /// Sum of two factors with the same power of `sqrt(pi)`.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.coeff.is_zero() {
            return Ok(other.clone());
        }
        if other.coeff.is_zero() {
            return Ok(self.clone());
        }
        if self.sqrt_pi_power != other.sqrt_pi_power {
            return Err(invalid(format!(
                "cannot add sqrt(pi)^{} and sqrt(pi)^{} terms exactly",
                self.sqrt_pi_power, other.sqrt_pi_power
            )));
        }
        Ok(Self {
            coeff: &self.coeff + &other.coeff,
            sqrt_pi_power: self.sqrt_pi_power,
        })
    }

    pub fn recip(&self) -> Self {
        Self {
            coeff: self.coeff.recip(),
            sqrt_pi_power: -self.sqrt_pi_power,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.sqrt_pi_power == 0 || self.coeff.is_zero()
    }

    pub fn to_rational(&self) -> Result<Rat> {
        if self.is_rational() {
            Ok(self.coeff.clone())
        } else {
            Err(Error::IrrationalResult(self.sqrt_pi_power))
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        c * std::f64::consts::PI.sqrt().powi(self.sqrt_pi_power)
    }
}

impl Mul for &GammaFactor {
    type Output = GammaFactor;
    fn mul(self, rhs: &GammaFactor) -> GammaFactor {
        GammaFactor {
            coeff: &self.coeff * &rhs.coeff,
            sqrt_pi_power: self.sqrt_pi_power + rhs.sqrt_pi_power,
        }
    }
}

impl Div for &GammaFactor {
    type Output = GammaFactor;
    fn div(self, rhs: &GammaFactor) -> GammaFactor {
        GammaFactor {
            coeff: &self.coeff / &rhs.coeff,
            sqrt_pi_power: self.sqrt_pi_power - rhs.sqrt_pi_power,
        }
    }
}

impl fmt::Display for GammaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sqrt_pi_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "{}*sqrt(pi)", self.coeff),
            p => write!(f, "{}*sqrt(pi)^{}", self.coeff, p),
        }
    }
}

/// Exact `Gamma(z)` for positive integer or half-integer `z`.
pub fn gamma_half(z: HalfInt) -> Result<GammaFactor> {
    if !z.is_positive() {
        return Err(Error::NonPositiveGamma(z.to_string()));
    }
    let d = z.doubled() as u64;
    if z.is_integer() {
        Ok(GammaFactor::rational(factorial(d / 2 - 1)))
    } else {
        // Gamma(m + 1/2) = (1/2)^{(m)} sqrt(pi)
        Ok(GammaFactor {
            coeff: pochhammer(&ratio(1, 2), (d - 1) / 2),
            sqrt_pi_power: 1,
        })
    }
}

/// Exact `Gamma(num) / Gamma(den)`.
pub fn gamma_ratio(num: HalfInt, den: HalfInt) -> Result<GammaFactor> {
    let top = gamma_half(num)?;
    let bottom = gamma_half(den)?;
    if num.is_integer() == den.is_integer() && num >= den {
        // Same parity: a plain rising factorial, no large intermediate values.
        let steps = ((num.doubled() - den.doubled()) / 2) as u64;
        return Ok(GammaFactor::rational(pochhammer(&den.to_rat(), steps)));
    }
    Ok(&top / &bottom)
}
