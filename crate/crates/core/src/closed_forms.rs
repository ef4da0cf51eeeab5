//! Closed-form moments `E|X_i - Y_k|^a` for two i.i.d. Poisson processes.
//!
//! The rate only enters through the prefactor `1 / lambda^a`, so every
//! formula is evaluated at unit rate and then rescaled.
//!
//! For odd `a` three algebraically different routes are kept public
//! ([`odd_moment_lemma2`], [`odd_moment_lemma3`], [`odd_moment_theorem4`]) so
//! they can be checked against each other. The dispatcher [`moment`] uses the
//! Pochhammer/Gamma form, which has the shortest sums.

use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::exact_arith::{
    binomial, factorial, gamma_half, gamma_ratio, pochhammer_int, pow2, pow_rat, HalfInt, Rat,
};

/// One moment `E|X_{k+r} - Y_k|^a` at arrival rate `lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentQuery {
    pub k: u64,
    pub r: u64,
    pub a: u64,
    pub lambda: Rat,
}

impl MomentQuery {
    pub fn new(k: u64, r: u64, a: u64, lambda: Rat) -> Result<Self> {
        let q = Self { k, r, a, lambda };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_index("k", self.k)?;
        check_exponent(self.a)?;
        check_rate(&self.lambda)
    }
}

/// Exact moment together with its unit-rate value `value * lambda^a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentValue {
    pub value: Rat,
    pub normalized: Rat,
}

impl MomentValue {
    fn from_normalized(normalized: Rat, a: u64, lambda: &Rat) -> Self {
        let value = &normalized / pow_rat(lambda, a as i64);
        Self { value, normalized }
    }
}

fn check_index(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(invalid(format!("{name} must be >= 1")));
    }
    Ok(())
}

fn check_exponent(a: u64) -> Result<()> {
    if a == 0 {
        return Err(invalid("moment exponent a must be >= 1"));
    }
    Ok(())
}

fn check_rate(lambda: &Rat) -> Result<()> {
    if !lambda.is_positive() {
        return Err(invalid(format!("arrival rate must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_common(i: u64, k: u64, a: u64, lambda: &Rat) -> Result<()> {
    check_index("i", i)?;
    check_index("k", k)?;
    check_exponent(a)?;
    check_rate(lambda)
}

fn require_even(formula: &'static str, a: u64) -> Result<()> {
    if a % 2 != 0 {
        return Err(Error::Parity {
            formula,
            a,
            expected: "even",
        });
    }
    Ok(())
}

fn require_odd(formula: &'static str, a: u64) -> Result<()> {
    if a % 2 == 0 {
        return Err(Error::Parity {
            formula,
            a,
            expected: "odd",
        });
    }
    Ok(())
}

/// `C(a,j) (-1)^{a-j} i^{(j)} k^{(a-j)}`.
fn signed_term(i: u64, k: u64, a: u64, j: u64) -> Rat {
    let t = binomial(a, j as i64) * pochhammer_int(i, j) * pochhammer_int(k, a - j);
    if (a - j) % 2 == 1 {
        -t
    } else {
        t
    }
}

/// `sum_{j=0}^{a} C(a,j) (-1)^{a-j} i^{(j)} k^{(a-j)}`, which is `E(X_i - Y_k)^a`
/// at unit rate.
fn full_line_sum(i: u64, k: u64, a: u64) -> Rat {
    (0..=a).map(|j| signed_term(i, k, a, j)).sum()
}

/// `sum_{j=0}^{l} C(a,j) (-1)^j i^{(j)} k^{(a-j)}`.
fn alternating_head(i: u64, k: u64, a: u64, l: u64) -> Rat {
    (0..=l)
        .map(|j| {
            let t = binomial(a, j as i64) * pochhammer_int(i, j) * pochhammer_int(k, a - j);
            if j % 2 == 1 {
                -t
            } else {
                t
            }
        })
        .sum()
}

/// Even-exponent moment `E|X_i - Y_k|^a`, a plain polynomial in Pochhammer
/// symbols because `|x|^a = x^a`.
pub fn even_moment_general(i: u64, k: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_common(i, k, a, lambda)?;
    require_even("even_moment_general", a)?;
    Ok(MomentValue::from_normalized(full_line_sum(i, k, a), a, lambda))
}

/// `E|X_k - Y_k|^a = (a!/lambda^a) Gamma(a/2+k) / (Gamma(k) Gamma(a/2+1))`,
/// valid for both parities of `a`.
pub fn diagonal_moment(k: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_index("k", k)?;
    check_exponent(a)?;
    check_rate(lambda)?;
    let half_a = HalfInt::half(a as i64);
    let num = gamma_ratio(half_a.plus_int(k as i64), HalfInt::from_int(k as i64))?;
    let den = gamma_half(half_a.plus_int(1))?;
    let normalized = (&num / &den).scale(&factorial(a)).to_rational()?;
    Ok(MomentValue::from_normalized(normalized, a, lambda))
}

/// Odd-exponent moment from the split into the full-line integral and the
/// lower-tail correction, with the correction written as a finite sum of
/// negative-binomial weights.
pub fn odd_moment_lemma2(i: u64, k: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_common(i, k, a, lambda)?;
    require_odd("odd_moment_lemma2", a)?;
    let mut total = -full_line_sum(i, k, a);
    for j in 0..=a {
        let weights: Rat = (0..i + j)
            .map(|l| {
                let top = k + l - 1 + a - j;
                binomial(top, l as i64) * pow2(-(top as i64))
            })
            .sum();
        total += signed_term(i, k, a, j) * weights;
    }
    Ok(MomentValue::from_normalized(total, a, lambda))
}

/// Odd-exponent moment after summation by parts: a tail of the
/// negative-binomial series times the full-line sum, plus one correction sum.
pub fn odd_moment_lemma3(i: u64, k: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_common(i, k, a, lambda)?;
    require_odd("odd_moment_lemma3", a)?;
    // sum over l in [k, i+a-1]; for k > i + a this range is reversed and the
    // sum is -sum over [i+a, k-1], since the series over [0, k-1] equals 1
    let weight = |l: u64| binomial(l + k - 1, l as i64) * pow2(-((l + k - 1) as i64));
    let tail: Rat = if k < i + a {
        (k..i + a).map(weight).sum()
    } else {
        -(i + a..k).map(weight).sum::<Rat>()
    };
    let first = tail * full_line_sum(i, k, a);
    let second: Rat = (0..a)
        .map(|l| alternating_head(i, k, a, l) * binomial(i + k + a - 1, (i + l) as i64))
        .sum();
    let second = second * pow2(-((i + k + a - 2) as i64));
    Ok(MomentValue::from_normalized(first + second, a, lambda))
}

/// Odd-exponent moment `E|X_{k+r} - Y_k|^a` as a combination of Pochhammer
/// polynomials with two Gamma prefactors.
pub fn odd_moment_theorem4(k: u64, r: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_common(k, k, a, lambda)?;
    require_odd("odd_moment_theorem4", a)?;
    let i = k + r;
    let ki = k as i64;
    let sqrt_pi = gamma_half(HalfInt::half(1))?;

    // Gamma(k + 1/2) / (Gamma(1/2) Gamma(k + 1))
    let c1 = &(&gamma_half(HalfInt::half(2 * ki + 1))? / &sqrt_pi)
        / &gamma_half(HalfInt::from_int(ki + 1))?;
    let c1 = c1.to_rational()?;
    let series: Rat = (0..r + a)
        .map(|l| pochhammer_int(2 * k, l) / pochhammer_int(k + 1, l) * pow2(-(l as i64)))
        .sum();
    let first = c1 * series * full_line_sum(i, k, a);

    // Gamma(a/2 + k) / (Gamma(1/2) Gamma(k)), divided by 2^{r-1}
    let c2 = &(&gamma_half(HalfInt::half(a as i64).plus_int(ki))? / &sqrt_pi)
        / &gamma_half(HalfInt::from_int(ki))?;
    let c2 = c2.to_rational()? * pow2(1 - r as i64);
    let lift = pochhammer_int(k, (a + 1) / 2) * pochhammer_int(2 * k + a, r);
    let inner: Rat = (0..a)
        .map(|l| {
            alternating_head(i, k, a, l) * &lift
                / (pochhammer_int(k, r + l + 1) * pochhammer_int(k, a - l))
        })
        .sum();
    let second = c2 * inner;

    Ok(MomentValue::from_normalized(first + second, a, lambda))
}

/// Exact `E|X_{k+r} - Y_k|^a`, dispatched on the parity of `a`.
///
/// For `r = 0` the result is also compared against [`diagonal_moment`]; a
/// disagreement is reported as [`Error::CrossCheck`].
pub fn moment(q: &MomentQuery) -> Result<MomentValue> {
    q.validate()?;
    let v = if q.a % 2 == 0 {
        even_moment_general(q.k + q.r, q.k, q.a, &q.lambda)?
    } else {
        odd_moment_theorem4(q.k, q.r, q.a, &q.lambda)?
    };
    if q.r == 0 {
        let d = diagonal_moment(q.k, q.a, &q.lambda)?;
        if d != v {
            return Err(Error::CrossCheck(format!(
                "moment(k={}, r=0, a={}) = {} but diagonal form gives {}",
                q.k, q.a, v.value, d.value
            )));
        }
    }
    Ok(v)
}

/// `sum_{k=1}^{n} E|X_k - Y_k|^a
///   = (a!/lambda^a) (2n/(2+a)) Gamma(n+1+a/2) / (Gamma(a/2+1) Gamma(n+1))`.
pub fn sum_moments(n: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_index("n", n)?;
    check_exponent(a)?;
    check_rate(lambda)?;
    let half_a = HalfInt::half(a as i64);
    let g = &gamma_ratio(half_a.plus_int(n as i64 + 1), HalfInt::from_int(n as i64 + 1))?
        / &gamma_half(half_a.plus_int(1))?;
    let scale = factorial(a) * Rat::new((2 * n).into(), (2 + a).into());
    let normalized = g.scale(&scale).to_rational()?;
    Ok(MomentValue::from_normalized(normalized, a, lambda))
}

/// Term-by-term partial sum of diagonal moments, the slow route to
/// [`sum_moments`].
pub fn sum_moments_termwise(n: u64, a: u64, lambda: &Rat) -> Result<MomentValue> {
    check_index("n", n)?;
    let mut normalized = Rat::zero();
    for k in 1..=n {
        normalized += diagonal_moment(k, a, lambda)?.normalized;
    }
    Ok(MomentValue::from_normalized(normalized, a, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::exact_arith::{rat, ratio};

    fn one() -> Rat {
        Rat::one()
    }

    #[test]
    fn even_general_examples() {
        assert_eq!(even_moment_general(1, 1, 2, &one()).unwrap().value, rat(2));
        assert_eq!(even_moment_general(2, 1, 2, &one()).unwrap().value, rat(4));
        assert_eq!(even_moment_general(3, 3, 2, &one()).unwrap().value, rat(6));
        assert!(matches!(
            even_moment_general(1, 1, 3, &one()),
            Err(Error::Parity { .. })
        ));
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diagonal_moment(1, 1, &one()).unwrap().value, rat(1));
        assert_eq!(diagonal_moment(1, 3, &one()).unwrap().value, rat(6));
        assert_eq!(diagonal_moment(2, 1, &one()).unwrap().value, ratio(3, 2));
        let v = diagonal_moment(3, 2, &rat(2)).unwrap();
        assert_eq!(v.value, ratio(3, 2));
        assert_eq!(v.normalized, rat(6));
    }

    #[test]
    fn lemma2_examples() {
        assert_eq!(odd_moment_lemma2(1, 1, 1, &one()).unwrap().value, rat(1));
        assert_eq!(odd_moment_lemma2(2, 1, 1, &one()).unwrap().value, ratio(3, 2));
        assert_eq!(odd_moment_lemma2(1, 2, 1, &one()).unwrap().value, ratio(3, 2));
        assert!(odd_moment_lemma2(1, 1, 2, &one()).is_err());
    }

    #[test]
    fn lemma3_examples() {
        assert_eq!(odd_moment_lemma3(1, 1, 1, &one()).unwrap().value, rat(1));
        assert_eq!(odd_moment_lemma3(2, 1, 1, &one()).unwrap().value, ratio(3, 2));
        // frozen from an independent race-probability oracle
        assert_eq!(odd_moment_lemma3(4, 2, 3, &one()).unwrap().value, ratio(105, 2));
        assert_eq!(
            odd_moment_lemma3(4, 2, 3, &one()).unwrap(),
            odd_moment_lemma2(4, 2, 3, &one()).unwrap()
        );
        // reversed tail range: k > i + a - 1
        for (i, k, a) in [(1, 5, 1), (1, 2, 1), (2, 9, 3), (1, 4, 3)] {
            assert_eq!(
                odd_moment_lemma3(i, k, a, &one()).unwrap(),
                odd_moment_lemma2(i, k, a, &one()).unwrap(),
                "i={i} k={k} a={a}"
            );
        }
        assert_eq!(odd_moment_lemma3(1, 5, 1, &one()).unwrap().value, ratio(65, 16));
        assert!(odd_moment_lemma3(1, 1, 4, &one()).is_err());
    }

    #[test]
    fn theorem4_examples() {
        assert_eq!(odd_moment_theorem4(1, 1, 1, &one()).unwrap().value, ratio(3, 2));
        assert_eq!(odd_moment_theorem4(1, 0, 1, &one()).unwrap().value, rat(1));
        assert_eq!(odd_moment_theorem4(3, 2, 3, &one()).unwrap().value, ratio(2205, 32));
        assert_eq!(
            odd_moment_theorem4(3, 2, 3, &one()).unwrap(),
            odd_moment_lemma3(5, 3, 3, &one()).unwrap()
        );
        assert!(odd_moment_theorem4(1, 0, 2, &one()).is_err());
    }

    #[test]
    fn dispatcher_examples() {
        let m = |k, r, a, l: Rat| moment(&MomentQuery::new(k, r, a, l).unwrap()).unwrap();
        assert_eq!(m(1, 0, 2, one()).value, rat(2));
        assert_eq!(m(1, 1, 1, one()).value, ratio(3, 2));
        let v = m(1, 0, 1, rat(3));
        assert_eq!(v.value, ratio(1, 3));
        assert_eq!(v.normalized, rat(1));
    }

    #[test]
    fn sum_examples() {
        assert_eq!(sum_moments(1, 2, &one()).unwrap().value, rat(2));
        assert_eq!(sum_moments(2, 2, &one()).unwrap().value, rat(6));
        assert_eq!(sum_moments(3, 1, &one()).unwrap().value, ratio(35, 8));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MomentQuery::new(0, 0, 1, one()).is_err());
        assert!(MomentQuery::new(1, 0, 0, one()).is_err());
        assert!(MomentQuery::new(1, 0, 1, rat(0)).is_err());
        assert!(MomentQuery::new(1, 0, 1, rat(-2)).is_err());
        assert!(diagonal_moment(0, 1, &one()).is_err());
        assert!(sum_moments(0, 1, &one()).is_err());
        assert!(odd_moment_lemma2(0, 1, 1, &one()).is_err());
    }

    #[test]
    fn diagonal_agrees_with_dispatcher() {
        for k in 1..=20 {
            for a in 1..=10 {
                let q = MomentQuery::new(k, 0, a, ratio(1, 2)).unwrap();
                assert_eq!(moment(&q).unwrap(), diagonal_moment(k, a, &q.lambda).unwrap());
            }
        }
    }

    #[test]
    fn partial_sums_agree() {
        for n in 1..=15 {
            for a in 1..=8 {
                assert_eq!(
                    sum_moments(n, a, &rat(3)).unwrap(),
                    sum_moments_termwise(n, a, &rat(3)).unwrap(),
                    "n={n} a={a}"
                );
            }
        }
    }

    #[test]
    fn scale_law() {
        for (k, r, a) in [(1, 0, 1), (2, 3, 2), (4, 1, 3), (3, 5, 4), (6, 2, 5)] {
            let norms: Vec<Rat> = [rat(1), ratio(1, 2), rat(7)]
                .into_iter()
                .map(|l| {
                    let v = moment(&MomentQuery::new(k, r, a, l.clone()).unwrap()).unwrap();
                    assert_eq!(&v.value * pow_rat(&l, a as i64), v.normalized);
                    v.normalized
                })
                .collect();
            assert!(norms.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn symmetric_in_indices() {
        for i in 1..=8 {
            for k in 1..=8 {
                for a in [2, 4] {
                    assert_eq!(
                        even_moment_general(i, k, a, &one()).unwrap(),
                        even_moment_general(k, i, a, &one()).unwrap()
                    );
                }
                for a in [1, 3] {
                    assert_eq!(
                        odd_moment_lemma2(i, k, a, &one()).unwrap(),
                        odd_moment_lemma2(k, i, a, &one()).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn increasing_in_offset() {
        for k in 1..=12 {
            for r in 0..8 {
                for a in 1..=7 {
                    let lo = moment(&MomentQuery::new(k, r, a, one()).unwrap()).unwrap();
                    let hi = moment(&MomentQuery::new(k, r + 1, a, one()).unwrap()).unwrap();
                    assert!(lo.value.is_positive());
                    assert!(hi.value > lo.value, "k={k} r={r} a={a}");
                }
            }
        }
    }

    #[test]
    fn triple_agreement_small_grid() {
        for k in 1..=5 {
            for r in 0..=4 {
                for a in [1, 3, 5] {
                    let l = ratio(1, 2);
                    let t4 = odd_moment_theorem4(k, r, a, &l).unwrap();
                    assert_eq!(t4, odd_moment_lemma2(k + r, k, a, &l).unwrap());
                    assert_eq!(t4, odd_moment_lemma3(k + r, k, a, &l).unwrap());
                }
            }
        }
    }
}
