//! Log-domain probability mass and density functions.
//!
//! Factorials go through `ln Γ` so that capacities in the hundreds do not
//! overflow.

use crate::error::{ModelError, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i as u64));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * (T::TAU()).ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// `ln n!`; exact products for small `n`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n < 2 {
        return T::zero();
    }
    if n <= 20 {
        let mut p: u64 = 1;
        for k in 2..=n {
            p *= k;
        }
        return T::lit(p as f64).ln();
    }
    ln_gamma(T::from_count(n) + T::one())
}

/// `ln C(n, k)`.
pub fn ln_binomial<T: Real>(n: u64, k: u64) -> T {
    debug_assert!(k <= n);
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}

/// `ln P(X = i)` for `X ~ Poisson(mean)`.
pub fn ln_poisson_pmf<T: Real>(i: u64, mean: T) -> T {
    if mean == T::zero() {
        return if i == 0 { T::zero() } else { T::neg_infinity() };
    }
    -mean + T::from_count(i) * mean.ln() - ln_factorial::<T>(i)
}

/// Probability of exactly `i` demands in an interval of length `t` under a
/// Poisson process of rate `lambda`.
pub fn poisson_pmf<T: Real>(i: i64, lambda: T, t: T) -> Result<T> {
    if i < 0 {
        return Err(ModelError::domain("poisson_pmf", format!("count {i} < 0")));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(ModelError::domain(
            "poisson_pmf",
            format!("rate {lambda} must be > 0"),
        ));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(ModelError::domain(
            "poisson_pmf",
            format!("interval {t} must be >= 0"),
        ));
    }
    Ok(ln_poisson_pmf(i as u64, lambda * t).exp())
}

/// `P(X >= k)` for `X ~ Poisson(mean)`. Summed directly on the tail side so
/// that small tails keep full relative precision.
pub fn poisson_upper_tail<T: Real>(k: u64, mean: T) -> T {
    if k == 0 {
        return T::one();
    }
    if mean == T::zero() {
        return T::zero();
    }
    if T::from_count(k) > mean {
        let mut term = ln_poisson_pmf(k, mean).exp();
        let mut sum = term;
        let mut j = k;
        while term > sum * T::epsilon() {
            j += 1;
            term *= mean / T::from_count(j);
            sum += term;
        }
        sum
    } else {
        T::one() - poisson_cdf(k - 1, mean)
    }
}

/// `P(X <= k)` for `X ~ Poisson(mean)`.
pub fn poisson_cdf<T: Real>(k: u64, mean: T) -> T {
    if mean == T::zero() {
        return T::one();
    }
    if T::from_count(k) < mean {
        // Terms decrease walking down from k.
        let mut term = ln_poisson_pmf(k, mean).exp();
        let mut sum = term;
        let mut j = k;
        while j > 0 && term > sum * T::epsilon() {
            term *= T::from_count(j) / mean;
            j -= 1;
            sum += term;
        }
        sum
    } else {
        T::one() - poisson_upper_tail(k + 1, mean)
    }
}

/// Erlang density with `shape` phases of rate `rate`; the time until the
/// `shape`-th Poisson event.
pub fn erlang_pdf<T: Real>(t: T, rate: T, shape: u64) -> Result<T> {
    if shape == 0 {
        return Err(ModelError::domain("erlang_pdf", "shape must be >= 1"));
    }
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(ModelError::domain(
            "erlang_pdf",
            format!("rate {rate} must be > 0"),
        ));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(ModelError::domain(
            "erlang_pdf",
            format!("t {t} must be >= 0"),
        ));
    }
    if t == T::zero() {
        return Ok(if shape == 1 { rate } else { T::zero() });
    }
    let k = T::from_count(shape);
    let ln_f = k * rate.ln() + (k - T::one()) * t.ln() - rate * t - ln_factorial::<T>(shape - 1);
    Ok(ln_f.exp())
}

pub fn exponential_pdf<T: Real>(t: T, rate: T) -> Result<T> {
    check_exponential("exponential_pdf", t, rate)?;
    Ok(rate * (-rate * t).exp())
}

pub fn exponential_cdf<T: Real>(t: T, rate: T) -> Result<T> {
    check_exponential("exponential_cdf", t, rate)?;
    Ok(-(-rate * t).exp_m1())
}

fn check_exponential<T: Real>(op: &'static str, t: T, rate: T) -> Result<()> {
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(ModelError::domain(op, format!("rate {rate} must be > 0")));
    }
    if !(t >= T::zero()) {
        return Err(ModelError::domain(op, format!("t {t} must be >= 0")));
    }
    Ok(())
}
