//! Signed sums of products evaluated in the log domain.
//!
//! Closed forms in the inventory model multiply factors such as
//! `(lambda / (lambda - theta))^(C+1)` and `((beta + lambda) L)^i / i!` that
//! individually overflow long before their products do. Each product is
//! carried as a sign and a log-magnitude and the sum is taken after shifting
//! by the largest magnitude.

use crate::error::{ModelError, Result};
use crate::scalar::Real;

/// A real number stored as sign and `ln |x|`. Zero is `ln_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog<T> {
    pub negative: bool,
    pub ln_abs: T,
}

impl<T: Real> SignedLog<T> {
    pub fn zero() -> Self {
        SignedLog {
            negative: false,
            ln_abs: T::neg_infinity(),
        }
    }

    pub fn positive(ln_abs: T) -> Self {
        SignedLog {
            negative: false,
            ln_abs,
        }
    }

    pub fn negative(ln_abs: T) -> Self {
        SignedLog {
            negative: true,
            ln_abs,
        }
    }

    pub fn from_value(x: T) -> Self {
        SignedLog {
            negative: x < T::zero(),
            ln_abs: x.abs().ln(),
        }
    }

    pub fn value(self) -> T {
        let m = self.ln_abs.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }
}

impl<T: Real> std::ops::Mul for SignedLog<T> {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        SignedLog {
            negative: self.negative != other.negative,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }
}

impl<T: Real> std::ops::Neg for SignedLog<T> {
    type Output = Self;

    fn neg(self) -> Self {
        SignedLog {
            negative: !self.negative,
            ln_abs: self.ln_abs,
        }
    }
}

/// One product term: a sign and the logarithms of its factor magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm<T> {
    pub negative: bool,
    pub ln_factors: Vec<T>,
}

impl<T: Real> ProductTerm<T> {
    pub fn positive(ln_factors: Vec<T>) -> Self {
        ProductTerm {
            negative: false,
            ln_factors,
        }
    }

    pub fn negative(ln_factors: Vec<T>) -> Self {
        ProductTerm {
            negative: true,
            ln_factors,
        }
    }
}

/// Evaluates `Σ ± Π factors`. Fails with [`ModelError::Cancellation`] when
/// the positive and negative parts agree to within working precision.
pub fn log_domain_sum_of_products<T: Real>(terms: &[ProductTerm<T>]) -> Result<T> {
    let logs = terms.iter().map(|t| SignedLog {
        negative: t.negative,
        ln_abs: t.ln_factors.iter().copied().fold(T::zero(), |a, b| a + b),
    });
    Ok(log_domain_sum("log_domain_sum_of_products", logs)?.value())
}

/// Signed sum of log-encoded terms, returned log-encoded.
pub fn log_domain_sum<T: Real>(
    op: &'static str,
    terms: impl IntoIterator<Item = SignedLog<T>> + Clone,
) -> Result<SignedLog<T>> {
    let max = terms
        .clone()
        .into_iter()
        .map(|t| t.ln_abs)
        .fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return Ok(SignedLog::zero());
    }
    if max == T::infinity() || max.is_nan() {
        return Err(ModelError::domain(op, "non-finite term"));
    }
    let (mut pos, mut neg) = (T::zero(), T::zero());
    let mut n = 0u64;
    for t in terms {
        let v = (t.ln_abs - max).exp();
        if t.negative {
            neg += v;
        } else {
            pos += v;
        }
        n += 1;
    }
    let diff = pos - neg;
    let scale = pos + neg;
    if diff.abs() <= scale * T::epsilon() * T::from_count(n.max(2)) {
        return Err(ModelError::Cancellation { op });
    }
    Ok(SignedLog {
        negative: diff < T::zero(),
        ln_abs: max + diff.abs().ln(),
    })
}
