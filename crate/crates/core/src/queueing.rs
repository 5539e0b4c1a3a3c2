//! Finite-source single-server queue (M/G/1/N/N, the machine-repairman model
//! with general repair times), solved through the service-time LST.
//!
//! `N` modules each fail at rate `alpha` while operational; a failed module
//! re-enters the population only when its service (including the servicer's
//! return leg) completes.

use crate::distributions::{ln_binomial, LstDistribution};
use crate::error::{ModelError, Result};
use crate::scalar::{log_add_exp, sigmoid, Real};

#[derive(Debug, Clone)]
pub struct QueueInputs<'a, T: Real> {
    pub modules: u32,
    /// Per-module failure rate, 1/h.
    pub alpha: T,
    pub service: &'a LstDistribution<T>,
}

impl<'a, T: Real> QueueInputs<'a, T> {
    pub fn new(modules: u32, alpha: T, service: &'a LstDistribution<T>) -> Result<Self> {
        if modules == 0 {
            return Err(ModelError::domain("queue", "need at least one module"));
        }
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(ModelError::domain(
                "queue",
                format!("failure rate {alpha} must be > 0"),
            ));
        }
        let mean = service.mean();
        if !(mean > T::zero()) || !mean.is_finite() {
            return Err(ModelError::domain(
                "queue",
                format!("mean service time {mean} must be > 0"),
            ));
        }
        Ok(QueueInputs {
            modules,
            alpha,
            service,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueSolution<T> {
    /// Throughput = mean spare demand rate, 1/h.
    pub lambda: T,
    /// Long-run probability that the servicer is idle.
    pub p0: T,
    /// Mean time from failure to repair completion, h.
    pub mean_wait: T,
    /// Mean time in queue before the servicer takes the failure, h.
    pub mean_queue_wait: T,
}

/// `ln B_n` for `n = 0..N-1`, with `B_n = Π_{i<=n} (1 - L(iα)) / L(iα)`.
pub fn ln_b_coefficients<T: Real>(q: &QueueInputs<'_, T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(q.modules as usize);
    let mut acc = T::zero();
    out.push(acc);
    for i in 1..q.modules {
        let theta = T::from_count(i as u64) * q.alpha;
        let ln_l = q.service.ln_lst(theta);
        let c = q.service.lst_complement(theta);
        if !(ln_l.is_finite() && ln_l < T::zero()) || !(c > T::zero() && c <= T::one()) {
            return Err(ModelError::InvalidTransform {
                theta: theta.as_f64(),
                value: ln_l.exp().as_f64(),
            });
        }
        acc += c.ln() - ln_l;
        out.push(acc);
    }
    Ok(out)
}

/// `B_0..B_{N-1}`; may overflow for heavy traffic, where
/// [`ln_b_coefficients`] should be used instead.
pub fn b_coefficients<T: Real>(q: &QueueInputs<'_, T>) -> Result<Vec<T>> {
    Ok(ln_b_coefficients(q)?.into_iter().map(T::exp).collect())
}

/// `ln(N E[S] α Σ C(N-1, n) B_n)`, so that `P0 = 1 / (1 + e^x)`.
fn ln_busy_odds<T: Real>(q: &QueueInputs<'_, T>) -> Result<T> {
    let n1 = (q.modules - 1) as u64;
    let ln_sum = ln_b_coefficients(q)?
        .into_iter()
        .enumerate()
        .map(|(n, ln_b)| ln_binomial::<T>(n1, n as u64) + ln_b)
        .fold(T::neg_infinity(), log_add_exp);
    Ok(T::from_count(q.modules as u64).ln() + q.service.mean().ln() + q.alpha.ln() + ln_sum)
}

pub fn p0<T: Real>(q: &QueueInputs<'_, T>) -> Result<T> {
    Ok(sigmoid(-ln_busy_odds(q)?))
}

/// Throughput `(1 - P0) / E[S]`.
pub fn demand_rate<T: Real>(q: &QueueInputs<'_, T>) -> Result<T> {
    Ok(sigmoid(ln_busy_odds(q)?) / q.service.mean())
}

/// Mean time from failure to repair completion: `N/λ - 1/α - E[S_inbound]`.
pub fn mean_wait<T: Real>(modules: u32, alpha: T, lambda: T, mean_inbound: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(ModelError::domain(
            "mean_wait",
            format!("throughput {lambda} must be > 0"),
        ));
    }
    let w = T::from_count(modules as u64) / lambda - alpha.recip() - mean_inbound;
    let tol = T::lit(1e-9) * (T::from_count(modules as u64) / lambda);
    if w < -tol {
        return Err(ModelError::domain(
            "mean_wait",
            format!("negative mean wait {w}: inconsistent inputs"),
        ));
    }
    Ok(w.max(T::zero()))
}

/// Full solution given the breakdown of the service time into the stockout,
/// outbound, and repair portions (counted in the wait) and the inbound leg.
pub fn solve<T: Real>(
    q: &QueueInputs<'_, T>,
    mean_stockout: T,
    mean_outbound: T,
    mean_repair: T,
    mean_inbound: T,
) -> Result<QueueSolution<T>> {
    let x = ln_busy_odds(q)?;
    let lambda = sigmoid(x) / q.service.mean();
    let w = mean_wait(q.modules, q.alpha, lambda, mean_inbound)?;
    Ok(QueueSolution {
        lambda,
        p0: sigmoid(-x),
        mean_wait: w,
        mean_queue_wait: w - mean_stockout - mean_outbound - mean_repair,
    })
}
