//! Order-up-to depot: fill rate, minimum capacity, and the stockout delay
//! fed back to the servicing queue.
//!
//! Demand is Poisson with the queue's throughput `lambda`; reviews happen at
//! exponential launch intervals (rate `beta`) and deliveries arrive a fixed
//! lead time `L` later. The stockout delay applies, with probability
//! `beta / lambda`, the excess `max(T_l + L - T_s, 0)` of the launch cycle
//! over the time `T_s ~ Erlang(C + 1, lambda)` needed to exhaust the depot.

use crate::distributions::{
    ln_factorial, ln_poisson_pmf, log_domain_sum, poisson_cdf, poisson_upper_tail, SignedLog,
};
use crate::error::{ModelError, Result};
use crate::scalar::{log_add_exp, Real};

fn check_rates<T: Real>(op: &'static str, lambda: T, beta: T, lead_time: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(ModelError::domain(
            op,
            format!("demand rate {lambda} must be > 0"),
        ));
    }
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(ModelError::domain(
            op,
            format!("launch rate {beta} must be > 0"),
        ));
    }
    if !(lead_time >= T::zero()) || !lead_time.is_finite() {
        return Err(ModelError::domain(
            op,
            format!("lead time {lead_time} must be >= 0"),
        ));
    }
    Ok(())
}

fn ln<T: Real>(x: T) -> T {
    x.ln()
}

/// Closed-form fill rate of the order-up-to policy with capacity `capacity`.
///
/// The `1 - e^{-λL} Σ` brackets are evaluated as directly summed Poisson
/// upper tails. For capacities far below lead-time demand the expression
/// goes negative (it charges backorders over a launch interval plus a lead
/// time against demand over one interval); it is only clamped when within
/// 1e-9 of `[0, 1]`.
pub fn fill_rate<T: Real>(capacity: u64, lambda: T, beta: T, lead_time: T) -> Result<T> {
    check_rates("fill_rate", lambda, beta, lead_time)?;
    let c = T::from_count(capacity);
    let lead_demand = lambda * lead_time;
    let mu = (beta + lambda) * lead_time;
    // e^{-λL} (λ/(β+λ))^C (λ/β) Σ_{j<=C} ((β+λ)L)^j / j!
    let t1 = SignedLog::positive(
        ln(lambda / beta)
            + beta * lead_time
            + c * ln(lambda / (beta + lambda))
            + ln(poisson_cdf(capacity, mu)),
    );
    // Lλ {1 - e^{-λL} Σ_{j<C} (λL)^j / j!}
    let t2 = SignedLog::positive(ln(lead_demand) + ln(poisson_upper_tail(capacity, lead_demand)));
    // (λ/β - C) {1 - e^{-λL} Σ_{j<=C} (λL)^j / j!}
    let t3 = SignedLog::from_value(lambda / beta - c)
        * SignedLog::positive(ln(poisson_upper_tail(capacity + 1, lead_demand)));
    let bracket = match log_domain_sum("fill_rate", [t1, t2, t3]) {
        Ok(b) => b.value(),
        Err(ModelError::Cancellation { .. }) => T::zero(),
        Err(e) => return Err(e),
    };
    let phi = T::one() - beta / lambda * bracket;
    let slack = T::lit(1e-9);
    if phi > T::one() {
        if phi > T::one() + slack {
            return Err(ModelError::domain(
                "fill_rate",
                format!("fill rate {phi} exceeds 1"),
            ));
        }
        return Ok(T::one());
    }
    if phi < T::zero() && phi > -slack {
        return Ok(T::zero());
    }
    Ok(phi)
}

/// Smallest capacity whose fill rate meets `phi_req`. Scans upward from zero.
pub fn min_capacity<T: Real>(phi_req: T, lambda: T, beta: T, lead_time: T) -> Result<u64> {
    if !(phi_req > T::zero() && phi_req < T::one()) {
        return Err(ModelError::domain(
            "min_capacity",
            format!("fill rate requirement {phi_req} outside (0, 1)"),
        ));
    }
    check_rates("min_capacity", lambda, beta, lead_time)?;
    // Far past any realistic answer: mean cycle demand plus a wide margin.
    let cycle = (lambda * lead_time + lambda / beta).as_f64();
    let limit = (cycle + 50.0 * cycle.sqrt() + 1_000.0) as u64;
    (0..=limit)
        .find_map(|c| match fill_rate(c, lambda, beta, lead_time) {
            Ok(phi) if phi >= phi_req => Some(Ok(c)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .unwrap_or_else(|| {
            Err(ModelError::domain(
                "min_capacity",
                format!("fill rate {phi_req} not reached below capacity {limit}"),
            ))
        })
}

/// Distribution of the extra service delay caused by a depot stockout.
#[derive(Debug, Clone, PartialEq)]
pub struct StockoutModel<T> {
    lambda: T,
    beta: T,
    lead_time: T,
    capacity: u64,
    /// Mixture weight `beta / lambda`, clamped to 1.
    weight: T,
}

impl<T: Real> StockoutModel<T> {
    pub fn new(lambda: T, beta: T, lead_time: T, capacity: u64) -> Result<Self> {
        check_rates("StockoutModel", lambda, beta, lead_time)?;
        let mut weight = beta / lambda;
        if weight > T::one() {
            log::warn!(
                "launch rate {beta} exceeds demand rate {lambda}; clamping stockout weight to 1"
            );
            weight = T::one();
        }
        Ok(StockoutModel {
            lambda,
            beta,
            lead_time,
            capacity,
            weight,
        })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn lead_time(&self) -> T {
        self.lead_time
    }

    /// Probability that a launch cycle's first out-of-stock demand is the
    /// one being served.
    pub fn weight(&self) -> T {
        self.weight
    }

    fn ln_capacity_ratio(&self) -> T {
        // (C + 1) ln(λ / (λ + β))
        T::from_count(self.capacity + 1) * (self.lambda / (self.lambda + self.beta)).ln()
    }

    /// `P(L <= T_s < T_l + L)`.
    fn exhausted_after_lead(&self) -> T {
        let mu = (self.lambda + self.beta) * self.lead_time;
        (self.beta * self.lead_time + self.ln_capacity_ratio()).exp()
            * poisson_cdf(self.capacity, mu)
    }

    /// `P(T_s >= T_l + L)`, summed as positive terms.
    fn never_exhausted(&self) -> T {
        let (l, b) = (self.lambda, self.beta);
        let mu = (l + b) * self.lead_time;
        let ln_head = (b / (b + l)).ln() + b * self.lead_time;
        let ln_ratio = (l / (b + l)).ln();
        let mut ln_cdf = T::neg_infinity();
        let mut total = T::zero();
        for n in 0..=self.capacity {
            ln_cdf = log_add_exp(ln_cdf, ln_poisson_pmf(n, mu));
            total += (ln_head + T::from_count(n) * ln_ratio + ln_cdf).exp();
        }
        total
    }

    /// `E[e^{-θ(L - T_s)}; T_s < L]`.
    fn exhausted_in_lead(&self, theta: T) -> T {
        let (l, lt, c) = (self.lambda, self.lead_time, self.capacity);
        if lt == T::zero() {
            return T::zero();
        }
        let cp1 = T::from_count(c + 1);
        let x = (l - theta) * lt;
        let ln_prefix = cp1 * (l * lt).ln() - ln_factorial::<T>(c);
        if x >= cp1 {
            // e^{-θL} (λ/(λ-θ))^{C+1} P(Pois(x) >= C+1); the tail is not small here.
            return (-theta * lt
                + cp1 * (l / (l - theta)).ln()
                + poisson_upper_tail(c + 1, x).ln())
            .exp();
        }
        if x >= T::zero() {
            // e^{-λL} (λL)^{C+1}/C! Σ_j x^j / ((C+1)...(C+1+j)), terms decreasing.
            let mut term = cp1.recip();
            let mut sum = term;
            let mut j = 0u64;
            while term > sum * T::epsilon() {
                j += 1;
                term *= x / (cp1 + T::from_count(j - 1) + T::one());
                sum += term;
            }
            return (-l * lt + ln_prefix + sum.ln()).exp();
        }
        // θ > λ: ∫_0^1 u^C e^{y u} du = Σ_j y^j / (j! (C+1+j)), y = -x.
        let y = -x;
        let ln_y = y.ln();
        let mut ln_sum = T::neg_infinity();
        let mut j = 0u64;
        loop {
            let jt = T::from_count(j);
            let ln_term = jt * ln_y - ln_factorial::<T>(j) - (cp1 + jt).ln();
            ln_sum = log_add_exp(ln_sum, ln_term);
            if jt > y && ln_term < ln_sum + T::epsilon().ln() {
                break;
            }
            j += 1;
        }
        (-theta * lt + ln_prefix + ln_sum).exp()
    }

    fn conditional_lst(&self, theta: T) -> T {
        let b = self.beta;
        b / (b + theta) * (self.exhausted_in_lead(theta) + self.exhausted_after_lead())
            + self.never_exhausted()
    }

    /// `E[e^{-θ S_stockout}]`, evaluated by conditioning on `T_s`; every
    /// term is nonnegative so there is no cancellation at or beyond `θ = λ`.
    pub fn lst(&self, theta: T) -> T {
        self.weight * self.conditional_lst(theta) + (T::one() - self.weight)
    }

    /// `1 - lst(θ)`, written as a sum of nonnegative pieces so it stays
    /// accurate as `θ -> 0`.
    pub fn lst_complement(&self, theta: T) -> T {
        let b = self.beta;
        let in_lead = self.exhausted_in_lead(theta);
        let in_lead_gap = (self.exhausted_in_lead(T::zero()) - in_lead).max(T::zero());
        let rest = theta / (b + theta) * (in_lead + self.exhausted_after_lead());
        (self.weight * (rest + in_lead_gap)).max(T::zero())
    }

    /// `E[S_stockout]` in hours.
    pub fn mean(&self) -> T {
        let (l, b, lt, c) = (self.lambda, self.beta, self.lead_time, self.capacity);
        let m = l * lt;
        // E[(1/β + L - T_s); T_s <= L] + E[(T_l - (T_s - L))^+; T_s > L]
        let in_lead = (b.recip() + lt) * poisson_upper_tail(c + 1, m)
            - T::from_count(c + 1) / l * poisson_upper_tail(c + 2, m);
        let after = self.exhausted_after_lead() / b;
        (self.weight * (in_lead.max(T::zero()) + after)).max(T::zero())
    }
}

/// See [`StockoutModel::lst`].
pub fn stockout_lst<T: Real>(
    theta: T,
    capacity: u64,
    lambda: T,
    beta: T,
    lead_time: T,
) -> Result<T> {
    if !(theta >= T::zero()) {
        return Err(ModelError::domain(
            "stockout_lst",
            format!("theta {theta} must be >= 0"),
        ));
    }
    Ok(StockoutModel::new(lambda, beta, lead_time, capacity)?.lst(theta))
}

/// See [`StockoutModel::mean`].
pub fn stockout_mean<T: Real>(capacity: u64, lambda: T, beta: T, lead_time: T) -> Result<T> {
    Ok(StockoutModel::new(lambda, beta, lead_time, capacity)?.mean())
}

/// `ln Σ_{i<=n} μ^i / i!` for `n = 0..=capacity`.
fn ln_partial_exp_sums<T: Real>(mu: T, capacity: u64) -> Vec<T> {
    let mut out = Vec::with_capacity(capacity as usize + 1);
    let mut acc = T::neg_infinity();
    for i in 0..=capacity {
        let ln_term = if mu == T::zero() {
            if i == 0 {
                T::zero()
            } else {
                T::neg_infinity()
            }
        } else {
            T::from_count(i) * mu.ln() - ln_factorial::<T>(i)
        };
        acc = log_add_exp(acc, ln_term);
        out.push(acc);
    }
    out
}

/// The stockout LST as the explicit double-sum closed form, evaluated as a
/// signed log-domain sum. Ill-conditioned near `θ = λ`; exactly at `θ = λ`
/// the average of `θ ± 1e-7 λ` is returned. Used to cross-check
/// [`stockout_lst`].
pub fn stockout_lst_closed_form<T: Real>(
    theta: T,
    capacity: u64,
    lambda: T,
    beta: T,
    lead_time: T,
) -> Result<T> {
    check_rates("stockout_lst_closed_form", lambda, beta, lead_time)?;
    if !(theta >= T::zero()) {
        return Err(ModelError::domain(
            "stockout_lst_closed_form",
            "theta must be >= 0",
        ));
    }
    if theta == lambda {
        let h = T::lit(1e-7) * lambda;
        let lo = stockout_lst_closed_form(theta - h, capacity, lambda, beta, lead_time)?;
        let hi = stockout_lst_closed_form(theta + h, capacity, lambda, beta, lead_time)?;
        return Ok((lo + hi) / T::lit(2.0));
    }
    let model = StockoutModel::new(lambda, beta, lead_time, capacity)?;
    let (l, b, lt) = (lambda, beta, lead_time);
    let d = l - theta;
    let d_negative = d < T::zero();
    let ln_d = d.abs().ln();
    let ln_sums = ln_partial_exp_sums((b + l) * lt, capacity);
    let cp1 = capacity + 1;
    let common = SignedLog {
        negative: d_negative && cp1 % 2 == 1,
        ln_abs: b.ln() - (b + theta).ln() + T::from_count(cp1) * (l.ln() - ln_d) - theta * lt,
    };
    let mut terms = Vec::with_capacity(2 * ln_sums.len() + 1);
    terms.push(common);
    for (n, &ln_s) in ln_sums.iter().enumerate() {
        let nt = T::from_count(n as u64);
        let inner = SignedLog {
            negative: d_negative && n % 2 == 1,
            ln_abs: -d * lt + (b + theta).ln() + nt * ln_d - (nt + T::one()) * (b + l).ln() + ln_s,
        };
        terms.push(-(common * inner));
        terms.push(SignedLog::positive(
            -l * lt + b.ln() + nt * l.ln() - (nt + T::one()) * (b + l).ln() + ln_s,
        ));
    }
    let conditional = log_domain_sum("stockout_lst_closed_form", terms)?.value();
    Ok(model.weight() * conditional + (T::one() - model.weight()))
}

/// Explicit closed form of `E[S_stockout]`, log-domain inner terms.
pub fn stockout_mean_closed_form<T: Real>(
    capacity: u64,
    lambda: T,
    beta: T,
    lead_time: T,
) -> Result<T> {
    let model = StockoutModel::new(lambda, beta, lead_time, capacity)?;
    let (l, b, lt) = (lambda, beta, lead_time);
    let ln_sums = ln_partial_exp_sums((b + l) * lt, capacity);
    let mut terms = vec![
        SignedLog::positive(lt.ln()),
        SignedLog::positive(-b.ln()),
        SignedLog::negative(T::from_count(capacity + 1).ln() - l.ln()),
    ];
    for (n, &ln_s) in ln_sums.iter().enumerate() {
        let nt = T::from_count(n as u64);
        terms.push(SignedLog::positive(
            T::from_count(capacity + 1 - n as u64).ln() - l * lt
                + b.ln()
                + (nt - T::one()) * l.ln()
                - (nt + T::one()) * (b + l).ln()
                + ln_s,
        ));
    }
    let bracket = log_domain_sum("stockout_mean_closed_form", terms)?.value();
    Ok(model.weight() * bracket)
}
