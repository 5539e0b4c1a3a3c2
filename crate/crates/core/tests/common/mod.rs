//! Independent reference computations shared by the integration tests and
//! the acceptance suite. The oracles in this file never call into the
//! crate's numerics.

#![allow(dead_code)]

pub mod suites;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma};
use statrs::function::gamma::ln_gamma;

/// Adaptive Simpson on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Integral over consecutive panels with the given breakpoints.
pub fn integrate_panels(f: &dyn Fn(f64) -> f64, points: &[f64], tol: f64) -> f64 {
    points
        .windows(2)
        .map(|w| integrate(f, w[0], w[1], tol))
        .sum()
}

pub fn poisson_ln_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    k as f64 * mean.ln() - mean - ln_gamma(k as f64 + 1.0)
}

/// `E[(X - c)^+]` for `X ~ Poisson(mean)`, summed over whichever side has
/// no cancellation.
pub fn poisson_excess(c: u64, mean: f64) -> f64 {
    if (c as f64) >= mean {
        let mut s = 0.0;
        let mut k = c + 1;
        loop {
            let t = (k - c) as f64 * poisson_ln_pmf(k, mean).exp();
            s += t;
            if k as f64 > mean && t < 1e-18 * s.max(1e-300) {
                break;
            }
            k += 1;
        }
        s
    } else {
        let below: f64 = (0..c)
            .map(|k| (c - k) as f64 * poisson_ln_pmf(k, mean).exp())
            .sum();
        mean - c as f64 + below
    }
}

/// Fill rate as one minus expected end-of-cycle backorders over expected
/// cycle demand, integrating over the exponential review interval.
pub fn fill_rate_oracle(c: u64, lambda: f64, beta: f64, lead: f64) -> f64 {
    let f = |t: f64| beta * (-beta * t).exp() * poisson_excess(c, lambda * (lead + t));
    let points: Vec<f64> = (0..=80).map(|k| k as f64 * 0.5 / beta).collect();
    let short = integrate_panels(&f, &points, 1e-15);
    1.0 - beta / lambda * short
}

fn erlang_pdf(s: f64, shape: u64, rate: f64) -> f64 {
    if s <= 0.0 {
        return if shape == 1 { rate } else { 0.0 };
    }
    let k = shape as f64;
    (k * rate.ln() + (k - 1.0) * s.ln() - rate * s - ln_gamma(k)).exp()
}

fn erlang_breakpoints(shape: u64, rate: f64, lead: f64) -> Vec<f64> {
    let mean = shape as f64 / rate;
    let sd = (shape as f64).sqrt() / rate;
    let hi = mean + 40.0 * sd + 40.0 / rate;
    let mut pts: Vec<f64> = (0..=200).map(|i| hi * i as f64 / 200.0).collect();
    pts.push(lead);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.retain(|&x| x <= hi);
    pts
}

/// Stockout delay: with probability `min(β/λ, 1)` it is
/// `max(T_l + L - T_s, 0)`, `T_l ~ Exp(β)`, `T_s ~ Erlang(C+1, λ)`;
/// otherwise zero. Transform by conditioning on `T_s`.
pub fn stockout_lst_oracle(theta: f64, c: u64, lambda: f64, beta: f64, lead: f64) -> f64 {
    let p = (beta / lambda).min(1.0);
    let cond = |s: f64| {
        let e = if s <= lead {
            beta / (beta + theta) * (-theta * (lead - s)).exp()
        } else {
            let survive = (-beta * (s - lead)).exp();
            (1.0 - survive) + survive * beta / (beta + theta)
        };
        e * erlang_pdf(s, c + 1, lambda)
    };
    let inner = integrate_panels(&cond, &erlang_breakpoints(c + 1, lambda, lead), 1e-14);
    p * inner + 1.0 - p
}

pub fn stockout_mean_oracle(c: u64, lambda: f64, beta: f64, lead: f64) -> f64 {
    let p = (beta / lambda).min(1.0);
    let cond = |s: f64| {
        let e = if s <= lead {
            1.0 / beta + lead - s
        } else {
            (-beta * (s - lead)).exp() / beta
        };
        e * erlang_pdf(s, c + 1, lambda)
    };
    p * integrate_panels(&cond, &erlang_breakpoints(c + 1, lambda, lead), 1e-12)
}

pub struct MonteCarlo {
    pub mean: f64,
    pub mean_se: f64,
    pub lst: f64,
    pub lst_se: f64,
}

pub fn stockout_monte_carlo(
    theta: f64,
    c: u64,
    lambda: f64,
    beta: f64,
    lead: f64,
    n: usize,
    seed: u64,
) -> MonteCarlo {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = (beta / lambda).min(1.0);
    let launch = Exp::new(beta).unwrap();
    let exhaust = Gamma::new((c + 1) as f64, 1.0 / lambda).unwrap();
    let (mut s1, mut s2, mut l1, mut l2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let x = if rng.random::<f64>() < p {
            (launch.sample(&mut rng) + lead - exhaust.sample(&mut rng)).max(0.0)
        } else {
            0.0
        };
        let e = (-theta * x).exp();
        s1 += x;
        s2 += x * x;
        l1 += e;
        l2 += e * e;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let lst = l1 / nf;
    MonteCarlo {
        mean,
        mean_se: ((s2 / nf - mean * mean) / nf).sqrt(),
        lst,
        lst_se: ((l2 / nf - lst * lst) / nf).sqrt(),
    }
}

/// Machine-repairman chain with exponential repairs: returns the idle
/// probability and throughput from the birth-death balance equations.
pub fn machine_repair_ctmc(modules: u32, alpha: f64, mu: f64) -> (f64, f64) {
    let n = modules as usize;
    let mut w = vec![1.0f64; n + 1];
    for k in 1..=n {
        w[k] = w[k - 1] * (n - k + 1) as f64 * alpha / mu;
    }
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    let throughput = alpha
        * p.iter()
            .enumerate()
            .map(|(k, pk)| (n - k) as f64 * pk)
            .sum::<f64>();
    (p[0], throughput)
}

/// Published semi-analytical and simulated results: (MTBF, Φ_req, C,
/// model E[W], simulated E[W]).
pub const PUBLISHED: [(f64, f64, u64, f64, f64); 21] = [
    (20_000.0, 0.8, 12, 306.1, 406.4),
    (20_000.0, 0.85, 13, 232.1, 278.5),
    (20_000.0, 0.9, 15, 140.5, 151.9),
    (20_000.0, 0.95, 17, 91.5, 94.2),
    (20_000.0, 0.99, 23, 41.3, 42.1),
    (20_000.0, 0.995, 25, 36.6, 36.6),
    (20_000.0, 0.999, 31, 31.6, 31.4),
    (10_000.0, 0.8, 22, 330.1, 437.9),
    (10_000.0, 0.85, 24, 245.7, 315.9),
    (10_000.0, 0.9, 27, 171.3, 185.0),
    (10_000.0, 0.95, 32, 96.6, 96.0),
    (10_000.0, 0.99, 42, 48.4, 47.5),
    (10_000.0, 0.995, 47, 41.4, 40.9),
    (10_000.0, 0.999, 57, 36.8, 36.5),
    (4_000.0, 0.8, 48, 449.4, 603.9),
    (4_000.0, 0.85, 54, 323.5, 399.9),
    (4_000.0, 0.9, 61, 233.6, 271.6),
    (4_000.0, 0.95, 73, 143.4, 149.7),
    (4_000.0, 0.99, 98, 81.7, 81.0),
    (4_000.0, 0.995, 109, 73.5, 72.9),
    (4_000.0, 0.999, 134, 67.2, 68.8),
];

/// Published unlimited-stock mean waits: (MTBF, E[W]).
pub const PUBLISHED_NO_STOCKOUT: [(f64, f64); 3] =
    [(20_000.0, 30.5), (10_000.0, 35.5), (4_000.0, 65.8)];
