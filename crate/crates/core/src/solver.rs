//! Fixed-point coupling of the queue (demand rate) and the depot (capacity
//! and stockout delay).
//!
//! For a trial demand rate `λ` the depot capacity is the smallest `C` meeting
//! the fill-rate requirement, which fixes the stockout delay, which fixes the
//! service time, which the queue turns back into a demand rate `g(λ)`.

use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::inventory::{fill_rate, min_capacity, StockoutModel};
use crate::queueing::{self, QueueInputs, QueueSolution};
use crate::scalar::Real;
use crate::scenario::ScenarioModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relaxation weight on the new iterate, in (0, 1].
    pub damping: T,
    /// Convergence threshold on `|λ - g(λ)| / λ`.
    pub rel_tol: T,
    pub max_iterations: usize,
    /// Refine `λ` by secant steps at the converged capacity.
    pub polish: bool,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            damping: T::lit(0.5),
            rel_tol: T::lit(1e-6).max(T::lit(64.0) * T::epsilon()),
            max_iterations: 200,
            polish: true,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    fn validate(&self) -> Result<()> {
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(ModelError::domain(
                "solver",
                format!("damping {} outside (0, 1]", self.damping),
            ));
        }
        if !(self.rel_tol > T::zero()) {
            return Err(ModelError::domain("solver", "tolerance must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(ModelError::domain("solver", "need at least one iteration"));
        }
        Ok(())
    }
}

/// Queue solution with unlimited depot stock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoStockoutResult<T> {
    pub lambda: T,
    pub p0: T,
    pub mean_service: T,
    pub mean_wait: T,
    pub mean_queue_wait: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisResult<T> {
    pub phi_req: T,
    pub capacity: u64,
    pub lambda: T,
    /// Fill rate actually delivered by `capacity` at `lambda`.
    pub phi_achieved: T,
    pub p0: T,
    pub mean_service: T,
    pub mean_stockout: T,
    pub mean_wait: T,
    pub mean_queue_wait: T,
    pub converged: bool,
    pub iterations: usize,
    /// `|λ - g(λ)| / λ` recomputed at the reported point.
    pub residual: T,
}

pub fn solve_no_stockout<T: Real>(model: &ScenarioModel<T>) -> Result<NoStockoutResult<T>> {
    let service = model.service(None);
    let dist = service.distribution();
    let q = QueueInputs::new(model.modules, model.alpha, &dist)?;
    let sol = queueing::solve(
        &q,
        T::zero(),
        service.travel.mean_outbound(),
        service.repair.mean(),
        service.travel.mean_inbound(),
    )?;
    Ok(NoStockoutResult {
        lambda: sol.lambda,
        p0: sol.p0,
        mean_service: service.mean(),
        mean_wait: sol.mean_wait,
        mean_queue_wait: sol.mean_queue_wait,
    })
}

#[derive(Debug, Clone, Copy)]
struct Evaluation<T> {
    capacity: u64,
    mean_stockout: T,
    mean_service: T,
    queue: QueueSolution<T>,
}

fn evaluate_at<T: Real>(
    model: &ScenarioModel<T>,
    lambda: T,
    capacity: u64,
) -> Result<Evaluation<T>> {
    let stockout = StockoutModel::new(lambda, model.beta, model.lead_time, capacity)?;
    let service = model.service(Some(stockout));
    let dist = service.distribution();
    let q = QueueInputs::new(model.modules, model.alpha, &dist)?;
    let queue = queueing::solve(
        &q,
        service.mean_stockout(),
        service.travel.mean_outbound(),
        service.repair.mean(),
        service.travel.mean_inbound(),
    )?;
    Ok(Evaluation {
        capacity,
        mean_stockout: service.mean_stockout(),
        mean_service: service.mean(),
        queue,
    })
}

fn evaluate<T: Real>(model: &ScenarioModel<T>, phi_req: T, lambda: T) -> Result<Evaluation<T>> {
    let c = min_capacity(phi_req, lambda, model.beta, model.lead_time)?;
    evaluate_at(model, lambda, c)
}

fn rel_residual<T: Real>(lambda: T, ev: &Evaluation<T>) -> T {
    (lambda - ev.queue.lambda) / lambda
}

struct Best<T> {
    lambda: T,
    capacity: u64,
    residual: T,
}

impl<T: Real> Best<T> {
    fn offer(&mut self, lambda: T, ev: &Evaluation<T>) {
        let r = rel_residual(lambda, ev).abs();
        if r < self.residual {
            *self = Best {
                lambda,
                capacity: ev.capacity,
                residual: r,
            };
        }
    }

    fn into_error(self, iterations: usize) -> ModelError {
        ModelError::NonConvergence {
            iterations,
            best_lambda: self.lambda.as_f64(),
            best_capacity: self.capacity,
            residual: self.residual.as_f64(),
        }
    }
}

/// Solves `λ = g(λ)` for one fill-rate requirement, starting from the
/// no-stockout demand rate.
pub fn solve_coupled<T: Real>(
    model: &ScenarioModel<T>,
    phi_req: T,
    opts: &SolverOptions<T>,
) -> Result<AnalysisResult<T>> {
    solve_coupled_from(model, phi_req, opts, None)
}

/// As [`solve_coupled`] with an explicit starting demand rate.
pub fn solve_coupled_from<T: Real>(
    model: &ScenarioModel<T>,
    phi_req: T,
    opts: &SolverOptions<T>,
    start: Option<T>,
) -> Result<AnalysisResult<T>> {
    opts.validate()?;
    if !(phi_req > T::zero() && phi_req < T::one()) {
        return Err(ModelError::domain(
            "solver",
            format!("fill-rate requirement {phi_req} outside (0, 1)"),
        ));
    }
    let mut lambda = match start {
        Some(l) if l > T::zero() && l.is_finite() => l,
        _ => solve_no_stockout(model)?.lambda,
    };
    let mut best = Best {
        lambda,
        capacity: 0,
        residual: T::infinity(),
    };
    let mut prev_capacity = None;
    let mut history: Vec<T> = Vec::new();
    let mut iterations = 0;
    let mut converged = None;
    let mut oscillated = false;

    while iterations < opts.max_iterations {
        iterations += 1;
        let ev = evaluate(model, phi_req, lambda)?;
        let r = rel_residual(lambda, &ev);
        best.offer(lambda, &ev);
        if r.abs() < opts.rel_tol && prev_capacity == Some(ev.capacity) {
            converged = Some(ev);
            break;
        }
        prev_capacity = Some(ev.capacity);
        history.push(r);
        if oscillating(&history) {
            log::debug!("fixed-point iteration oscillating at λ = {lambda}; bisecting");
            oscillated = true;
            break;
        }
        lambda = lambda - opts.damping * (lambda - ev.queue.lambda);
    }

    let (lambda, ev) = match converged {
        Some(ev) => (lambda, ev),
        None if oscillated => match bisect(model, phi_req, opts, &mut best, &mut iterations)? {
            Some(found) => found,
            None => return Err(best.into_error(iterations)),
        },
        None => return Err(best.into_error(iterations)),
    };

    let (lambda, ev) = if opts.polish {
        polish(model, phi_req, lambda, ev)?
    } else {
        (lambda, ev)
    };
    finish(model, phi_req, lambda, ev, iterations)
}

/// Residual sign flips on each of the last six iterates without shrinking.
fn oscillating<T: Real>(history: &[T]) -> bool {
    let k = 6;
    if history.len() < k {
        return false;
    }
    let tail = &history[history.len() - k..];
    let alternating = tail.windows(2).all(|w| w[0] * w[1] < T::zero());
    alternating && tail[k - 1].abs() > T::lit(0.5) * tail[k - 3].abs()
}

/// Bisection on `λ - g(λ)` over `(0, Nα]`. Returns `None` if the bracket
/// collapses onto a capacity jump without meeting the tolerance.
fn bisect<T: Real>(
    model: &ScenarioModel<T>,
    phi_req: T,
    opts: &SolverOptions<T>,
    best: &mut Best<T>,
    iterations: &mut usize,
) -> Result<Option<(T, Evaluation<T>)>> {
    let mut hi = T::from_count(model.modules as u64) * model.alpha;
    let mut lo = hi * T::lit(1e-6);
    let budget = *iterations + 200;
    while *iterations < budget {
        *iterations += 1;
        let mid = T::lit(0.5) * (lo + hi);
        let ev = evaluate(model, phi_req, mid)?;
        best.offer(mid, &ev);
        let r = rel_residual(mid, &ev);
        if r.abs() < opts.rel_tol {
            return Ok(Some((mid, ev)));
        }
        if r > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
    }
    Ok(None)
}

/// Secant refinement of `λ = g_C(λ)` with the capacity held fixed. Kept
/// only if the capacity stays optimal and the residual does not grow.
fn polish<T: Real>(
    model: &ScenarioModel<T>,
    phi_req: T,
    lambda: T,
    ev: Evaluation<T>,
) -> Result<(T, Evaluation<T>)> {
    let c = ev.capacity;
    let h = |l: T, e: &Evaluation<T>| l - e.queue.lambda;
    let (mut x0, mut h0) = (lambda, h(lambda, &ev));
    let mut x1 = ev.queue.lambda;
    let mut e1 = evaluate_at(model, x1, c)?;
    let mut h1 = h(x1, &e1);
    for _ in 0..8 {
        if h1.abs() <= T::lit(16.0) * T::epsilon() * x1 || h1 == h0 {
            break;
        }
        let x2 = x1 - h1 * (x1 - x0) / (h1 - h0);
        if !(x2 > T::zero()) || !x2.is_finite() {
            break;
        }
        x0 = x1;
        h0 = h1;
        x1 = x2;
        e1 = evaluate_at(model, x1, c)?;
        h1 = h(x1, &e1);
    }
    let base = h(lambda, &ev).abs() / lambda;
    let keep =
        h1.abs() / x1 <= base && min_capacity(phi_req, x1, model.beta, model.lead_time)? == c;
    if keep {
        Ok((x1, e1))
    } else {
        Ok((lambda, ev))
    }
}

fn finish<T: Real>(
    model: &ScenarioModel<T>,
    phi_req: T,
    lambda: T,
    ev: Evaluation<T>,
    iterations: usize,
) -> Result<AnalysisResult<T>> {
    // Polishing must not move λ across a capacity boundary.
    let capacity = min_capacity(phi_req, lambda, model.beta, model.lead_time)?;
    let ev = if capacity == ev.capacity {
        ev
    } else {
        evaluate_at(model, lambda, capacity)?
    };
    let residual = rel_residual(lambda, &ev).abs();
    let mean_wait = queueing::mean_wait(
        model.modules,
        model.alpha,
        lambda,
        model.travel.mean_inbound(),
    )?;
    Ok(AnalysisResult {
        phi_req,
        capacity,
        lambda,
        phi_achieved: fill_rate(capacity, lambda, model.beta, model.lead_time)?,
        p0: ev.queue.p0,
        mean_service: ev.mean_service,
        mean_stockout: ev.mean_stockout,
        mean_wait,
        mean_queue_wait: mean_wait
            - ev.mean_stockout
            - model.travel.mean_outbound()
            - model.repair.mean(),
        converged: true,
        iterations,
        residual,
    })
}

/// Solves each requirement from the no-stockout demand rate, in parallel.
///
/// The coupled equation can have several fixed points when the capacity
/// steps near one of them; every point starts from the same place so the
/// selected root never depends on the order of the list.
pub fn sweep<T: Real>(
    model: &ScenarioModel<T>,
    phi_reqs: &[T],
    opts: &SolverOptions<T>,
) -> Vec<Result<AnalysisResult<T>>> {
    let start = match solve_no_stockout(model) {
        Ok(r) => r.lambda,
        Err(e) => return phi_reqs.iter().map(|_| Err(e.clone())).collect(),
    };
    phi_reqs
        .par_iter()
        .map(|&phi| solve_coupled_from(model, phi, opts, Some(start)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn reference(mtbf: f64) -> ScenarioModel<f64> {
        ScenarioModel::from_config(&ScenarioConfig::reference(mtbf)).unwrap()
    }

    #[test]
    fn no_stockout_reference_wait() {
        let r = solve_no_stockout(&reference(20_000.0)).unwrap();
        assert!((r.mean_wait - 30.52).abs() < 0.05, "{}", r.mean_wait);
        assert!((r.lambda - 0.00249336).abs() < 1e-7);
    }

    #[test]
    fn coupled_solution_is_a_fixed_point() {
        let m = reference(20_000.0);
        let r = solve_coupled(&m, 0.95, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.residual < 1e-6);
        assert_eq!(r.capacity, 17);
        assert!(r.phi_achieved >= 0.95);
        assert!(fill_rate(r.capacity - 1, r.lambda, m.beta, m.lead_time).unwrap() < 0.95);
        let ev = evaluate(&m, 0.95, r.lambda).unwrap();
        assert!(((ev.queue.lambda - r.lambda) / r.lambda).abs() < 1e-6);
    }

    #[test]
    fn wait_exceeds_no_stockout_wait() {
        let m = reference(10_000.0);
        let base = solve_no_stockout(&m).unwrap();
        for r in sweep(&m, &[0.8, 0.9, 0.99], &SolverOptions::default()) {
            let r = r.unwrap();
            assert!(r.mean_wait > base.mean_wait);
            assert!(r.lambda < base.lambda);
        }
    }

    #[test]
    fn nearby_start_reaches_the_same_root() {
        let m = reference(20_000.0);
        let opts = SolverOptions::default();
        let cold = solve_coupled(&m, 0.99, &opts).unwrap();
        let warm = solve_coupled_from(&m, 0.99, &opts, Some(cold.lambda * 0.999)).unwrap();
        assert_eq!(warm.capacity, cold.capacity);
        assert!(((warm.lambda - cold.lambda) / cold.lambda).abs() < 1e-8);
        assert!(((warm.mean_wait - cold.mean_wait) / cold.mean_wait).abs() < 1e-8);
    }

    #[test]
    fn sweep_is_order_invariant() {
        let m = reference(4_000.0);
        let opts = SolverOptions::default();
        let up = sweep(&m, &[0.8, 0.85], &opts);
        let down = sweep(&m, &[0.85, 0.8], &opts);
        assert_eq!(up[1], down[0]);
        assert_eq!(up[0], down[1]);
    }

    #[test]
    fn capacity_step_can_admit_two_roots() {
        let m = reference(4_000.0);
        let opts = SolverOptions::default();
        let high = solve_coupled(&m, 0.85, &opts).unwrap();
        let low = solve_coupled_from(&m, 0.85, &opts, Some(0.0105)).unwrap();
        assert_eq!(high.capacity, 54);
        assert_eq!(low.capacity, 53);
        for r in [high, low] {
            assert!(r.residual < 1e-6);
        }
    }

    #[test]
    fn iteration_budget_exhaustion_reports_best_iterate() {
        let m = reference(20_000.0);
        let opts = SolverOptions {
            max_iterations: 1,
            ..SolverOptions::default()
        };
        match solve_coupled(&m, 0.95, &opts) {
            Err(ModelError::NonConvergence {
                iterations,
                best_lambda,
                ..
            }) => {
                assert_eq!(iterations, 1);
                assert!(best_lambda > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_requirement() {
        let m = reference(20_000.0);
        assert!(solve_coupled(&m, 1.0, &SolverOptions::default()).is_err());
        assert!(solve_coupled(&m, 0.0, &SolverOptions::default()).is_err());
    }
}
