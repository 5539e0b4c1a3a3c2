//! Discrete-event simulation of the servicing system: Poisson module
//! failures, one servicer working FCFS, and a depot replenished by launches
//! at exponential review epochs with a fixed lead time.
//!
//! The simulator works in `f64` only. Each replication draws from its own
//! ChaCha stream (`seed`, stream = replication index), so batch results do
//! not depend on thread scheduling.

mod engine;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::orbit::{build_travel_model_with, TravelOptions};
use crate::scenario::ScenarioConfig;

pub use engine::{DepotState, EventKind, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub horizon_hours: f64,
    /// Statistics ignore failures before this time.
    pub warmup_hours: f64,
    pub replications: u32,
    pub seed: u64,
    /// Cap each launch at the depot capacity.
    pub rocket_capacity_enforced: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon_hours: 200_000.0,
            warmup_hours: 0.0,
            replications: 500,
            seed: 1,
            rocket_capacity_enforced: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.horizon_hours > 0.0) || !self.horizon_hours.is_finite() {
            return Err(format!(
                "horizon_hours {} must be finite and > 0",
                self.horizon_hours
            ));
        }
        if !(self.warmup_hours >= 0.0 && self.warmup_hours < self.horizon_hours) {
            return Err(format!(
                "warmup_hours {} must lie in [0, horizon)",
                self.warmup_hours
            ));
        }
        if self.replications == 0 {
            return Err("replications must be >= 1".into());
        }
        Ok(())
    }
}

/// Physical parameters of one simulated system.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub modules_per_satellite: u32,
    /// Outbound leg per satellite, h.
    pub outbound: Vec<f64>,
    /// Inbound leg per satellite, h.
    pub inbound: Vec<f64>,
    pub repair_time: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lead_time: f64,
    pub capacity: u64,
}

impl SimScenario {
    pub fn from_config(cfg: &ScenarioConfig, capacity: u64) -> Result<Self> {
        cfg.validate()?;
        let opts = TravelOptions {
            inbound_angle: cfg.inbound_angle,
            pre_trip: cfg.pre_trip_hours,
            post_trip: cfg.post_trip_hours,
        };
        let atoms = build_travel_model_with(&cfg.geometry(), &cfg.orbit.constants::<f64>(), &opts)?;
        Ok(SimScenario {
            modules_per_satellite: cfg.modules_per_satellite,
            outbound: atoms.iter().map(|a| a.outbound).collect(),
            inbound: atoms.iter().map(|a| a.inbound).collect(),
            repair_time: cfg.repair_time_hours,
            alpha: cfg.mtbf_hours.recip(),
            beta: cfg.mean_launch_interval_hours.recip(),
            lead_time: cfg.lead_time_hours,
            capacity,
        })
    }

    pub fn modules(&self) -> u32 {
        self.modules_per_satellite * self.outbound.len() as u32
    }

    fn validate(&self) -> Result<()> {
        let bad = |r: &str| Err(ModelError::domain("simulation", r.to_string()));
        if self.outbound.is_empty() || self.outbound.len() != self.inbound.len() {
            return bad("need one outbound and one inbound time per satellite");
        }
        if self.modules_per_satellite == 0 {
            return bad("need at least one module per satellite");
        }
        let times = self
            .outbound
            .iter()
            .chain(&self.inbound)
            .chain([&self.repair_time, &self.lead_time]);
        if times.into_iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return bad("durations must be finite and >= 0");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return bad("failure and launch rates must be > 0");
        }
        Ok(())
    }
}

/// Flow balances that every replication must satisfy at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConservationCounts {
    pub failures: u64,
    pub repairs_completed: u64,
    pub queued_at_end: u64,
    pub in_service_at_end: u64,
    pub initial_stock: u64,
    pub launched: u64,
    pub delivered: u64,
    pub consumed: u64,
    pub on_hand_at_end: u64,
    pub on_order_at_end: u64,
}

impl ConservationCounts {
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.failures != self.repairs_completed + self.queued_at_end + self.in_service_at_end {
            return Err(format!("module balance broken: {self:?}"));
        }
        if self.initial_stock + self.delivered != self.on_hand_at_end + self.consumed {
            return Err(format!("stock balance broken: {self:?}"));
        }
        if self.launched != self.delivered + self.on_order_at_end {
            return Err(format!("pipeline balance broken: {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOutcome {
    pub replication: u32,
    /// Mean failure-to-repair time over repairs counted in the window; NaN
    /// if there were none.
    pub mean_wait: f64,
    pub wait_samples: u64,
    pub demands: u64,
    pub filled: u64,
    pub fill_rate: f64,
    /// Fraction of the window the servicer sat at the depot with no work.
    pub idle_fraction: f64,
    pub demand_rate: f64,
    /// Mean wait for stock per demand, h.
    pub mean_stockout_delay: f64,
    pub counts: ConservationCounts,
}

/// Aggregate over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub capacity: u64,
    pub outcomes: Vec<SimOutcome>,
    pub mean_wait: f64,
    /// Standard error of `mean_wait` across replications.
    pub mean_wait_std_error: f64,
    pub fill_rate: f64,
    pub idle_fraction: f64,
    pub demand_rate: f64,
    pub mean_stockout_delay: f64,
}

pub fn run_replication(scn: &SimScenario, cfg: &SimConfig, replication: u32) -> Result<SimOutcome> {
    scn.validate()?;
    engine::run(scn, cfg, replication, None)
}

/// As [`run_replication`], also returning one record per processed event.
pub fn run_replication_traced(
    scn: &SimScenario,
    cfg: &SimConfig,
    replication: u32,
) -> Result<(SimOutcome, Vec<TraceRecord>)> {
    scn.validate()?;
    let mut trace = Vec::new();
    let out = engine::run(scn, cfg, replication, Some(&mut trace))?;
    Ok((out, trace))
}

pub fn write_trace_csv<W: std::io::Write>(records: &[TraceRecord], w: W) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()
}

/// Runs `cfg.replications` independent replications in parallel.
pub fn run_batch(scn: &SimScenario, cfg: &SimConfig) -> Result<BatchSummary> {
    cfg.validate().map_err(|reason| ModelError::Config {
        path: "simulation".into(),
        reason,
    })?;
    scn.validate()?;
    let outcomes = (0..cfg.replications)
        .into_par_iter()
        .map(|i| engine::run(scn, cfg, i, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(scn.capacity, outcomes))
}

fn summarize(capacity: u64, outcomes: Vec<SimOutcome>) -> BatchSummary {
    let waits: Vec<f64> = outcomes
        .iter()
        .map(|o| o.mean_wait)
        .filter(|w| w.is_finite())
        .collect();
    let n = waits.len() as f64;
    let mean_wait = waits.iter().sum::<f64>() / n;
    let se = if waits.len() > 1 {
        let var = waits.iter().map(|w| (w - mean_wait).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    let demands: u64 = outcomes.iter().map(|o| o.demands).sum();
    let filled: u64 = outcomes.iter().map(|o| o.filled).sum();
    let reps = outcomes.len() as f64;
    let avg = |f: fn(&SimOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / reps;
    let delay = outcomes
        .iter()
        .map(|o| o.mean_stockout_delay * o.demands as f64)
        .sum::<f64>()
        / demands as f64;
    BatchSummary {
        capacity,
        mean_wait,
        mean_wait_std_error: se,
        fill_rate: filled as f64 / demands as f64,
        idle_fraction: avg(|o| o.idle_fraction),
        demand_rate: avg(|o| o.demand_rate),
        mean_stockout_delay: delay,
        outcomes,
    }
}
