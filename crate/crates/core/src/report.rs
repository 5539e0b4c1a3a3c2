//! CSV output for the `analyze`, `simulate`, and `compare` commands.
//! Reals are written with six significant digits.

use std::io::Write;

use crate::error::{ModelError, Result};
use crate::simulator::{BatchSummary, SimOutcome};
use crate::solver::{AnalysisResult, NoStockoutResult};

/// Six significant digits, shortest form that reads back to the rounded
/// value. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    let exponent = rounded.abs().log10().floor();
    if (-5.0..15.0).contains(&exponent) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// One line of the `analyze` table. `capacity == None` marks the
/// unlimited-stock reference row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisRow {
    pub phi_req: Option<f64>,
    pub capacity: Option<u64>,
    pub lambda: f64,
    pub mean_stockout: f64,
    pub mean_wait: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl AnalysisRow {
    pub fn no_stockout(r: &NoStockoutResult<f64>) -> Self {
        AnalysisRow {
            phi_req: None,
            capacity: None,
            lambda: r.lambda,
            mean_stockout: 0.0,
            mean_wait: r.mean_wait,
            converged: true,
            iterations: 0,
            residual: 0.0,
        }
    }

    /// Failed solves keep the best iterate's rate and capacity.
    pub fn from_result(phi_req: f64, r: &Result<AnalysisResult<f64>>) -> Self {
        match r {
            Ok(a) => AnalysisRow {
                phi_req: Some(phi_req),
                capacity: Some(a.capacity),
                lambda: a.lambda,
                mean_stockout: a.mean_stockout,
                mean_wait: a.mean_wait,
                converged: a.converged,
                iterations: a.iterations,
                residual: a.residual,
            },
            Err(ModelError::NonConvergence {
                iterations,
                best_lambda,
                best_capacity,
                residual,
            }) => AnalysisRow {
                phi_req: Some(phi_req),
                capacity: Some(*best_capacity),
                lambda: *best_lambda,
                mean_stockout: f64::NAN,
                mean_wait: f64::NAN,
                converged: false,
                iterations: *iterations,
                residual: *residual,
            },
            Err(_) => AnalysisRow {
                phi_req: Some(phi_req),
                capacity: None,
                lambda: f64::NAN,
                mean_stockout: f64::NAN,
                mean_wait: f64::NAN,
                converged: false,
                iterations: 0,
                residual: f64::NAN,
            },
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> ModelError {
    ModelError::domain("report", e.to_string())
}

fn opt_sig(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), format_sig)
}

fn capacity_cell(c: Option<u64>) -> String {
    c.map_or_else(|| "inf".into(), |c| c.to_string())
}

pub const ANALYSIS_HEADER: [&str; 8] = [
    "phi_req",
    "C",
    "lambda_per_hour",
    "E_S_stockout_h",
    "E_W_h",
    "converged",
    "iterations",
    "residual",
];

pub fn write_analysis<W: Write>(rows: &[AnalysisRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ANALYSIS_HEADER).map_err(io_err)?;
    for r in rows {
        wr.write_record([
            opt_sig(r.phi_req),
            capacity_cell(r.capacity),
            format_sig(r.lambda),
            format_sig(r.mean_stockout),
            format_sig(r.mean_wait),
            r.converged.to_string(),
            r.iterations.to_string(),
            format_sig(r.residual),
        ])
        .map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}

pub const SIMULATION_HEADER: [&str; 10] = [
    "replication",
    "C",
    "E_W_h",
    "E_W_std_error_h",
    "wait_samples",
    "fill_rate",
    "utilization",
    "E_S_stockout_h",
    "failures",
    "units_delivered",
];

/// One row per replication, then an aggregate row labelled `mean`.
pub fn write_simulation<W: Write>(s: &BatchSummary, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SIMULATION_HEADER).map_err(io_err)?;
    for o in &s.outcomes {
        wr.write_record([
            o.replication.to_string(),
            s.capacity.to_string(),
            format_sig(o.mean_wait),
            String::new(),
            o.wait_samples.to_string(),
            format_sig(o.fill_rate),
            format_sig(1.0 - o.idle_fraction),
            format_sig(o.mean_stockout_delay),
            o.counts.failures.to_string(),
            o.counts.delivered.to_string(),
        ])
        .map_err(io_err)?;
    }
    let total = |f: fn(&SimOutcome) -> u64| s.outcomes.iter().map(f).sum::<u64>().to_string();
    wr.write_record([
        "mean".to_string(),
        s.capacity.to_string(),
        format_sig(s.mean_wait),
        format_sig(s.mean_wait_std_error),
        total(|o| o.wait_samples),
        format_sig(s.fill_rate),
        format_sig(1.0 - s.idle_fraction),
        format_sig(s.mean_stockout_delay),
        total(|o| o.counts.failures),
        total(|o| o.counts.delivered),
    ])
    .map_err(io_err)?;
    wr.flush().map_err(io_err)
}

/// Analytical and simulated results at the same capacity. The
/// unlimited-stock reference row carries no simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub analysis: AnalysisRow,
    pub simulation: Option<BatchSummary>,
}

impl ComparisonRow {
    /// `|analytic - simulated| / simulated` for the mean wait.
    pub fn relative_error(&self) -> f64 {
        self.simulation.as_ref().map_or(f64::NAN, |s| {
            ((self.analysis.mean_wait - s.mean_wait) / s.mean_wait).abs()
        })
    }
}

pub fn write_comparison<W: Write>(rows: &[ComparisonRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "phi_req",
        "C",
        "analytic_E_W_h",
        "sim_E_W_h",
        "sim_E_W_std_error_h",
        "rel_error",
        "sim_fill_rate",
        "sim_idle_fraction",
        "converged",
    ])
    .map_err(io_err)?;
    for r in rows {
        let sim = |f: fn(&BatchSummary) -> f64| r.simulation.as_ref().map_or(f64::NAN, f);
        wr.write_record([
            opt_sig(r.analysis.phi_req),
            capacity_cell(r.analysis.capacity),
            format_sig(r.analysis.mean_wait),
            format_sig(sim(|s| s.mean_wait)),
            format_sig(sim(|s| s.mean_wait_std_error)),
            format_sig(r.relative_error()),
            format_sig(sim(|s| s.fill_rate)),
            format_sig(sim(|s| s.idle_fraction)),
            r.analysis.converged.to_string(),
        ])
        .map_err(io_err)?;
    }
    wr.flush().map_err(io_err)
}
