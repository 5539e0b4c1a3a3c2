//! Semi-analytical performance model for an on-orbit servicing (OOS)
//! infrastructure: a single servicer repairing a finite population of
//! satellite modules (M/G/1/N/N queue), fed by an orbital spare depot run
//! under an order-up-to policy with exponential launch intervals and a fixed
//! lead time.
//!
//! The analytical side ([`distributions`], [`orbit`], [`queueing`],
//! [`inventory`], [`solver`]) is generic over the scalar type through
//! [`Real`]; `f64` aliases are exported at the crate root for the common case.
//! The [`simulator`] is a discrete-event model of the same concept of
//! operations and serves as the validation oracle.

// `!(x > 0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod inventory;
pub mod orbit;
pub mod queueing;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod simulator;
pub mod solver;

pub use error::{ModelError, Result};
pub use scalar::Real;

/// `f64` instantiations of the generic model types.
pub type LstDistribution = distributions::LstDistribution<f64>;
pub type DiscreteDuration = distributions::DiscreteDuration<f64>;
pub type OrbitConstants = orbit::OrbitConstants<f64>;
pub type PhasingSolution = orbit::PhasingSolution<f64>;
pub type QueueSolution = queueing::QueueSolution<f64>;
pub type StockoutModel = inventory::StockoutModel<f64>;
pub type ServiceTimeModel = scenario::ServiceTimeModel<f64>;
pub type ScenarioModel = scenario::ScenarioModel<f64>;
pub type AnalysisResult = solver::AnalysisResult<f64>;
pub type NoStockoutResult = solver::NoStockoutResult<f64>;
pub type SolverOptions = solver::SolverOptions<f64>;
