//! Scenario configuration (JSON) and the service-time model built from it.

use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDuration, LstDistribution};
use crate::error::{ModelError, Result};
use crate::inventory::StockoutModel;
use crate::orbit::{
    build_travel_model_with, ConstellationGeometry, InboundAngle, OrbitConstants, TravelOptions,
};
use crate::scalar::Real;
use crate::simulator::SimConfig;
use crate::solver::SolverOptions;

/// Fill-rate requirements evaluated when none are given.
pub const DEFAULT_PHI_REQ: [f64; 7] = [0.8, 0.85, 0.9, 0.95, 0.99, 0.995, 0.999];

/// How outbound and inbound travel enter the service-time transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceComposition {
    /// One atom per satellite carrying that trip's outbound + inbound time.
    #[default]
    JointAtoms,
    /// Outbound and inbound treated as independent factors.
    ProductForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    pub r_target_km: f64,
    pub mu_km3_s2: f64,
    pub earth_radius_km: f64,
    pub h_crit_km: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        let c = OrbitConstants::<f64>::default();
        OrbitConfig {
            r_target_km: c.r_target,
            mu_km3_s2: c.mu,
            earth_radius_km: c.earth_radius,
            h_crit_km: c.h_crit,
        }
    }
}

impl OrbitConfig {
    pub fn constants<T: Real>(&self) -> OrbitConstants<T> {
        OrbitConstants {
            r_target: T::lit(self.r_target_km),
            mu: T::lit(self.mu_km3_s2),
            earth_radius: T::lit(self.earth_radius_km),
            h_crit: T::lit(self.h_crit_km),
        }
    }
}

/// Fixed-point solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub damping: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::<f64>::default();
        SolverConfig {
            damping: o.damping,
            rel_tol: o.rel_tol,
            max_iterations: o.max_iterations,
        }
    }
}

impl SolverConfig {
    pub fn options<T: Real>(&self) -> SolverOptions<T> {
        SolverOptions {
            damping: T::lit(self.damping),
            rel_tol: T::lit(self.rel_tol).max(T::lit(64.0) * T::epsilon()),
            max_iterations: self.max_iterations,
            polish: true,
        }
    }
}

/// Scenario description. Every field is optional in JSON; omitted fields
/// take the reference values (10 GEO satellites with 5 modules each, 4 h
/// repair, 2160 h lead time, 1213.4 h mean launch interval, 20000 h MTBF).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_satellites: u32,
    pub modules_per_satellite: u32,
    pub depot_index: u32,
    pub mtbf_hours: f64,
    pub mean_launch_interval_hours: f64,
    pub lead_time_hours: f64,
    pub repair_time_hours: f64,
    pub pre_trip_hours: f64,
    pub post_trip_hours: f64,
    pub orbit: OrbitConfig,
    pub phi_req: Vec<f64>,
    pub service_composition: ServiceComposition,
    pub inbound_angle: InboundAngle,
    pub solver: SolverConfig,
    pub simulation: SimConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_satellites: 10,
            modules_per_satellite: 5,
            depot_index: 0,
            mtbf_hours: 20_000.0,
            mean_launch_interval_hours: 1_213.4,
            lead_time_hours: 2_160.0,
            repair_time_hours: 4.0,
            pre_trip_hours: 0.0,
            post_trip_hours: 0.0,
            orbit: OrbitConfig::default(),
            phi_req: DEFAULT_PHI_REQ.to_vec(),
            service_composition: ServiceComposition::default(),
            inbound_angle: InboundAngle::default(),
            solver: SolverConfig::default(),
            simulation: SimConfig::default(),
        }
    }
}

fn config_err(path: impl Into<String>, reason: impl Into<String>) -> ModelError {
    ModelError::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    /// Reference scenario with the given module MTBF.
    pub fn reference(mtbf_hours: f64) -> Self {
        ScenarioConfig {
            mtbf_hours,
            ..Default::default()
        }
    }

    /// Parses and validates a JSON document. Errors carry the offending
    /// field path.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry(&self) -> ConstellationGeometry {
        ConstellationGeometry {
            n_satellites: self.n_satellites,
            modules_per_satellite: self.modules_per_satellite,
            depot_index: self.depot_index,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_satellites == 0 {
            return Err(config_err("n_satellites", "must be >= 1"));
        }
        if self.modules_per_satellite == 0 {
            return Err(config_err("modules_per_satellite", "must be >= 1"));
        }
        if self.depot_index >= self.n_satellites {
            return Err(config_err(
                "depot_index",
                "must index an existing satellite",
            ));
        }
        let positive = [
            ("mtbf_hours", self.mtbf_hours),
            (
                "mean_launch_interval_hours",
                self.mean_launch_interval_hours,
            ),
            ("orbit.r_target_km", self.orbit.r_target_km),
            ("orbit.mu_km3_s2", self.orbit.mu_km3_s2),
            ("orbit.earth_radius_km", self.orbit.earth_radius_km),
            ("orbit.h_crit_km", self.orbit.h_crit_km),
        ];
        for (path, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(config_err(path, format!("must be finite and > 0, got {v}")));
            }
        }
        let nonneg = [
            ("lead_time_hours", self.lead_time_hours),
            ("repair_time_hours", self.repair_time_hours),
            ("pre_trip_hours", self.pre_trip_hours),
            ("post_trip_hours", self.post_trip_hours),
        ];
        for (path, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(config_err(
                    path,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        for (i, &p) in self.phi_req.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(config_err(
                    format!("phi_req[{i}]"),
                    format!("{p} outside (0, 1)"),
                ));
            }
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            return Err(config_err("solver.damping", "must lie in (0, 1]"));
        }
        if !(self.solver.rel_tol > 0.0) {
            return Err(config_err("solver.rel_tol", "must be > 0"));
        }
        if self.solver.max_iterations == 0 {
            return Err(config_err("solver.max_iterations", "must be >= 1"));
        }
        self.simulation
            .validate()
            .map_err(|reason| config_err("simulation", reason))?;
        Ok(())
    }
}

/// Outbound and inbound travel distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum TravelTimes<T: Real> {
    /// Paired legs: one atom per trip holding outbound + inbound.
    Joint {
        round_trip: DiscreteDuration<T>,
        mean_outbound: T,
        mean_inbound: T,
    },
    Independent {
        outbound: DiscreteDuration<T>,
        inbound: DiscreteDuration<T>,
    },
}

impl<T: Real> TravelTimes<T> {
    pub fn mean_outbound(&self) -> T {
        match self {
            TravelTimes::Joint { mean_outbound, .. } => *mean_outbound,
            TravelTimes::Independent { outbound, .. } => outbound.mean(),
        }
    }

    pub fn mean_inbound(&self) -> T {
        match self {
            TravelTimes::Joint { mean_inbound, .. } => *mean_inbound,
            TravelTimes::Independent { inbound, .. } => inbound.mean(),
        }
    }

    fn factors(&self) -> Vec<LstDistribution<T>> {
        match self {
            TravelTimes::Joint { round_trip, .. } => {
                vec![LstDistribution::Discrete(round_trip.clone())]
            }
            TravelTimes::Independent { outbound, inbound } => vec![
                LstDistribution::Discrete(outbound.clone()),
                LstDistribution::Discrete(inbound.clone()),
            ],
        }
    }
}

/// `S = S_stockout + S_outbound + S_repair + S_inbound`.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceTimeModel<T: Real> {
    pub stockout: Option<StockoutModel<T>>,
    pub travel: TravelTimes<T>,
    pub repair: LstDistribution<T>,
}

impl<T: Real> ServiceTimeModel<T> {
    pub fn mean_stockout(&self) -> T {
        self.stockout
            .as_ref()
            .map_or(T::zero(), StockoutModel::mean)
    }

    pub fn mean(&self) -> T {
        self.mean_stockout()
            + self.travel.mean_outbound()
            + self.repair.mean()
            + self.travel.mean_inbound()
    }

    /// The composite distribution handed to the queue.
    pub fn distribution(&self) -> LstDistribution<T> {
        let mut factors = self.travel.factors();
        factors.push(self.repair.clone());
        if let Some(s) = &self.stockout {
            factors.push(LstDistribution::Stockout(s.clone()));
        }
        LstDistribution::Sum(factors)
    }
}

/// Model parameters in the scalar type of the analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioModel<T: Real> {
    pub modules: u32,
    /// Module failure rate `1 / MTBF`.
    pub alpha: T,
    /// Launch rate `1 / mean launch interval`.
    pub beta: T,
    pub lead_time: T,
    pub travel: TravelTimes<T>,
    pub repair: LstDistribution<T>,
}

impl<T: Real> ScenarioModel<T> {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let consts = cfg.orbit.constants::<T>();
        let opts = TravelOptions {
            inbound_angle: cfg.inbound_angle,
            pre_trip: T::lit(cfg.pre_trip_hours),
            post_trip: T::lit(cfg.post_trip_hours),
        };
        let atoms = build_travel_model_with(&cfg.geometry(), &consts, &opts)?;
        let travel = match cfg.service_composition {
            ServiceComposition::JointAtoms => TravelTimes::Joint {
                round_trip: DiscreteDuration::new(
                    atoms
                        .iter()
                        .map(|a| (a.outbound + a.inbound, a.weight))
                        .collect(),
                )?,
                mean_outbound: DiscreteDuration::new(
                    atoms.iter().map(|a| (a.outbound, a.weight)).collect(),
                )?
                .mean(),
                mean_inbound: DiscreteDuration::new(
                    atoms.iter().map(|a| (a.inbound, a.weight)).collect(),
                )?
                .mean(),
            },
            ServiceComposition::ProductForm => TravelTimes::Independent {
                outbound: DiscreteDuration::new(
                    atoms.iter().map(|a| (a.outbound, a.weight)).collect(),
                )?,
                inbound: DiscreteDuration::new(
                    atoms.iter().map(|a| (a.inbound, a.weight)).collect(),
                )?,
            },
        };
        Ok(ScenarioModel {
            modules: cfg.geometry().modules(),
            alpha: T::lit(cfg.mtbf_hours).recip(),
            beta: T::lit(cfg.mean_launch_interval_hours).recip(),
            lead_time: T::lit(cfg.lead_time_hours),
            travel,
            repair: LstDistribution::point_mass(T::lit(cfg.repair_time_hours))?,
        })
    }

    pub fn service(&self, stockout: Option<StockoutModel<T>>) -> ServiceTimeModel<T> {
        ServiceTimeModel {
            stockout,
            travel: self.travel.clone(),
            repair: self.repair.clone(),
        }
    }
}
