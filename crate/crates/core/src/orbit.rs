//! Phasing-maneuver travel times on a circular orbit, and the discrete
//! outbound/inbound travel distribution for an evenly spaced constellation
//! with a collocated depot.
//!
//! The servicer enters a phasing orbit of semimajor axis `a`, flies `k1`
//! revolutions while the target flies `k2` revolutions plus the phase gap,
//! and meets it. Travel time depends only on `k2`; `a` must keep the phasing
//! orbit's perigee above `h_crit`.

use serde::{Deserialize, Serialize};

use crate::distributions::Weight;
use crate::error::{ModelError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConstants<T> {
    /// Radius of the circular target orbit, km.
    pub r_target: T,
    /// Gravitational parameter, km^3/s^2.
    pub mu: T,
    /// Earth radius, km.
    pub earth_radius: T,
    /// Minimum phasing-orbit altitude, km.
    pub h_crit: T,
}

impl<T: Real> Default for OrbitConstants<T> {
    fn default() -> Self {
        OrbitConstants {
            r_target: T::lit(42_164.0),
            mu: T::lit(398_600.441_8),
            earth_radius: T::lit(6_378.14),
            h_crit: T::lit(10_000.0),
        }
    }
}

impl<T: Real> OrbitConstants<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_target", self.r_target),
            ("mu", self.mu),
            ("earth_radius", self.earth_radius),
            ("h_crit", self.h_crit),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(ModelError::domain(
                    "OrbitConstants",
                    format!("{name} = {v} must be > 0"),
                ));
            }
        }
        Ok(())
    }

    /// `sqrt(r^3 / mu)` in hours: the target orbit's period divided by 2π.
    pub fn time_per_radian(&self) -> T {
        (self.r_target.powi(3) / self.mu).sqrt() / T::lit(3600.0)
    }

    /// Lower bound on the phasing orbit semimajor axis.
    pub fn min_semimajor_axis(&self) -> T {
        (self.r_target + self.earth_radius + self.h_crit) / T::lit(2.0)
    }

    /// Semimajor axis of the phasing orbit for `k1` servicer revolutions and
    /// `k2` target revolutions.
    pub fn semimajor_axis(&self, delta_theta: T, k1: u32, k2: u32) -> T {
        let tau = T::TAU();
        let ratio =
            (delta_theta + tau * T::from_count(k2 as u64)) / (tau * T::from_count(k1 as u64));
        ratio.powf(T::lit(2.0 / 3.0)) * self.r_target
    }

    fn feasible(&self, a: T) -> bool {
        a >= self.min_semimajor_axis()
    }
}

/// Revolution counts of a phasing solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasingRevolutions {
    /// Revolutions flown by the servicer on the phasing orbit (`k1 >= 1`).
    pub servicer: u32,
    /// Full revolutions flown by the target before rendezvous (`k2 >= 0`).
    pub target: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasingSolution<T> {
    pub delta_theta: T,
    /// `None` when no maneuver is needed (`delta_theta == 0`).
    pub revolutions: Option<PhasingRevolutions>,
    /// Semimajor axis of the phasing orbit, km (`r_target` when no maneuver).
    pub semimajor_axis: T,
    /// Hours.
    pub t_travel: T,
}

fn check_angle<T: Real>(delta_theta: T) -> Result<()> {
    if !(delta_theta >= T::zero() && delta_theta < T::TAU()) {
        return Err(ModelError::domain(
            "phasing_travel_time",
            format!("phase angle {delta_theta} outside [0, 2π)"),
        ));
    }
    Ok(())
}

/// All servicer revolution counts that satisfy the altitude floor for the
/// given target revolution count, in increasing order.
pub fn feasible_servicer_revolutions<T: Real>(
    delta_theta: T,
    target_revs: u32,
    consts: &OrbitConstants<T>,
) -> Vec<u32> {
    // a decreases in k1, so the feasible set is a prefix 1..=k1_max.
    (1..)
        .take_while(|&k1| consts.feasible(consts.semimajor_axis(delta_theta, k1, target_revs)))
        .collect()
}

/// Minimum-time phasing maneuver across `delta_theta` radians.
///
/// Picks the smallest `k2` admitting a feasible `k1`; among feasible `k1`
/// the one keeping `a` closest to `r_target` is reported (travel time does not
/// depend on it).
pub fn phasing_travel_time<T: Real>(
    delta_theta: T,
    consts: &OrbitConstants<T>,
) -> Result<PhasingSolution<T>> {
    consts.validate()?;
    check_angle(delta_theta)?;
    if delta_theta == T::zero() {
        return Ok(PhasingSolution {
            delta_theta,
            revolutions: None,
            semimajor_axis: consts.r_target,
            t_travel: T::zero(),
        });
    }
    // k1 = 1 gives the largest a, so it decides feasibility of each k2.
    let mut k2 = 0u32;
    while !consts.feasible(consts.semimajor_axis(delta_theta, 1, k2)) {
        k2 += 1;
    }
    let k1 = feasible_servicer_revolutions(delta_theta, k2, consts)
        .into_iter()
        .min_by(|&x, &y| {
            let dx = (consts.semimajor_axis(delta_theta, x, k2) - consts.r_target).abs();
            let dy = (consts.semimajor_axis(delta_theta, y, k2) - consts.r_target).abs();
            dx.partial_cmp(&dy).expect("finite semimajor axes")
        })
        .expect("k1 = 1 is feasible");
    let t_travel = (delta_theta + T::TAU() * T::from_count(k2 as u64)) * consts.time_per_radian();
    Ok(PhasingSolution {
        delta_theta,
        revolutions: Some(PhasingRevolutions {
            servicer: k1,
            target: k2,
        }),
        semimajor_axis: consts.semimajor_axis(delta_theta, k1, k2),
        t_travel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstellationGeometry {
    pub n_satellites: u32,
    pub modules_per_satellite: u32,
    /// Satellite the depot is collocated with.
    pub depot_index: u32,
}

impl Default for ConstellationGeometry {
    fn default() -> Self {
        ConstellationGeometry {
            n_satellites: 10,
            modules_per_satellite: 5,
            depot_index: 0,
        }
    }
}

impl ConstellationGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_satellites == 0 || self.modules_per_satellite == 0 {
            return Err(ModelError::domain(
                "ConstellationGeometry",
                "need at least one satellite with at least one module",
            ));
        }
        if self.depot_index >= self.n_satellites {
            return Err(ModelError::domain(
                "ConstellationGeometry",
                format!(
                    "depot index {} out of range for {} satellites",
                    self.depot_index, self.n_satellites
                ),
            ));
        }
        Ok(())
    }

    /// Total number of modules `N`.
    pub fn modules(&self) -> u32 {
        self.n_satellites * self.modules_per_satellite
    }

    pub fn angular_position<T: Real>(&self, satellite: u32) -> T {
        T::TAU() * T::from_count(satellite as u64) / T::from_count(self.n_satellites as u64)
    }

    /// Phase angle from the depot to `satellite`, measured ahead of the
    /// depot and normalized to `[0, 2π)`.
    pub fn phase_from_depot<T: Real>(&self, satellite: u32) -> T {
        let n = self.n_satellites;
        let steps = (satellite + n - self.depot_index) % n;
        T::TAU() * T::from_count(steps as u64) / T::from_count(n as u64)
    }

    /// Phase angle from `satellite` back to the depot.
    pub fn phase_to_depot<T: Real>(&self, satellite: u32) -> T {
        let n = self.n_satellites;
        let steps = (self.depot_index + n - satellite) % n;
        T::TAU() * T::from_count(steps as u64) / T::from_count(n as u64)
    }
}

/// How the return leg's phase angle relates to the outbound one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InboundAngle {
    /// `2π - ΔΘ_out`: the depot is behind the servicer by the complement.
    #[default]
    Complementary,
    SameAsOutbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TravelOptions<T> {
    pub inbound_angle: InboundAngle,
    /// Constant time added before each outbound leg (spare loading, refueling).
    pub pre_trip: T,
    /// Constant time added after each inbound leg.
    pub post_trip: T,
}

/// Travel times for a failure on one satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelAtom<T> {
    pub satellite: u32,
    pub outbound: T,
    pub inbound: T,
    pub weight: Weight,
}

pub fn build_travel_model<T: Real>(
    geom: &ConstellationGeometry,
    consts: &OrbitConstants<T>,
) -> Result<Vec<TravelAtom<T>>> {
    build_travel_model_with(geom, consts, &TravelOptions::default())
}

/// One atom per satellite with weight `1/n_satellites` (identical modules,
/// uniform failures), keeping each trip's outbound and inbound legs paired.
pub fn build_travel_model_with<T: Real>(
    geom: &ConstellationGeometry,
    consts: &OrbitConstants<T>,
    opts: &TravelOptions<T>,
) -> Result<Vec<TravelAtom<T>>> {
    geom.validate()?;
    consts.validate()?;
    if !(opts.pre_trip >= T::zero()) || !(opts.post_trip >= T::zero()) {
        return Err(ModelError::domain(
            "build_travel_model",
            "pre/post-trip times must be >= 0",
        ));
    }
    let n = geom.n_satellites as u64;
    (0..geom.n_satellites)
        .map(|s| {
            let out_angle = geom.phase_from_depot::<T>(s);
            let in_angle = match opts.inbound_angle {
                InboundAngle::Complementary => geom.phase_to_depot::<T>(s),
                InboundAngle::SameAsOutbound => out_angle,
            };
            let outbound = phasing_travel_time(out_angle, consts)?.t_travel + opts.pre_trip;
            let inbound = phasing_travel_time(in_angle, consts)?.t_travel + opts.post_trip;
            Ok(TravelAtom {
                satellite: s,
                outbound,
                inbound,
                weight: Weight::new(1, n),
            })
        })
        .collect()
}
