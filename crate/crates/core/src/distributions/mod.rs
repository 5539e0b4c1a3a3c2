//! Nonnegative duration distributions and their Laplace-Stieltjes transforms.
//!
//! [`LstDistribution`] is the common currency between the submodels: the
//! queue only needs a mean and `E[e^{-θS}]` at a handful of points, and the
//! transform of an independent sum is the product of the factor transforms.

mod logsum;
mod special;

pub use logsum::{log_domain_sum, log_domain_sum_of_products, ProductTerm, SignedLog};
pub use special::{
    erlang_pdf, exponential_cdf, exponential_pdf, ln_binomial, ln_factorial, ln_gamma,
    ln_poisson_pmf, poisson_cdf, poisson_pmf, poisson_upper_tail,
};

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{ModelError, Result};
use crate::inventory::StockoutModel;
use crate::scalar::Real;

/// Exact probability weight of a discrete atom.
pub type Weight = Ratio<u64>;

pub(crate) fn weight_to<T: Real>(w: Weight) -> T {
    T::from_count(*w.numer()) / T::from_count(*w.denom())
}

/// A finite distribution over durations (hours) with exact rational weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDuration<T> {
    atoms: Vec<(T, Weight)>,
}

impl<T: Real> DiscreteDuration<T> {
    /// Weights must sum to exactly one; durations must be finite and `>= 0`.
    pub fn new(atoms: Vec<(T, Weight)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(ModelError::domain("DiscreteDuration", "no atoms"));
        }
        let mut total = Weight::zero();
        for &(d, w) in &atoms {
            if !(d >= T::zero()) || !d.is_finite() {
                return Err(ModelError::domain(
                    "DiscreteDuration",
                    format!("duration {d} must be finite and >= 0"),
                ));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(ModelError::domain(
                "DiscreteDuration",
                format!("weights sum to {total}, not 1"),
            ));
        }
        Ok(DiscreteDuration { atoms })
    }

    /// Equal weight `1/n` on each duration.
    pub fn uniform(durations: impl IntoIterator<Item = T>) -> Result<Self> {
        let durations: Vec<T> = durations.into_iter().collect();
        let n = durations.len() as u64;
        if n == 0 {
            return Err(ModelError::domain("DiscreteDuration", "no atoms"));
        }
        Self::new(
            durations
                .into_iter()
                .map(|d| (d, Weight::new(1, n)))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[(T, Weight)] {
        &self.atoms
    }

    pub fn mean(&self) -> T {
        self.atoms.iter().map(|&(d, w)| d * weight_to::<T>(w)).sum()
    }

    pub fn lst(&self, theta: T) -> T {
        self.atoms
            .iter()
            .map(|&(d, w)| weight_to::<T>(w) * (-theta * d).exp())
            .sum()
    }

    fn lst_complement(&self, theta: T) -> T {
        self.atoms
            .iter()
            .map(|&(d, w)| -weight_to::<T>(w) * (-theta * d).exp_m1())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    PointMass,
    Exponential,
    DiscreteFinite,
    Erlang,
    CompositeSum,
    Stockout,
}

/// A nonnegative random duration described by its mean and LST.
#[derive(Debug, Clone, PartialEq)]
pub enum LstDistribution<T: Real> {
    PointMass(T),
    Exponential {
        rate: T,
    },
    Discrete(DiscreteDuration<T>),
    Erlang {
        shape: u64,
        rate: T,
    },
    /// Sum of independent components.
    Sum(Vec<LstDistribution<T>>),
    Stockout(StockoutModel<T>),
}

impl<T: Real> LstDistribution<T> {
    pub fn point_mass(t: T) -> Result<Self> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(ModelError::domain(
                "point_mass",
                format!("duration {t} must be >= 0"),
            ));
        }
        Ok(LstDistribution::PointMass(t))
    }

    pub fn exponential(rate: T) -> Result<Self> {
        if !(rate > T::zero()) || !rate.is_finite() {
            return Err(ModelError::domain(
                "exponential",
                format!("rate {rate} must be > 0"),
            ));
        }
        Ok(LstDistribution::Exponential { rate })
    }

    pub fn erlang(shape: u64, rate: T) -> Result<Self> {
        if shape == 0 || !(rate > T::zero()) || !rate.is_finite() {
            return Err(ModelError::domain(
                "erlang",
                format!("need shape >= 1 and rate > 0, got ({shape}, {rate})"),
            ));
        }
        Ok(LstDistribution::Erlang { shape, rate })
    }

    pub fn sum(factors: Vec<LstDistribution<T>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(ModelError::domain("sum", "no factors"));
        }
        Ok(LstDistribution::Sum(factors))
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            LstDistribution::PointMass(_) => DistributionKind::PointMass,
            LstDistribution::Exponential { .. } => DistributionKind::Exponential,
            LstDistribution::Discrete(_) => DistributionKind::DiscreteFinite,
            LstDistribution::Erlang { .. } => DistributionKind::Erlang,
            LstDistribution::Sum(_) => DistributionKind::CompositeSum,
            LstDistribution::Stockout(_) => DistributionKind::Stockout,
        }
    }

    /// Mean duration in hours.
    pub fn mean(&self) -> T {
        match self {
            LstDistribution::PointMass(t) => *t,
            LstDistribution::Exponential { rate } => rate.recip(),
            LstDistribution::Discrete(d) => d.mean(),
            LstDistribution::Erlang { shape, rate } => T::from_count(*shape) / *rate,
            LstDistribution::Sum(fs) => fs.iter().map(|f| f.mean()).sum(),
            LstDistribution::Stockout(s) => s.mean(),
        }
    }

    /// `E[e^{-θX}]` for `θ >= 0`.
    pub fn lst(&self, theta: T) -> T {
        match self {
            LstDistribution::PointMass(t) => (-theta * *t).exp(),
            LstDistribution::Exponential { rate } => *rate / (*rate + theta),
            LstDistribution::Discrete(d) => d.lst(theta),
            LstDistribution::Erlang { shape, rate } => {
                (-T::from_count(*shape) * (theta / *rate).ln_1p()).exp()
            }
            LstDistribution::Sum(fs) => {
                fs.iter().map(|f| f.lst(theta)).fold(T::one(), |a, b| a * b)
            }
            LstDistribution::Stockout(s) => s.lst(theta),
        }
    }

    /// `ln E[e^{-θX}]`, finite even where the transform itself underflows.
    pub fn ln_lst(&self, theta: T) -> T {
        match self {
            LstDistribution::PointMass(t) => -theta * *t,
            LstDistribution::Exponential { rate } => -(theta / *rate).ln_1p(),
            LstDistribution::Discrete(d) => d
                .atoms
                .iter()
                .map(|&(t, w)| weight_to::<T>(w).ln() - theta * t)
                .fold(T::neg_infinity(), crate::scalar::log_add_exp),
            LstDistribution::Erlang { shape, rate } => {
                -T::from_count(*shape) * (theta / *rate).ln_1p()
            }
            LstDistribution::Sum(fs) => fs.iter().map(|f| f.ln_lst(theta)).sum(),
            LstDistribution::Stockout(s) => s.lst(theta).ln(),
        }
    }

    /// `1 - E[e^{-θX}]`, kept accurate when the transform is close to one.
    pub fn lst_complement(&self, theta: T) -> T {
        match self {
            LstDistribution::PointMass(t) => -(-theta * *t).exp_m1(),
            LstDistribution::Exponential { rate } => theta / (*rate + theta),
            LstDistribution::Discrete(d) => d.lst_complement(theta),
            LstDistribution::Erlang { shape, rate } => {
                -(-T::from_count(*shape) * (theta / *rate).ln_1p()).exp_m1()
            }
            // 1 - ab = (1 - a) + a (1 - b)
            LstDistribution::Sum(fs) => fs.iter().rev().fold(T::zero(), |rest, f| {
                f.lst_complement(theta) + f.lst(theta) * rest
            }),
            LstDistribution::Stockout(s) => s.lst_complement(theta),
        }
    }
}

/// Transform of a single distribution; see [`LstDistribution::lst`].
pub fn lst_of<T: Real>(d: &LstDistribution<T>, theta: T) -> T {
    d.lst(theta)
}

/// Transform of the independent sum of `factors`.
pub fn lst_product<T: Real>(factors: &[LstDistribution<T>], theta: T) -> Result<T> {
    if factors.is_empty() {
        return Err(ModelError::domain("lst_product", "no factors"));
    }
    Ok(factors
        .iter()
        .map(|f| f.lst(theta))
        .fold(T::one(), |a, b| a * b))
}
