//! Estimators built on simulated exit records.

mod density;
mod overshoot;
mod survival;
mod yaglom;

pub use density::{factorization_ratio, heat_kernel_density, FactorizationTable, HeatKernelReport};
pub use overshoot::{overshoot_conditional_check, OvershootBins, OvershootReport, OvershootBin};
pub use survival::{
    halfspace_profile_check, survival_exponent_space, survival_exponent_time,
    survival_curve, survival_probability, ExponentFit, ProfileReport, SurvivalPoint,
};
pub use yaglom::{
    yaglom_convergence, yaglom_histogram, BinSpec, EmpiricalMeasure, YaglomTable,
};

use num_traits::Float;

use crate::error::Result;
use crate::model::StableModel;
use crate::sampler::{PathSampler, SchemePolicy};

/// Fewest surviving paths (or exits) an estimator accepts, and the survival
/// count below which a regression point is dropped.
pub const MIN_EVENTS: u64 = 500;

/// Bootstrap resamples for regression confidence intervals.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Bernoulli frequency with `sqrt(p(1-p)/n)` standard error.
    Bernoulli,
    /// Weighted least squares on log scale, nonparametric bootstrap.
    WlsBootstrap,
    /// Weighted least squares on log scale, parametric binomial bootstrap.
    WlsParametricBootstrap,
    /// Deterministic value (no sampling involved).
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bernoulli => "bernoulli",
            Method::WlsBootstrap => "wls-bootstrap",
            Method::WlsParametricBootstrap => "wls-parametric-bootstrap",
            Method::Exact => "exact",
        }
    }
}

/// Monte Carlo estimate with standard error and a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateCI {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub method: Method,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl EstimateCI {
    pub fn bernoulli(successes: u64, n: u64) -> Self {
        let p = successes as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        Self {
            value: p,
            stderr: se,
            n,
            method: Method::Bernoulli,
            ci_lo: (p - 1.96 * se).max(0.0),
            ci_hi: (p + 1.96 * se).min(1.0),
        }
    }

    pub fn exact(value: f64, n: u64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n,
            method: Method::Exact,
            ci_lo: value,
            ci_hi: value,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

fn sampler_for<'m>(model: &'m StableModel, policy: &SchemePolicy, t: f64) -> Result<PathSampler<'m>> {
    PathSampler::new(model, policy.resolve(model, t)?)
}
