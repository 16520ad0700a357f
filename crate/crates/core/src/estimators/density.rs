use alloc::vec::Vec;

use num_traits::Float;

use super::{sampler_for, MIN_EVENTS};
use crate::cone::ConeDomain;
use crate::error::{Error, Result};
use crate::exec::{BatchExecutor, Runner, Survivors};
use crate::model::StableModel;
use crate::point::Point;
use crate::stats::Kde;

/// Kernel estimate of `p_t(0, y)` next to the envelope
/// `t^{-d/alpha} ∧ t |y|^{-d-alpha}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatKernelReport {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub envelope: Vec<f64>,
    pub bandwidth: Point,
    /// Smallest `c >= 1` with every ratio `value / envelope` in `[1/c, c]`.
    pub c: f64,
}

pub fn heat_kernel_envelope(alpha: f64, t: f64, y: &Point) -> f64 {
    let d = y.dim() as f64;
    let near = t.powf(-d / alpha);
    let r = y.norm();
    if r == 0.0 {
        near
    } else {
        near.min(t * r.powf(-d - alpha))
    }
}

fn check_kde_dim(model: &StableModel) -> Result<()> {
    if model.dim() > 2 {
        return Err(Error::UnsupportedDimension(model.dim()));
    }
    Ok(())
}

pub fn heat_kernel_density<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    t: f64,
    points: &[Point],
    n: u64,
    bandwidth: Option<Point>,
) -> Result<HeatKernelReport> {
    check_kde_dim(model)?;
    if n < 10_000 {
        return Err(Error::InvalidArgument("heat kernel estimate needs n >= 10^4"));
    }
    let sampler = sampler_for(model, runner.policy(), t)?;
    let kde = Kde::new(runner.increments(&sampler, t, n)?, bandwidth, 1.0);
    let values: Vec<f64> = points.iter().map(|y| kde.eval(y)).collect();
    let envelope: Vec<f64> = points
        .iter()
        .map(|y| heat_kernel_envelope(model.alpha(), t, y))
        .collect();
    let c = values
        .iter()
        .zip(&envelope)
        .map(|(v, e)| {
            let r = v / e;
            r.max(1.0 / r)
        })
        .fold(1.0, f64::max);
    Ok(HeatKernelReport {
        points: points.to_vec(),
        values,
        envelope,
        bandwidth: kde.bandwidth(),
        c,
    })
}

/// Ratios `p_t^D(x, y) / (P_x(tau > t) p_t(x, y) P^_y(tau^ > t))`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationTable {
    /// `ratio[i][j]` for `x_list[i]`, `y_list[j]`.
    pub ratio: Vec<Vec<f64>>,
    pub killed_density: Vec<Vec<f64>>,
    pub free_density: Vec<Vec<f64>>,
    pub survival_x: Vec<f64>,
    /// Survival of the dual process from each `y`.
    pub survival_y: Vec<f64>,
}

impl FactorizationTable {
    /// `max R / min R` over the table.
    pub fn spread(&self) -> f64 {
        let all = self.ratio.iter().flatten();
        let max = all.clone().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = all.copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

#[allow(clippy::too_many_arguments)]
pub fn factorization_ratio<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x_list: &[Point],
    y_list: &[Point],
    t: f64,
    n: u64,
    bandwidth: Option<Point>,
) -> Result<FactorizationTable> {
    check_kde_dim(model)?;
    if x_list.is_empty() || y_list.is_empty() {
        return Err(Error::InvalidArgument("point lists must be nonempty"));
    }
    if x_list.iter().chain(y_list).any(|p| !domain.contains(p)) {
        return Err(Error::StartOutsideDomain);
    }
    let dual = model.dual();
    let sampler = sampler_for(model, runner.policy(), t)?;
    let dual_sampler = sampler_for(&dual, runner.policy(), t)?;

    let mut killed_density = Vec::with_capacity(x_list.len());
    let mut survival_x = Vec::with_capacity(x_list.len());
    for x in x_list {
        let surv = runner.simulate(&sampler, domain, *x, t, n, Survivors::default)?;
        let got = surv.positions.len() as u64;
        if got < MIN_EVENTS {
            return Err(Error::TooFewSurvivors {
                got,
                needed: MIN_EVENTS,
            });
        }
        let p = got as f64 / n as f64;
        let kde = Kde::new(surv.positions, bandwidth, p);
        killed_density.push(y_list.iter().map(|y| kde.eval(y)).collect::<Vec<_>>());
        survival_x.push(p);
    }
    let mut survival_y = Vec::with_capacity(y_list.len());
    for y in y_list {
        let surv = runner.simulate(&dual_sampler, domain, *y, t, n, Survivors::default)?;
        survival_y.push(surv.positions.len() as f64 / n as f64);
    }
    let free = Kde::new(runner.increments(&sampler, t, n)?, bandwidth, 1.0);
    let free_density: Vec<Vec<f64>> = x_list
        .iter()
        .map(|x| y_list.iter().map(|y| free.eval(&(*y - *x))).collect())
        .collect();
    let ratio = (0..x_list.len())
        .map(|i| {
            (0..y_list.len())
                .map(|j| {
                    killed_density[i][j] / (survival_x[i] * free_density[i][j] * survival_y[j])
                })
                .collect()
        })
        .collect();
    Ok(FactorizationTable {
        ratio,
        killed_density,
        free_density,
        survival_x,
        survival_y,
    })
}
