//! Conditional law of the landing point given the pre-exit point.
//!
//! For a half-space with inward normal `n`, a jump from `u` at distance
//! `delta = u . n` lands at depth `y = -(z . n)` with
//! `P(y > a | u) = (delta / (delta + a))^alpha`, whatever the spherical
//! density: the tail mass `nu{w : w . n < -r}` equals `r^{-alpha} c_- / alpha`.
//! So `(delta / (delta + y))^alpha` is uniform on (0, 1) under the predicted
//! law, and each pre-exit bin is compared with the uniform law on a shared
//! binning of that variable.

use alloc::vec::Vec;

use num_traits::Float;

use super::{sampler_for, MIN_EVENTS};
use crate::cone::ConeDomain;
use crate::error::{Error, Result};
use crate::exec::{BatchExecutor, JumpExits, Runner};
use crate::model::StableModel;
use crate::point::Point;
use crate::stats::tv_against_expected;

/// Pre-exit distance bins and the number of landing-depth bins.
#[derive(Clone, Debug, PartialEq)]
pub struct OvershootBins {
    /// Increasing distance edges; exits with pre-exit distance outside
    /// `[edges[0], edges[last])` are ignored.
    pub distance_edges: Vec<f64>,
    pub depth_bins: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OvershootBin {
    pub lo: f64,
    pub hi: f64,
    pub exits: u64,
    pub tv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OvershootReport {
    pub bins: Vec<OvershootBin>,
    /// TV distance over all exits in range.
    pub aggregate_tv: f64,
    pub exits_in_range: u64,
    pub jump_exits: u64,
    pub paths: u64,
}

/// Position of the landing depth in the predicted conditional law.
pub fn overshoot_uniform(alpha: f64, delta: f64, depth: f64) -> f64 {
    (delta / (delta + depth)).powf(alpha)
}

#[allow(clippy::too_many_arguments)]
pub fn overshoot_conditional_check<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x: &Point,
    t_max: f64,
    n: u64,
    bins: &OvershootBins,
) -> Result<OvershootReport> {
    let ConeDomain::HalfSpace { normal } = domain else {
        return Err(Error::UnsupportedDomain("overshoot check needs a half-space"));
    };
    let edges = &bins.distance_edges;
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) || bins.depth_bins < 2 {
        return Err(Error::InvalidArgument("need increasing distance edges and >= 2 depth bins"));
    }
    let sampler = sampler_for(model, runner.policy(), t_max)?;
    // simulated jumps are never shorter than eps
    let min_distance = edges[0].max(sampler.scheme().eps);
    let exits = runner.simulate(&sampler, domain, *x, t_max, n, JumpExits::default)?;
    let k = bins.depth_bins;
    let nb = edges.len() - 1;
    let mut counts = alloc::vec![alloc::vec![0u64; k]; nb];
    let mut all = alloc::vec![0u64; k];
    let mut in_range = 0u64;
    for (pre, post) in &exits.exits {
        let delta = pre.dot(normal);
        if delta < min_distance || delta >= edges[nb] {
            continue;
        }
        let b = edges.partition_point(|&e| e <= delta) - 1;
        let depth = (-post.dot(normal)).max(0.0);
        let u = overshoot_uniform(model.alpha(), delta, depth);
        let j = ((u * k as f64) as usize).min(k - 1);
        counts[b][j] += 1;
        all[j] += 1;
        in_range += 1;
    }
    if in_range < MIN_EVENTS {
        return Err(Error::TooFewExits {
            got: in_range,
            needed: MIN_EVENTS,
        });
    }
    let uniform = alloc::vec![1.0; k];
    let report_bins = counts
        .iter()
        .enumerate()
        .map(|(b, c)| OvershootBin {
            lo: edges[b],
            hi: edges[b + 1],
            exits: c.iter().sum(),
            tv: tv_against_expected(c, &uniform),
        })
        .collect();
    Ok(OvershootReport {
        bins: report_bins,
        aggregate_tv: tv_against_expected(&all, &uniform),
        exits_in_range: in_range,
        jump_exits: exits.exits.len() as u64,
        paths: exits.total,
    })
}
