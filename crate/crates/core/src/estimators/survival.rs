use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{sampler_for, EstimateCI, Method, BOOTSTRAP_RESAMPLES, MIN_EVENTS};
use crate::cone::ConeDomain;
use crate::error::{Error, Result};
use crate::exec::{BatchExecutor, Runner, SurvivalLevels};
use crate::model::StableModel;
use crate::point::Point;
use crate::sampler::ExactStable1d;
use crate::stats::{mean_and_sd, quantile_sorted, weighted_line_fit};

/// One row of a survival table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalPoint {
    pub x: Point,
    pub t: f64,
    pub estimate: EstimateCI,
}

/// A power-law exponent with the survival points it was fitted on.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentFit {
    pub estimate: EstimateCI,
    pub points: Vec<SurvivalPoint>,
    /// Which points entered the regression.
    pub used: Vec<bool>,
}

impl ExponentFit {
    pub fn n_points(&self) -> usize {
        self.used.iter().filter(|&&u| u).count()
    }
}

/// `P_x(tau_D > t)` from `n` paths.
pub fn survival_probability<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x: &Point,
    t: f64,
    n: u64,
) -> Result<EstimateCI> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    if !domain.contains(x) {
        return Err(Error::StartOutsideDomain);
    }
    if let ConeDomain::FullSpace { .. } = domain {
        return Ok(EstimateCI::exact(1.0, n));
    }
    let sampler = sampler_for(model, runner.policy(), t)?;
    let levels = runner.simulate(&sampler, domain, *x, t, n, || {
        SurvivalLevels::new(alloc::vec![t])
    })?;
    Ok(EstimateCI::bernoulli(levels.survivors(0), n))
}

/// Log-scale weighted fit of survival frequencies; weights are the inverse
/// delta-method variances `n p / (1 - p)` with `1 - p` floored at `1/n`.
fn log_slope(abscissae: &[f64], p: &[f64], n: u64) -> Option<f64> {
    let nf = n as f64;
    let xs: Vec<f64> = abscissae.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = p.iter().map(|q| q.ln()).collect();
    let ws: Vec<f64> = p.iter().map(|q| nf * q / (1.0 - q).max(1.0 / nf)).collect();
    weighted_line_fit(&xs, &ys, &ws).map(|f| f.slope)
}

fn summarize(value: f64, mut boot: Vec<f64>, n: u64, method: Method) -> EstimateCI {
    if boot.len() < 2 {
        return EstimateCI {
            value,
            stderr: f64::NAN,
            n,
            method,
            ci_lo: f64::NEG_INFINITY,
            ci_hi: f64::INFINITY,
        };
    }
    let (_, sd) = mean_and_sd(&boot);
    boot.sort_unstable_by(f64::total_cmp);
    EstimateCI {
        value,
        stderr: sd,
        n,
        method,
        ci_lo: quantile_sorted(&boot, 0.025),
        ci_hi: quantile_sorted(&boot, 0.975),
    }
}

fn multinomial<R: Rng + ?Sized>(n: u64, counts: &[u64], rng: &mut R) -> Vec<u64> {
    let total: u64 = counts.iter().sum();
    let mut left_n = n;
    let mut left_mass = total;
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        let draw = if left_mass == 0 || left_n == 0 {
            0
        } else if c >= left_mass {
            left_n
        } else {
            Binomial::new(left_n, c as f64 / left_mass as f64)
                .map(|b| b.sample(rng))
                .unwrap_or(0)
        };
        out.push(draw);
        left_n -= draw;
        left_mass -= c;
    }
    out
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid must be nonempty"));
    }
    if grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::InvalidArgument("grid values must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing"));
    }
    Ok(())
}

/// Level counts of `n` paths observed on a time grid.
fn survival_levels<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x: &Point,
    t_grid: &[f64],
    n: u64,
) -> Result<SurvivalLevels> {
    check_grid(t_grid)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    if !domain.contains(x) {
        return Err(Error::StartOutsideDomain);
    }
    let mut levels = SurvivalLevels::new(t_grid.to_vec());
    if let ConeDomain::FullSpace { .. } = domain {
        levels.add_survivors(n);
        return Ok(levels);
    }
    let t_max = *t_grid.last().unwrap();
    let sampler = sampler_for(model, runner.policy(), t_max)?;
    runner.simulate(&sampler, domain, *x, t_max, n, || {
        SurvivalLevels::new(t_grid.to_vec())
    })
}

/// Survival estimates on a time grid, all from the same paths.
pub fn survival_curve<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x: &Point,
    t_grid: &[f64],
    n: u64,
) -> Result<Vec<SurvivalPoint>> {
    let levels = survival_levels(runner, model, domain, x, t_grid, n)?;
    Ok(curve_points(&levels, x, n))
}

fn curve_points(levels: &SurvivalLevels, x: &Point, n: u64) -> Vec<SurvivalPoint> {
    levels
        .grid()
        .iter()
        .enumerate()
        .map(|(k, &t)| SurvivalPoint {
            x: *x,
            t,
            estimate: EstimateCI::bernoulli(levels.survivors(k), n),
        })
        .collect()
}

/// Decay rate `beta / alpha` of `t -> P_x(tau > t)` from one set of paths
/// observed on the whole time grid.
pub fn survival_exponent_time<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    x: &Point,
    t_grid: &[f64],
    n: u64,
) -> Result<ExponentFit> {
    let levels = survival_levels(runner, model, domain, x, t_grid, n)?;
    let points = curve_points(&levels, x, n);
    if let ConeDomain::FullSpace { .. } = domain {
        return Ok(ExponentFit {
            estimate: EstimateCI::exact(0.0, n),
            points,
            used: alloc::vec![true; t_grid.len()],
        });
    }
    let used: Vec<bool> = (0..t_grid.len())
        .map(|k| levels.survivors(k) >= MIN_EVENTS)
        .collect();
    let idx: Vec<usize> = (0..t_grid.len()).filter(|&k| used[k]).collect();
    if idx.len() < 3 {
        return Err(Error::DegenerateGrid { usable: idx.len() });
    }
    let ts: Vec<f64> = idx.iter().map(|&k| t_grid[k]).collect();
    let fit = |surv: &dyn Fn(usize) -> u64| -> Option<f64> {
        let p: Vec<f64> = idx.iter().map(|&k| surv(k) as f64 / n as f64).collect();
        if p.iter().any(|&q| q <= 0.0) {
            return None;
        }
        log_slope(&ts, &p, n)
    };
    let slope = fit(&|k| levels.survivors(k)).ok_or(Error::DegenerateGrid { usable: idx.len() })?;
    let mut rng = runner.aux_rng();
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let counts = multinomial(n, levels.counts(), &mut rng);
        let surv = |k: usize| counts[k + 1..].iter().sum::<u64>();
        if let Some(s) = fit(&surv) {
            boot.push(-s);
        }
    }
    Ok(ExponentFit {
        estimate: summarize(-slope, boot, n, Method::WlsBootstrap),
        points,
        used,
    })
}

/// Fit of `log p` against `log s` on binomial counts with a parametric
/// bootstrap; returns the slope estimate and the used mask.
fn binomial_slope<R: Rng + ?Sized>(
    abscissae: &[f64],
    survivors: &[u64],
    n: u64,
    rng: &mut R,
) -> Result<(EstimateCI, Vec<bool>)> {
    let used: Vec<bool> = survivors.iter().map(|&c| c >= MIN_EVENTS).collect();
    let idx: Vec<usize> = (0..survivors.len()).filter(|&k| used[k]).collect();
    if idx.len() < 3 {
        return Err(Error::DegenerateGrid { usable: idx.len() });
    }
    let xs: Vec<f64> = idx.iter().map(|&k| abscissae[k]).collect();
    let p: Vec<f64> = idx.iter().map(|&k| survivors[k] as f64 / n as f64).collect();
    let slope = log_slope(&xs, &p, n).ok_or(Error::DegenerateGrid { usable: idx.len() })?;
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let pb: Vec<f64> = p
            .iter()
            .map(|&q| match Binomial::new(n, q.min(1.0)) {
                Ok(b) => b.sample(rng) as f64 / n as f64,
                Err(_) => q,
            })
            .collect();
        if pb.iter().all(|&q| q > 0.0) {
            if let Some(s) = log_slope(&xs, &pb, n) {
                boot.push(s);
            }
        }
    }
    Ok((summarize(slope, boot, n, Method::WlsParametricBootstrap), used))
}

/// Growth exponent `beta` of `s -> P_{s u}(tau > t)` for small `s`.
pub fn survival_exponent_space<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    direction: &Point,
    s_grid: &[f64],
    t: f64,
    n: u64,
) -> Result<ExponentFit> {
    check_grid(s_grid)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    let u = direction
        .normalized()
        .filter(|u| (direction.norm() - 1.0).abs() < 1e-9 && u.dim() == domain.dim())
        .ok_or(Error::NotUnitVector(direction.norm()))?;
    if !domain.contains(&u) {
        return Err(Error::StartOutsideDomain);
    }
    if let ConeDomain::FullSpace { .. } = domain {
        return Ok(ExponentFit {
            estimate: EstimateCI::exact(0.0, n),
            points: s_grid
                .iter()
                .map(|&s| SurvivalPoint {
                    x: u * s,
                    t,
                    estimate: EstimateCI::exact(1.0, n),
                })
                .collect(),
            used: alloc::vec![true; s_grid.len()],
        });
    }
    let sampler = sampler_for(model, runner.policy(), t)?;
    let mut survivors = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let levels = runner.simulate(&sampler, domain, u * s, t, n, || {
            SurvivalLevels::new(alloc::vec![t])
        })?;
        survivors.push(levels.survivors(0));
    }
    if survivors[0] == 0 {
        return Err(Error::AllPathsDied);
    }
    let points = s_grid
        .iter()
        .zip(&survivors)
        .map(|(&s, &c)| SurvivalPoint {
            x: u * s,
            t,
            estimate: EstimateCI::bernoulli(c, n),
        })
        .collect();
    let mut rng = runner.aux_rng();
    let (estimate, used) = binomial_slope(s_grid, &survivors, n, &mut rng)?;
    Ok(ExponentFit {
        estimate,
        points,
        used,
    })
}

/// Survival profile across the natural length scale of a half-space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileReport {
    /// `sigma t^{1/alpha}`, with `sigma` the scale of the projected law at
    /// unit time.
    pub length_scale: f64,
    pub points: Vec<SurvivalPoint>,
    /// Log-log slope over distances at most `length_scale / 8`.
    pub branch: EstimateCI,
    /// Log-log slope over distances at least `8 length_scale`, when at
    /// least three such points survive the threshold.
    pub plateau: Option<EstimateCI>,
    /// Largest survival estimate on the plateau side.
    pub plateau_level: Option<f64>,
}

/// Survival against distance to a half-space boundary at fixed `t`.
pub fn halfspace_profile_check<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    distances: &[f64],
    t: f64,
    n: u64,
) -> Result<ProfileReport> {
    let ConeDomain::HalfSpace { normal } = domain else {
        return Err(Error::UnsupportedDomain("profile check needs a half-space"));
    };
    check_grid(distances)?;
    if !(t > 0.0) || n == 0 {
        return Err(Error::InvalidArgument("need t > 0 and n > 0"));
    }
    let c = model.projection_coefficients(normal)?;
    let law = if model.alpha() == 1.0 {
        let m = 0.5 * (c.c_minus + c.c_plus);
        ExactStable1d::new(1.0, m, m)?
    } else {
        ExactStable1d::new(model.alpha(), c.c_minus, c.c_plus)?
    };
    let length_scale = law.scale() * t.powf(1.0 / model.alpha());
    let sampler = sampler_for(model, runner.policy(), t)?;
    let mut survivors = Vec::with_capacity(distances.len());
    for &d in distances {
        let levels = runner.simulate(&sampler, domain, *normal * d, t, n, || {
            SurvivalLevels::new(alloc::vec![t])
        })?;
        survivors.push(levels.survivors(0));
    }
    let points = distances
        .iter()
        .zip(&survivors)
        .map(|(&d, &s)| SurvivalPoint {
            x: *normal * d,
            t,
            estimate: EstimateCI::bernoulli(s, n),
        })
        .collect::<Vec<_>>();
    let mut rng = runner.aux_rng();
    let pick = |keep: &dyn Fn(f64) -> bool| -> (Vec<f64>, Vec<u64>) {
        distances
            .iter()
            .zip(&survivors)
            .filter(|(d, _)| keep(**d))
            .map(|(d, s)| (*d, *s))
            .unzip()
    };
    let (bd, bs) = pick(&|d| d <= length_scale / 8.0);
    let (branch, _) = binomial_slope(&bd, &bs, n, &mut rng)?;
    let (pd, ps) = pick(&|d| d >= 8.0 * length_scale);
    let plateau = binomial_slope(&pd, &ps, n, &mut rng).ok().map(|(e, _)| e);
    let plateau_level = ps.iter().max().map(|&s| s as f64 / n as f64);
    Ok(ProfileReport {
        length_scale,
        points,
        branch,
        plateau,
        plateau_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::batch_rng;

    #[test]
    fn log_slope_of_exact_power_law() {
        let t = [1.0, 2.0, 4.0, 8.0];
        let p: Vec<f64> = t.iter().map(|v: &f64| 0.9 * v.powf(-0.3)).collect();
        assert!((log_slope(&t, &p, 1000).unwrap() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = batch_rng(5);
        let c = [10, 0, 30, 60];
        let draw = multinomial(1000, &c, &mut rng);
        assert_eq!(draw.iter().sum::<u64>(), 1000);
        assert_eq!(draw[1], 0);
    }

    #[test]
    fn grid_checks() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[1.0, 1.0]).is_err());
        assert!(check_grid(&[1.0, 2.0]).is_ok());
    }
}
