use alloc::vec::Vec;

use num_traits::Float;

use super::{sampler_for, MIN_EVENTS};
use crate::cone::ConeDomain;
use crate::error::{Error, Result};
use crate::exec::{BatchExecutor, Runner, Survivors};
use crate::model::StableModel;
use crate::point::Point;
use crate::stats::tv_distance;

/// Rectangular grid over the window `[lo, hi]`; points outside the window
/// are counted in the nearest edge bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BinSpec {
    pub lo: Point,
    pub hi: Point,
    pub bins: Vec<usize>,
}

impl BinSpec {
    pub fn new(lo: Point, hi: Point, bins: Vec<usize>) -> Result<Self> {
        let dim = lo.dim();
        if hi.dim() != dim || bins.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: hi.dim().max(bins.len()),
            });
        }
        if (0..dim).any(|i| !(lo[i] < hi[i]) || bins[i] == 0) {
            return Err(Error::InvalidArgument("bin window must be nonempty with >= 1 bin per axis"));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn len(&self) -> usize {
        self.bins.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major bin index (last coordinate fastest).
    pub fn index(&self, x: &Point) -> usize {
        let mut idx = 0;
        for i in 0..self.dim() {
            let k = self.bins[i];
            let w = (self.hi[i] - self.lo[i]) / k as f64;
            let j = ((x[i] - self.lo[i]) / w).floor();
            let j = if j.is_nan() { 0 } else { j.clamp(0.0, (k - 1) as f64) as usize };
            idx = idx * k + j;
        }
        idx
    }

    /// Corners of bin `index`.
    pub fn bounds(&self, index: usize) -> (Point, Point) {
        let dim = self.dim();
        let mut lo = Point::zero(dim);
        let mut hi = Point::zero(dim);
        let mut rest = index;
        for i in (0..dim).rev() {
            let k = self.bins[i];
            let j = rest % k;
            rest /= k;
            let w = (self.hi[i] - self.lo[i]) / k as f64;
            lo.set(i, self.lo[i] + j as f64 * w);
            hi.set(i, self.lo[i] + (j + 1) as f64 * w);
        }
        (lo, hi)
    }
}

/// Normalized histogram of rescaled surviving positions.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub spec: BinSpec,
    pub counts: Vec<u64>,
    pub masses: Vec<f64>,
    pub survivors: u64,
    pub paths: u64,
}

impl EmpiricalMeasure {
    pub fn from_points(spec: BinSpec, points: &[Point], paths: u64) -> Self {
        let mut counts = alloc::vec![0u64; spec.len()];
        for p in points {
            counts[spec.index(p)] += 1;
        }
        let total = points.len() as f64;
        let masses = counts.iter().map(|&c| c as f64 / total).collect();
        Self {
            spec,
            counts,
            masses,
            survivors: points.len() as u64,
            paths,
        }
    }

    /// TV distance on the shared binning, small bins merged.
    pub fn tv(&self, other: &EmpiricalMeasure) -> f64 {
        tv_distance(&self.counts, &other.counts)
    }
}

/// Histogram of `t^{-1/alpha} X_t` over paths with `tau > t`.
#[allow(clippy::too_many_arguments)]
pub fn yaglom_histogram<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    start: &Point,
    t: f64,
    n: u64,
    spec: &BinSpec,
) -> Result<EmpiricalMeasure> {
    if spec.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: spec.dim(),
        });
    }
    if !domain.contains(start) {
        return Err(Error::StartOutsideDomain);
    }
    let sampler = sampler_for(model, runner.policy(), t)?;
    let surv = runner.simulate(&sampler, domain, *start, t, n, Survivors::default)?;
    let got = surv.positions.len() as u64;
    if got < MIN_EVENTS {
        return Err(Error::TooFewSurvivors {
            got,
            needed: MIN_EVENTS,
        });
    }
    let scale = t.powf(-1.0 / model.alpha());
    let scaled: Vec<Point> = surv.positions.iter().map(|p| *p * scale).collect();
    Ok(EmpiricalMeasure::from_points(spec.clone(), &scaled, surv.total))
}

#[derive(Clone, Debug, PartialEq)]
pub struct YaglomTable {
    /// `(start index, t, histogram)` for every simulated pair.
    pub histograms: Vec<(usize, f64, EmpiricalMeasure)>,
    /// TV between consecutive horizons for the first start.
    pub across_time: Vec<(f64, f64, f64)>,
    /// TV between the first start and each other start at the largest horizon.
    pub across_starts: Vec<(usize, usize, f64)>,
}

#[allow(clippy::too_many_arguments)]
pub fn yaglom_convergence<E: BatchExecutor>(
    runner: &Runner<'_, E>,
    model: &StableModel,
    domain: &ConeDomain,
    starts: &[Point],
    t_grid: &[f64],
    n: u64,
    spec: &BinSpec,
) -> Result<YaglomTable> {
    if starts.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidArgument("need at least one start and one horizon"));
    }
    let t_last = *t_grid.last().unwrap();
    let mut histograms = Vec::new();
    for &t in t_grid {
        histograms.push((0, t, yaglom_histogram(runner, model, domain, &starts[0], t, n, spec)?));
    }
    for (i, s) in starts.iter().enumerate().skip(1) {
        histograms.push((i, t_last, yaglom_histogram(runner, model, domain, s, t_last, n, spec)?));
    }
    let k = t_grid.len();
    let across_time = (1..k)
        .map(|j| (t_grid[j - 1], t_grid[j], histograms[j - 1].2.tv(&histograms[j].2)))
        .collect();
    let across_starts = (1..starts.len())
        .map(|i| (0, i, histograms[k - 1].2.tv(&histograms[k - 1 + i].2)))
        .collect();
    Ok(YaglomTable {
        histograms,
        across_time,
        across_starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_bounds_agree() {
        let spec = BinSpec::new(
            Point::from_slice(&[-1.0, 0.0]).unwrap(),
            Point::from_slice(&[1.0, 2.0]).unwrap(),
            alloc::vec![4, 2],
        )
        .unwrap();
        for idx in 0..spec.len() {
            let (lo, hi) = spec.bounds(idx);
            let mid = (lo + hi) * 0.5;
            assert_eq!(spec.index(&mid), idx);
        }
        assert_eq!(spec.index(&Point::from_slice(&[-9.0, 9.0]).unwrap()), 1);
    }

    #[test]
    fn masses_are_normalized() {
        let spec = BinSpec::new(
            Point::from_slice(&[0.0]).unwrap(),
            Point::from_slice(&[1.0]).unwrap(),
            alloc::vec![3],
        )
        .unwrap();
        let pts: Vec<Point> = (0..7).map(|i| Point::from_slice(&[i as f64 / 5.0]).unwrap()).collect();
        let m = EmpiricalMeasure::from_points(spec, &pts, 10);
        assert!((m.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
