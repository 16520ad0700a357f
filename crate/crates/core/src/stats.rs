//! Small statistics toolbox: two-sample KS, weighted least squares,
//! total-variation distance on merged bins, quantiles and product-kernel KDE.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::point::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction of the Kolmogorov tail).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let sq = ne.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d),
        n1,
        n2,
    }
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square statistic and degrees of freedom for observed counts
/// against expected probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let stat = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e) * (c as f64 - e) / e
        })
        .sum();
    (stat, counts.len().saturating_sub(1))
}

/// Weighted least-squares line `y = intercept + slope x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    let sw: f64 = w.iter().sum();
    if x.len() < 2 || !(sw > 0.0) {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx) * (xi - mx);
        sxy += wi * (xi - mx) * (yi - my);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        intercept: my - slope * mx,
        slope,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Group consecutive bins until every group holds at least `min_count`
/// observations in both samples; a short tail joins the last group.
pub fn merge_bins(a: &[u64], b: &[u64], min_count: u64) -> Vec<(u64, u64)> {
    let mut groups: Vec<(u64, u64)> = Vec::new();
    let (mut ga, mut gb) = (0, 0);
    for (&x, &y) in a.iter().zip(b) {
        ga += x;
        gb += y;
        if ga >= min_count && gb >= min_count {
            groups.push((ga, gb));
            ga = 0;
            gb = 0;
        }
    }
    if ga + gb > 0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += ga;
                last.1 += gb;
            }
            None => groups.push((ga, gb)),
        }
    }
    groups
}

/// Total variation distance between two count vectors on a shared binning,
/// after merging bins holding fewer than five observations.
pub fn tv_distance(a: &[u64], b: &[u64]) -> f64 {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return 1.0;
    }
    0.5 * merge_bins(a, b, 5)
        .iter()
        .map(|&(x, y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
        .sum::<f64>()
}

/// Total variation distance between observed counts and expected masses,
/// merging bins whose expected count is below five.
pub fn tv_against_expected(counts: &[u64], expected: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let total: f64 = expected.iter().sum();
    let mut tv = 0.0;
    let (mut gc, mut ge) = (0.0, 0.0);
    let mut pending = false;
    for (&c, &e) in counts.iter().zip(expected) {
        gc += c as f64 / nf;
        ge += e / total;
        pending = true;
        if ge * nf >= 5.0 {
            tv += (gc - ge).abs();
            gc = 0.0;
            ge = 0.0;
            pending = false;
        }
    }
    if pending {
        tv += (gc - ge).abs();
    }
    0.5 * tv
}

/// Product Gaussian kernel density estimate in dimension 1 or 2.
#[derive(Clone, Debug)]
pub struct Kde {
    points: Vec<Point>,
    bandwidth: Point,
    /// Mass multiplier applied to the normalized estimate.
    weight: f64,
}

impl Kde {
    /// Silverman-type bandwidth per coordinate:
    /// `0.9 min(sd, IQR / 1.34) n^{-1/(d+4)}`.
    pub fn silverman_bandwidth(points: &[Point]) -> Point {
        let dim = points.first().map_or(1, Point::dim);
        let n = points.len() as f64;
        let mut h = Point::zero(dim);
        for i in 0..dim {
            let mut c: Vec<f64> = points.iter().map(|p| p[i]).collect();
            c.sort_unstable_by(f64::total_cmp);
            let (_, sd) = mean_and_sd(&c);
            let iqr = quantile_sorted(&c, 0.75) - quantile_sorted(&c, 0.25);
            let mut spread = sd.min(iqr / 1.34);
            if !(spread > 0.0) {
                spread = if sd > 0.0 { sd } else { 1.0 };
            }
            h.set(i, 0.9 * spread * n.powf(-1.0 / (dim as f64 + 4.0)));
        }
        h
    }

    /// `weight` rescales the estimate, e.g. to a sub-probability density.
    pub fn new(points: Vec<Point>, bandwidth: Option<Point>, weight: f64) -> Self {
        let bandwidth = bandwidth.unwrap_or_else(|| Self::silverman_bandwidth(&points));
        Self {
            points,
            bandwidth,
            weight,
        }
    }

    pub fn bandwidth(&self) -> Point {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn eval(&self, x: &Point) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let dim = x.dim();
        let mut norm = 1.0;
        let mut inv = [0.0; crate::point::MAX_DIM];
        for i in 0..dim {
            norm *= self.bandwidth[i] * (2.0 * PI).sqrt();
            inv[i] = 1.0 / self.bandwidth[i];
        }
        let mut acc = 0.0;
        for p in &self.points {
            let mut q = 0.0;
            for i in 0..dim {
                let z = (x[i] - p[i]) * inv[i];
                q += z * z;
            }
            if q < 80.0 {
                acc += (-0.5 * q).exp();
            }
        }
        self.weight * acc / (norm * self.points.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_disjoint_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b);
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn kolmogorov_tail_reference_points() {
        // classic critical values: P(K > 1.358) = 0.05, P(K > 1.628) = 0.01
        assert!((kolmogorov_tail(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_tail(1.628) - 0.01).abs() < 2e-4);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = weighted_line_fit(&x, &y, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tv_of_shifted_counts() {
        let a = [10, 20, 30, 40];
        let b = [40, 30, 20, 10];
        assert!((tv_distance(&a, &b) - 0.4).abs() < 1e-12);
        assert_eq!(tv_distance(&a, &a), 0.0);
        // a sparse tail is folded into the last full group
        assert_eq!(merge_bins(&[5, 5, 1], &[5, 5, 0], 5), [(5, 5), (6, 5)]);
    }

    #[test]
    fn kde_integrates_to_weight() {
        let pts: Vec<Point> = (0..200)
            .map(|i| Point::from_slice(&[(i as f64 / 20.0).sin()]).unwrap())
            .collect();
        let kde = Kde::new(pts, None, 0.5);
        let h = 0.01;
        let total: f64 = (-400..400)
            .map(|k| kde.eval(&Point::from_slice(&[k as f64 * h]).unwrap()) * h)
            .sum();
        assert!((total - 0.5).abs() < 1e-3, "{total}");
    }
}
