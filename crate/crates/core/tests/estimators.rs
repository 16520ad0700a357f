use anisotable_core::cone::ConeDomain;
use anisotable_core::estimators::{
    factorization_ratio, halfspace_profile_check, heat_kernel_density, overshoot_conditional_check,
    survival_curve, survival_exponent_space, survival_exponent_time, survival_probability,
    yaglom_histogram, BinSpec, EmpiricalMeasure, EstimateCI, OvershootBins,
};
use anisotable_core::exec::{Runner, Serial};
use anisotable_core::model::{ModelParams, SphericalDensity, StableModel};
use anisotable_core::point::Point;
use anisotable_core::sampler::{PathSampler, SchemePolicy};
use proptest::prelude::*;

fn p(xs: &[f64]) -> Point {
    Point::from_slice(xs).unwrap()
}

fn model(alpha: f64, dim: usize, density: SphericalDensity) -> StableModel {
    StableModel::validate(ModelParams { alpha, dim, density }).unwrap()
}

fn iso(alpha: f64, dim: usize) -> StableModel {
    model(alpha, dim, SphericalDensity::constant(1.0, 0.5, 2.0))
}

fn hemi(alpha: f64, dim: usize, plus: f64, minus: f64) -> StableModel {
    model(alpha, dim, SphericalDensity::hemisphere(Point::last_basis(dim), plus, minus, 0.5, 3.0))
}

fn runner(seed: u64, steps: u32) -> Runner<'static, Serial> {
    Runner::new(&Serial, seed).with_policy(SchemePolicy::PerHorizon { steps, mode: None })
}

fn agree(a: &EstimateCI, b: &EstimateCI) -> bool {
    (a.value - b.value).abs() <= 3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

proptest! {
    #[test]
    fn bernoulli_estimates_are_well_formed(n in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let e = EstimateCI::bernoulli(k, n);
        let v = k as f64 / n as f64;
        prop_assert!((0.0..=1.0).contains(&e.value));
        prop_assert_eq!(e.value, v);
        prop_assert_eq!(e.stderr, (v * (1.0 - v) / n as f64).sqrt());
        prop_assert!(e.ci_lo <= e.value && e.value <= e.ci_hi);
        prop_assert!(e.ci_lo >= 0.0 && e.ci_hi <= 1.0);
    }
}

#[test]
fn full_space_never_kills() {
    let m = hemi(1.5, 2, 2.0, 1.0);
    let r = runner(1, 16);
    let full = ConeDomain::full(2);
    let x = p(&[0.3, -0.2]);
    assert_eq!(survival_probability(&r, &m, &full, &x, 3.0, 100).unwrap().value, 1.0);
    let curve = survival_curve(&r, &m, &full, &x, &[1.0, 2.0, 4.0], 1000).unwrap();
    assert!(curve.iter().all(|c| c.estimate.value == 1.0));
    let time = survival_exponent_time(&r, &m, &full, &x, &[1.0, 2.0, 4.0], 1000).unwrap();
    assert_eq!(time.estimate.value, 0.0);
    let space = survival_exponent_space(&r, &m, &full, &p(&[0.0, 1.0]), &[0.1, 0.2, 0.4], 1.0, 1000).unwrap();
    assert_eq!(space.estimate.value, 0.0);
}

#[test]
fn survival_transports_under_scaling() {
    let m = hemi(1.5, 2, 2.0, 1.0);
    let cone = ConeDomain::circular_cone(p(&[0.0, 1.0]), 1.0).unwrap();
    let r = runner(2, 64);
    let (x, t) = (p(&[1.0, 8.0]), 8.0f64);
    let a = survival_probability(&r, &m, &cone, &x, t, 20_000).unwrap();
    let b = survival_probability(&r, &m, &cone, &(x * t.powf(-1.0 / 1.5)), 1.0, 20_000).unwrap();
    assert!(a.value > 0.05 && a.value < 0.95, "{a:?}");
    assert!(agree(&a, &b), "{a:?} vs {b:?}");
}

#[test]
fn survival_transports_under_duality() {
    let m = hemi(0.8, 2, 2.0, 1.0);
    let gamma = ConeDomain::circular_cone(p(&[0.6, 0.8]), 1.2).unwrap();
    let r = runner(3, 64);
    let x = p(&[3.6, 2.4]);
    let a = survival_probability(&r, &m.dual(), &gamma, &x, 0.1, 20_000).unwrap();
    let b = survival_probability(&r, &m, &gamma.reflected(), &-x, 0.1, 20_000).unwrap();
    assert!(a.value > 0.05 && a.value < 0.95, "{a:?}");
    assert!(agree(&a, &b), "{a:?} vs {b:?}");
}

#[test]
fn yaglom_masses_are_normalized_and_respect_the_domain() {
    let m = iso(1.5, 1);
    let line = ConeDomain::half_space(p(&[1.0])).unwrap();
    let spec = BinSpec::new(p(&[-1.0]), p(&[5.0]), vec![12]).unwrap();
    let h = yaglom_histogram(&runner(4, 64), &m, &line, &p(&[1.0]), 2.0, 20_000, &spec).unwrap();
    assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for b in 0..spec.len() {
        let (_, hi) = spec.bounds(b);
        if hi[0] <= 0.0 {
            assert_eq!(h.masses[b], 0.0);
        }
    }
    assert!(h.survivors > 500 && h.survivors < h.paths);
}

#[test]
fn yaglom_on_full_space_is_the_free_law() {
    let m = hemi(1.5, 1, 2.0, 1.0);
    let full = ConeDomain::full(1);
    let r = runner(5, 64);
    let spec = BinSpec::new(p(&[-4.0]), p(&[4.0]), vec![16]).unwrap();
    let h = yaglom_histogram(&r, &m, &full, &p(&[0.0]), 4.0, 50_000, &spec).unwrap();
    let s = PathSampler::new(&m, r.policy().resolve(&m, 1.0).unwrap()).unwrap();
    let free = r.increments(&s, 1.0, 50_000).unwrap();
    let reference = EmpiricalMeasure::from_points(spec.clone(), &free, 50_000);
    assert!(h.tv(&reference) < 0.02, "TV {}", h.tv(&reference));
}

#[test]
fn factorization_ratio_is_near_one_deep_inside() {
    let m = iso(1.5, 2);
    let half = ConeDomain::half_space(p(&[0.0, 1.0])).unwrap();
    let x = p(&[0.0, 5.0]);
    let t = 0.05;
    let table = factorization_ratio(&runner(6, 32), &m, &half, &[x], &[x, p(&[0.05, 5.0])], t, 40_000, None).unwrap();
    for r in table.ratio.iter().flatten() {
        assert!((1.0 / 3.0..=3.0).contains(r), "{table:?}");
    }
    assert!(table.survival_x[0] > 0.99);
}

#[test]
fn factorization_ratio_respects_duality_and_scaling() {
    let m = hemi(1.5, 2, 2.0, 1.0);
    let half = ConeDomain::half_space(p(&[0.0, 1.0])).unwrap();
    let (x, y) = (p(&[0.0, 1.0]), p(&[0.5, 1.5]));
    let r = runner(7, 32);
    let n = 40_000;
    let base = factorization_ratio(&r, &m, &half, &[x], &[y], 1.0, n, None).unwrap().ratio[0][0];
    let swapped = factorization_ratio(&r, &m.dual(), &half, &[y], &[x], 1.0, n, None).unwrap().ratio[0][0];
    let s = 2.0f64;
    let scaled = factorization_ratio(&r, &m, &half, &[x * s], &[y * s], s.powf(1.5), n, None).unwrap().ratio[0][0];
    assert!(base.is_finite() && base > 0.0);
    assert!((swapped / base - 1.0).abs() < 0.3, "{base} vs dual {swapped}");
    assert!((scaled / base - 1.0).abs() < 0.3, "{base} vs rescaled {scaled}");
}

#[test]
fn heat_kernel_shape() {
    let m = iso(1.5, 1);
    let r = runner(8, 64);
    let ys: Vec<Point> = [-6.0, -2.0, -0.5, 0.0, 0.5, 2.0, 6.0].iter().map(|&v| p(&[v])).collect();
    let one = heat_kernel_density(&r, &m, 1.0, &ys, 100_000, None).unwrap();
    for k in 0..3 {
        let (a, b) = (one.values[k], one.values[6 - k]);
        assert!((a / b - 1.0).abs() < 0.15, "{a} vs {b}");
    }
    assert!(one.c < 10.0, "{one:?}");
    let t = 8.0f64;
    let s = t.powf(1.0 / 1.5);
    let scaled: Vec<Point> = ys.iter().map(|y| *y * s).collect();
    let later = heat_kernel_density(&r, &m, t, &scaled, 100_000, None).unwrap();
    for (a, b) in one.values.iter().zip(&later.values) {
        assert!((s * b / a - 1.0).abs() < 0.15, "{a} vs {}", s * b);
    }
}

#[test]
fn overshoot_matches_jump_tail_on_the_half_line() {
    let m = iso(1.5, 1);
    let line = ConeDomain::half_space(p(&[1.0])).unwrap();
    let bins = OvershootBins {
        distance_edges: vec![0.1, 0.3, 0.6, 1.0, 2.0],
        depth_bins: 10,
    };
    let rep = overshoot_conditional_check(&runner(9, 256), &m, &line, &p(&[1.0]), 4.0, 40_000, &bins).unwrap();
    assert!(rep.aggregate_tv < 0.05, "{rep:?}");
    assert!(rep.exits_in_range <= rep.jump_exits && rep.jump_exits <= rep.paths);
    assert_eq!(rep.bins.len(), 4);
}

#[test]
fn cauchy_half_plane_profile_has_half_branch() {
    let m = iso(1.0, 2);
    let half = ConeDomain::half_space(p(&[0.0, 1.0])).unwrap();
    // the projected law is Cauchy with scale 2 pi, so L = 2 pi at t = 1
    let distances: Vec<f64> = (0..14).map(|k| 0.02 * 2f64.powi(k)).collect();
    let rep = halfspace_profile_check(&runner(10, 256), &m, &half, &distances, 1.0, 20_000).unwrap();
    assert!((rep.length_scale - 2.0 * std::f64::consts::PI).abs() < 1e-3);
    let b = rep.branch;
    assert!((b.value - 0.5).abs() < 0.1 && b.ci_lo <= 0.5 + 0.05 && b.ci_hi >= 0.5 - 0.05, "{b:?}");
    assert!(rep.plateau_level.unwrap() <= 1.0);
}
