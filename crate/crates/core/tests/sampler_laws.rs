use std::f64::consts::PI;

use anisotable_core::cone::ConeDomain;
use anisotable_core::exec::{RecordLog, Runner, Serial, SurvivalLevels};
use anisotable_core::model::{ModelParams, SphericalDensity, StableModel};
use anisotable_core::point::Point;
use anisotable_core::sampler::{
    sample_direction, sample_increment_1d_exact, scheme_bias_probe, ExactStable1d, ExitKind,
    PathSampler, SchemeParams, SchemePolicy, SmallJumpMode,
};
use anisotable_core::seed::batch_rng;
use anisotable_core::stats::{kolmogorov_tail, ks_two_sample};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

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

fn fixed(m: &StableModel, eps: f64, mode: SmallJumpMode) -> SchemeParams {
    SchemeParams::new(m, eps, 1.0, mode).unwrap()
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

/// One-sample Kolmogorov-Smirnov p-value.
fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max);
    kolmogorov_tail(d * n.sqrt())
}

fn sector(x: &Point, k: usize) -> usize {
    let a = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
    ((a / (2.0 * PI) * k as f64) as usize).min(k - 1)
}

#[test]
fn uniform_directions_fill_sectors_evenly() {
    let mut rng = batch_rng(1);
    let m2 = iso(0.8, 2);
    let mut counts = [0u64; 12];
    for _ in 0..100_000 {
        counts[sector(&sample_direction(&m2, &mut rng), 12)] += 1;
    }
    assert!(chi_square_p(&counts) > 0.01, "{counts:?}");
    let m3 = iso(0.8, 3);
    let mut octants = [0u64; 8];
    for _ in 0..100_000 {
        let w = sample_direction(&m3, &mut rng);
        assert!((w.norm() - 1.0).abs() < 1e-12);
        let k = (w[0] > 0.0) as usize + 2 * (w[1] > 0.0) as usize + 4 * (w[2] > 0.0) as usize;
        octants[k] += 1;
    }
    assert!(chi_square_p(&octants) > 0.01, "{octants:?}");
}

#[test]
fn two_point_law_puts_two_thirds_up() {
    let m = hemi(0.8, 1, 2.0, 1.0);
    let mut rng = batch_rng(2);
    let n = 100_000;
    let up = (0..n).filter(|_| sample_direction(&m, &mut rng)[0] > 0.0).count() as f64 / n as f64;
    let se = (2.0 / 9.0 / n as f64).sqrt();
    assert!((up - 2.0 / 3.0).abs() < 3.0 * se, "{up}");
}

#[test]
fn tabulated_directions_follow_the_density() {
    let k = 720;
    let saddle = |a: f64| 1.0 + 0.3 * (a.cos().powi(2) - a.sin().powi(2));
    let nodes: Vec<Point> = (0..k)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / k as f64;
            p(&[a.cos(), a.sin()])
        })
        .collect();
    let values = (0..k).map(|i| saddle(2.0 * PI * i as f64 / k as f64)).collect();
    let m = model(1.0, 2, SphericalDensity::tabulated(nodes, values, 0.5, 1.5));
    // oracle: fine midpoint quadrature of the analytic density per sector
    let bins = 36;
    let sub = 1000;
    let mut expected = vec![0.0; bins];
    for (b, e) in expected.iter_mut().enumerate() {
        for j in 0..sub {
            let a = 2.0 * PI * (b as f64 + (j as f64 + 0.5) / sub as f64) / bins as f64;
            *e += saddle(a);
        }
    }
    let total: f64 = expected.iter().sum();
    let n = 1_000_000;
    let mut counts = vec![0u64; bins];
    let mut rng = batch_rng(3);
    for _ in 0..n {
        counts[sector(&sample_direction(&m, &mut rng), bins)] += 1;
    }
    let tv: f64 = 0.5
        * counts
            .iter()
            .zip(&expected)
            .map(|(&c, &e)| (c as f64 / n as f64 - e / total).abs())
            .sum::<f64>();
    assert!(tv < 0.01, "TV {tv}");
}

#[test]
fn isotropic_cauchy_increments_have_uniform_angle() {
    let m = iso(1.0, 2);
    let s = PathSampler::new(&m, fixed(&m, 0.02, SmallJumpMode::GaussianSurrogate)).unwrap();
    let mut rng = batch_rng(4);
    let mut counts = [0u64; 16];
    for _ in 0..100_000 {
        counts[sector(&s.increment(1.0, &mut rng).unwrap(), 16)] += 1;
    }
    assert!(chi_square_p(&counts) > 0.01, "{counts:?}");
}

#[test]
fn dual_model_samples_like_negated_model() {
    let m = hemi(0.8, 2, 2.0, 1.0);
    let d = m.dual();
    let scheme = fixed(&m, 0.01, SmallJumpMode::GaussianSurrogate);
    let (sm, sd) = (PathSampler::new(&m, scheme).unwrap(), PathSampler::new(&d, scheme).unwrap());
    let mut rng = batch_rng(5);
    let n = 100_000;
    let a: Vec<Point> = (0..n).map(|_| -sm.increment(1.0, &mut rng).unwrap()).collect();
    let b: Vec<Point> = (0..n).map(|_| sd.increment(1.0, &mut rng).unwrap()).collect();
    for i in 0..2 {
        let (xa, xb): (Vec<f64>, Vec<f64>) = (a.iter().map(|x| x[i]).collect(), b.iter().map(|x| x[i]).collect());
        let ks = ks_two_sample(&xa, &xb);
        assert!(ks.p_value > 0.01, "coordinate {i}: {ks:?}");
    }
}

#[test]
fn big_jump_count_matches_intensity() {
    // nu(B_eps^c) = (pi * (plus + minus)) eps^{-alpha} / alpha on the plane
    let (alpha, eps, t): (f64, f64, f64) = (0.8, 0.05, 2.0);
    let m = hemi(alpha, 2, 2.0, 1.0);
    let oracle = t * PI * 3.0 * eps.powf(-alpha) / alpha;
    let s = PathSampler::new(&m, fixed(&m, eps, SmallJumpMode::Drop)).unwrap();
    let mut rng = batch_rng(6);
    let n = 20_000;
    let counts: Vec<f64> = (0..n).map(|_| s.increment_with_count(t, &mut rng).unwrap().1 as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - oracle).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {oracle}");
}

#[test]
fn exact_sampler_matches_levy_distribution() {
    // one-sided alpha = 1/2 with density c z^{-3/2}: Levy law with scale 2 pi c^2
    let c = 0.7;
    let gamma = 2.0 * PI * c * c;
    let mut rng = batch_rng(7);
    let xs: Vec<f64> = (0..100_000).map(|_| sample_increment_1d_exact(0.5, 0.0, c, 1.0, &mut rng).unwrap()).collect();
    assert!(xs.iter().all(|&x| x > 0.0));
    let pv = ks_one_sample(xs, |x| if x <= 0.0 { 0.0 } else { erfc((gamma / (2.0 * x)).sqrt()) });
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn exact_sampler_matches_cauchy_distribution() {
    // c |z|^{-2} on both sides: Cauchy with scale c pi
    let c = 1.3;
    let mut rng = batch_rng(8);
    let xs: Vec<f64> = (0..100_000).map(|_| sample_increment_1d_exact(1.0, c, c, 1.0, &mut rng).unwrap()).collect();
    let pv = ks_one_sample(xs, |x| 0.5 + (x / (c * PI)).atan() / PI);
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn exact_sampler_symmetric_median_is_zero() {
    let mut rng = batch_rng(9);
    for alpha in [0.5, 0.8, 1.5] {
        let n = 100_000;
        let pos = (0..n).filter(|_| sample_increment_1d_exact(alpha, 1.0, 1.0, 1.0, &mut rng).unwrap() > 0.0).count();
        let f = pos as f64 / n as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "alpha {alpha}: {f}");
    }
}

#[test]
fn exact_sampler_is_self_similar() {
    let mut rng = batch_rng(10);
    for (alpha, cm, cp) in [(0.5, 1.0, 3.0), (0.8, 1.0, 2.0), (1.5, 1.0, 2.0)] {
        let y = ExactStable1d::new(alpha, cm, cp).unwrap();
        let t: f64 = 3.0;
        let a: Vec<f64> = (0..50_000).map(|_| y.sample(t, &mut rng) * t.powf(-1.0 / alpha)).collect();
        let b: Vec<f64> = (0..50_000).map(|_| y.sample(1.0, &mut rng)).collect();
        let ks = ks_two_sample(&a, &b);
        assert!(ks.p_value > 0.01, "alpha {alpha}: {ks:?}");
    }
}

#[test]
fn exact_sign_frequency_matches_positivity_parameter() {
    let m = hemi(0.5, 1, 3.0, 1.0);
    let rho = m.halfspace_exponents(&p(&[1.0])).unwrap().rho;
    let y = ExactStable1d::new(0.5, 1.0, 3.0).unwrap();
    let mut rng = batch_rng(11);
    let n = 1_000_000;
    let pos = (0..n).filter(|_| y.sample(1.0, &mut rng) > 0.0).count() as f64 / n as f64;
    let se = (rho * (1.0 - rho) / n as f64).sqrt();
    assert!((pos - rho).abs() < 3.0 * se, "{pos} vs {rho}");
}

#[test]
fn short_horizon_paths_survive() {
    let m = iso(1.5, 2);
    let domain = ConeDomain::half_space(p(&[0.0, 1.0])).unwrap();
    let x0 = p(&[0.0, 1.0]);
    let runner = Runner::new(&Serial, 12);
    let mut prev = 0.0;
    for t in [1e-1, 1e-2, 1e-3, 1e-4] {
        let s = PathSampler::new(&m, SchemeParams::with_steps(&m, t, 64, None).unwrap()).unwrap();
        let lv = runner
            .simulate(&s, &domain, x0, t, 20_000, || SurvivalLevels::new(vec![t]))
            .unwrap();
        let f = lv.survivors(0) as f64 / lv.total() as f64;
        assert!(f >= prev, "t = {t}");
        prev = f;
    }
    assert!(prev > 0.999, "{prev}");
}

#[test]
fn half_line_survival_decreases_on_shared_paths() {
    let m = iso(1.5, 1);
    let domain = ConeDomain::half_space(p(&[1.0])).unwrap();
    let grid = vec![0.25, 0.5, 1.0, 2.0, 4.0];
    let s = PathSampler::new(&m, SchemeParams::with_steps(&m, 4.0, 512, None).unwrap()).unwrap();
    let runner = Runner::new(&Serial, 13);
    let lv = runner
        .simulate(&s, &domain, p(&[1.0]), 4.0, 20_000, || SurvivalLevels::new(grid.clone()))
        .unwrap();
    let surv: Vec<u64> = (0..grid.len()).map(|k| lv.survivors(k)).collect();
    assert!(surv.windows(2).all(|w| w[1] <= w[0]), "{surv:?}");
    assert!(surv[0] > surv[4] && surv[4] > 0);
    let at_one = surv[2] as f64 / lv.total() as f64;
    assert!(at_one > 0.0 && at_one < 1.0);
}

#[test]
fn exit_records_are_consistent() {
    let m = hemi(0.8, 2, 2.0, 1.0);
    let domains = [
        ConeDomain::half_space(p(&[0.0, 1.0])).unwrap(),
        ConeDomain::circular_cone(p(&[0.0, 1.0]), 0.6).unwrap(),
        ConeDomain::circular_cone(p(&[0.0, 1.0]), 2.4).unwrap(),
        ConeDomain::complement_hyperplane(p(&[1.0, 0.0])).unwrap(),
    ];
    let runner = Runner::new(&Serial, 14);
    for d in &domains {
        let s = PathSampler::new(&m, SchemeParams::with_steps(&m, 2.0, 128, None).unwrap()).unwrap();
        let log = runner.simulate(&s, d, p(&[0.1, 1.0]), 2.0, 5_000, RecordLog::default).unwrap();
        for (_, r) in &log.0 {
            assert_eq!(r.survived, r.exit_kind == ExitKind::Censored);
            assert_eq!(r.survived, r.exit_time == 2.0);
            if r.survived {
                assert!(d.contains(&r.post_exit));
            } else {
                assert!(!d.contains(&r.post_exit) || r.exit_kind == ExitKind::SkeletonCrossing);
                assert!(r.exit_time > 0.0 && r.exit_time <= 2.0);
            }
            if r.exit_kind == ExitKind::Jump {
                assert!(d.contains(&r.pre_exit) && !d.contains(&r.post_exit));
            }
        }
    }
}

#[test]
fn same_seed_same_records() {
    let m = hemi(1.5, 2, 2.0, 1.0);
    let d = ConeDomain::half_space(p(&[0.0, 1.0])).unwrap();
    let s = PathSampler::new(&m, SchemeParams::with_steps(&m, 1.0, 64, None).unwrap()).unwrap();
    let run = |seed| {
        Runner::new(&Serial, seed)
            .simulate(&s, &d, p(&[0.0, 1.0]), 1.0, 40_000, RecordLog::default)
            .unwrap()
    };
    let (a, b, c) = (run(5), run(5), run(6));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.0.iter().enumerate().all(|(i, (id, _))| *id == i as u64));
}

#[test]
fn bias_probe_sees_shrinking_bias() {
    // a small density puts the natural scale of X_1 near 0.01, so the three
    // cutoffs run from gross to mild relative to it
    let m = model(1.5, 1, SphericalDensity::constant(3e-4, 1e-4, 1e-3));
    let mut rng = batch_rng(15);
    let stats: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&eps| {
            let scheme = fixed(&m, eps, SmallJumpMode::Drop);
            scheme_bias_probe(&m, &scheme, 20_000, &mut rng).unwrap().oracle.unwrap().statistic
        })
        .collect();
    assert!(stats[0] > stats[1] && stats[1] > stats[2], "{stats:?}");
}

#[test]
fn bias_probe_accepts_defaults_and_rejects_gross_cutoffs() {
    let m = iso(1.5, 2);
    let mut rng = batch_rng(16);
    let default = SchemePolicy::default().resolve(&m, 1.0).unwrap();
    let ok = scheme_bias_probe(&m, &default, 4_000, &mut rng).unwrap();
    assert!(ok.passes(0.01), "{ok:?}");
    assert_eq!(ok.suggested_eps, default.eps);
    let huge = fixed(&m, 10.0, SmallJumpMode::GaussianSurrogate);
    let bad = scheme_bias_probe(&m, &huge, 40_000, &mut rng).unwrap();
    assert!(!bad.passes(0.01), "{bad:?}");
    assert!(bad.suggested_eps < 10.0);
}
