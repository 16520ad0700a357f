//! Increment and killed-path generation.
//!
//! Jumps larger than `eps` arrive as a Poisson stream with intensity
//! `nu(B_eps^c) = zeta(S) eps^{-alpha} / alpha`, directions drawn from
//! `lambda sigma` and radii `eps U^{-1/alpha}`. Jumps below `eps` are replaced
//! by their first moment (a drift) and optionally a Gaussian with their
//! covariance. For alpha > 1 the big jumps are compensated so the total mean
//! is zero; for alpha = 1 the spherical mean vanishes and no drift is needed.

use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::cone::ConeDomain;
use crate::error::{Error, Result};
use crate::model::{DensityKind, StableModel};
use crate::point::{Point, MAX_DIM};
use crate::stats::{ks_two_sample, KsResult};

/// Steps per horizon used when no explicit scheme is given.
pub const DEFAULT_STEPS: u32 = 2048;

/// Minimum per-step jump cap.
const MIN_JUMP_CAP: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallJumpMode {
    /// Keep only the first moment of jumps below `eps`.
    Drop,
    /// Also add a Gaussian with the covariance of jumps below `eps`.
    GaussianSurrogate,
}

impl SmallJumpMode {
    pub fn default_for(alpha: f64) -> Self {
        if alpha <= 1.0 {
            SmallJumpMode::Drop
        } else {
            SmallJumpMode::GaussianSurrogate
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    pub eps: f64,
    pub delta: f64,
    pub small_jump_mode: SmallJumpMode,
    pub max_jumps_per_step: u64,
}

impl SchemeParams {
    /// Explicit cutoff and step; the cap is set to twenty times the expected
    /// per-step jump count (at least 64).
    pub fn new(model: &StableModel, eps: f64, delta: f64, mode: SmallJumpMode) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidScheme("eps must be positive"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidScheme("delta must be positive"));
        }
        let expected = model.big_jump_rate(eps) * delta;
        let cap = ((20.0 * expected).ceil() as u64).max(MIN_JUMP_CAP);
        Ok(Self {
            eps,
            delta,
            small_jump_mode: mode,
            max_jumps_per_step: cap,
        })
    }

    /// `delta = t_max / steps`, `eps = delta^{1/alpha}`.
    pub fn with_steps(
        model: &StableModel,
        t_max: f64,
        steps: u32,
        mode: Option<SmallJumpMode>,
    ) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || steps == 0 {
            return Err(Error::InvalidScheme("need t_max > 0 and at least one step"));
        }
        let delta = t_max / steps as f64;
        let eps = delta.powf(1.0 / model.alpha());
        Self::new(
            model,
            eps,
            delta,
            mode.unwrap_or_else(|| SmallJumpMode::default_for(model.alpha())),
        )
    }

    pub fn for_horizon(model: &StableModel, t_max: f64) -> Result<Self> {
        Self::with_steps(model, t_max, DEFAULT_STEPS, None)
    }

    pub fn validate(&self, model: &StableModel) -> Result<()> {
        if !(self.eps > 0.0 && self.delta > 0.0 && self.eps.is_finite() && self.delta.is_finite()) {
            return Err(Error::InvalidScheme("eps and delta must be positive"));
        }
        let expected = model.big_jump_rate(self.eps) * self.delta;
        if (self.max_jumps_per_step as f64) < 20.0 * expected {
            return Err(Error::InvalidScheme("jump cap below 20x the expected count per step"));
        }
        Ok(())
    }
}

/// How a run chooses its scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemePolicy {
    /// Same `eps`/`delta` for every horizon.
    Fixed {
        eps: f64,
        delta: f64,
        mode: Option<SmallJumpMode>,
    },
    /// `delta = t_max / steps`, `eps = delta^{1/alpha}` per run.
    PerHorizon {
        steps: u32,
        mode: Option<SmallJumpMode>,
    },
}

impl Default for SchemePolicy {
    fn default() -> Self {
        SchemePolicy::PerHorizon {
            steps: DEFAULT_STEPS,
            mode: None,
        }
    }
}

impl SchemePolicy {
    pub fn resolve(&self, model: &StableModel, t_max: f64) -> Result<SchemeParams> {
        match *self {
            SchemePolicy::Fixed { eps, delta, mode } => SchemeParams::new(
                model,
                eps,
                delta,
                mode.unwrap_or_else(|| SmallJumpMode::default_for(model.alpha())),
            ),
            SchemePolicy::PerHorizon { steps, mode } => {
                SchemeParams::with_steps(model, t_max, steps, mode)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Jump,
    SkeletonCrossing,
    Censored,
}

impl ExitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitKind::Jump => "jump",
            ExitKind::SkeletonCrossing => "skeleton",
            ExitKind::Censored => "censored",
        }
    }
}

/// Censored exit data of one path: `(tau, X_{tau-}, X_tau)`, or the state at
/// `t_max` when the path survived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitRecord {
    pub start: Point,
    pub survived: bool,
    pub exit_time: f64,
    pub pre_exit: Point,
    pub post_exit: Point,
    pub exit_kind: ExitKind,
}

#[derive(Clone, Copy, Debug)]
enum DirectionSampler {
    TwoPoint { p_plus: f64 },
    Uniform,
    /// Uniform side choice weighted by the two values, then a uniform point
    /// of that half-sphere.
    Hemisphere { axis: Point, p_plus: f64 },
    Rejection { envelope: f64 },
}

/// Uniform point on S^{d-1}.
pub fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
    match dim {
        1 => {
            if rng.random::<bool>() {
                Point::basis(1, 0)
            } else {
                -Point::basis(1, 0)
            }
        }
        2 => loop {
            let x = 2.0 * rng.random::<f64>() - 1.0;
            let y = 2.0 * rng.random::<f64>() - 1.0;
            let r2 = x * x + y * y;
            if r2 <= 1.0 && r2 > 1e-12 {
                let inv = 1.0 / r2.sqrt();
                return Point::from_slice(&[x * inv, y * inv]).unwrap();
            }
        },
        _ => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            let r = (1.0 - z * z).max(0.0).sqrt();
            Point::from_slice(&[r * c, r * s, z]).unwrap()
        }
    }
}

#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

/// Scheme-specific sampler for one model.
#[derive(Clone, Debug)]
pub struct PathSampler<'m> {
    model: &'m StableModel,
    scheme: SchemeParams,
    rate: f64,
    neg_inv_alpha: f64,
    drift: Point,
    chol: Option<[[f64; MAX_DIM]; MAX_DIM]>,
    directions: DirectionSampler,
}

impl<'m> PathSampler<'m> {
    pub fn new(model: &'m StableModel, scheme: SchemeParams) -> Result<Self> {
        scheme.validate(model)?;
        let a = model.alpha();
        let eps = scheme.eps;
        let mean = model.spherical_mean();
        let drift = if a < 1.0 {
            // mean of the dropped jumps: mean * int_0^eps r^{-alpha} dr
            mean * (eps.powf(1.0 - a) / (1.0 - a))
        } else if a > 1.0 {
            // compensator of the kept jumps: - mean * int_eps^inf r^{-alpha} dr
            mean * (-eps.powf(1.0 - a) / (a - 1.0))
        } else {
            Point::zero(model.dim())
        };
        let chol = match scheme.small_jump_mode {
            SmallJumpMode::Drop => None,
            SmallJumpMode::GaussianSurrogate => {
                let scale = eps.powf(2.0 - a) / (2.0 - a);
                let mut cov = model.spherical_second_moment();
                cov.iter_mut().flatten().for_each(|c| *c *= scale);
                Some(cholesky(&cov, model.dim()))
            }
        };
        let density = model.density();
        let directions = match (model.dim(), density.kind()) {
            (1, _) => {
                let plus = density.eval(&Point::basis(1, 0));
                let minus = density.eval(&-Point::basis(1, 0));
                DirectionSampler::TwoPoint {
                    p_plus: plus / (plus + minus),
                }
            }
            (_, DensityKind::Constant(_)) => DirectionSampler::Uniform,
            (
                _,
                DensityKind::Hemisphere {
                    axis,
                    plus_weight,
                    minus_weight,
                },
            ) => DirectionSampler::Hemisphere {
                axis: *axis,
                p_plus: plus_weight / (plus_weight + minus_weight),
            },
            _ => DirectionSampler::Rejection {
                envelope: density.sup().min(density.theta_high()),
            },
        };
        Ok(Self {
            model,
            scheme,
            rate: model.big_jump_rate(eps),
            neg_inv_alpha: -1.0 / a,
            drift,
            chol,
            directions,
        })
    }

    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }

    /// Intensity of simulated jumps, `nu(B_eps^c)`.
    pub fn jump_rate(&self) -> f64 {
        self.rate
    }

    /// Deterministic drift per unit time standing in for the small jumps.
    pub fn drift(&self) -> Point {
        self.drift
    }

    /// Direction distributed as `lambda(w) sigma(dw) / zeta(S)`.
    #[inline]
    pub fn direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.directions {
            DirectionSampler::TwoPoint { p_plus } => {
                if rng.random::<f64>() < p_plus {
                    Point::basis(1, 0)
                } else {
                    -Point::basis(1, 0)
                }
            }
            DirectionSampler::Uniform => uniform_direction(self.model.dim(), rng),
            DirectionSampler::Hemisphere { axis, p_plus } => {
                let w = uniform_direction(self.model.dim(), rng);
                let up = rng.random::<f64>() < p_plus;
                let side = w.dot(&axis);
                let flip = ((side >= 0.0) != up) as u8 as f64;
                w.offset(&axis, -2.0 * side * flip)
            }
            DirectionSampler::Rejection { envelope } => loop {
                let w = uniform_direction(self.model.dim(), rng);
                if rng.random::<f64>() * envelope < self.model.density().eval(&w) {
                    return w;
                }
            },
        }
    }

    /// One jump of size at least `eps`.
    #[inline]
    pub fn jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let w = self.direction(rng);
        let r = self.scheme.eps * open_unit(rng).powf(self.neg_inv_alpha);
        w * r
    }

    #[inline]
    fn wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        -open_unit(rng).ln() / self.rate
    }

    fn gaussian<R: Rng + ?Sized>(&self, chol: &[[f64; MAX_DIM]; MAX_DIM], dt: f64, rng: &mut R) -> Point {
        let dim = self.model.dim();
        let mut z = [0.0; MAX_DIM];
        for zi in z.iter_mut().take(dim) {
            *zi = rng.sample::<f64, _>(StandardNormal);
        }
        let s = dt.sqrt();
        let mut g = Point::zero(dim);
        for i in 0..dim {
            g.set(i, s * (0..=i).map(|j| chol[i][j] * z[j]).sum::<f64>());
        }
        g
    }

    /// Displacement over time `t` together with the number of simulated jumps.
    pub fn increment_with_count<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<(Point, u64)> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument("increment needs t > 0"));
        }
        let mean = self.rate * t;
        let count = Poisson::new(mean)
            .map_err(|_| Error::InvalidScheme("jump intensity out of range"))?
            .sample(rng) as u64;
        let steps = (t / self.scheme.delta).ceil().max(1.0) as u64;
        let cap = self.scheme.max_jumps_per_step.saturating_mul(steps);
        if count > cap {
            return Err(Error::JumpCapExceeded { cap });
        }
        let mut x = self.drift * t;
        for _ in 0..count {
            x += self.jump(rng);
        }
        if let Some(chol) = &self.chol {
            x += self.gaussian(chol, t, rng);
        }
        Ok((x, count))
    }

    pub fn increment<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<Point> {
        self.increment_with_count(t, rng).map(|(x, _)| x)
    }

    /// Simulate from `x0` until the first exit from `domain` or `t_max`.
    pub fn exit<R: Rng + ?Sized>(
        &self,
        domain: &ConeDomain,
        x0: Point,
        t_max: f64,
        rng: &mut R,
    ) -> Result<ExitRecord> {
        if domain.dim() != self.model.dim() || x0.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: x0.dim(),
            });
        }
        if !domain.contains(&x0) {
            return Err(Error::StartOutsideDomain);
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidArgument("t_max must be positive"));
        }
        let censored = |x: Point| ExitRecord {
            start: x0,
            survived: true,
            exit_time: t_max,
            pre_exit: x,
            post_exit: x,
            exit_kind: ExitKind::Censored,
        };
        if let ConeDomain::FullSpace { .. } = domain {
            return Ok(censored(x0 + self.increment(t_max, rng)?));
        }
        let exited = |time: f64, pre: Point, post: Point, kind: ExitKind| ExitRecord {
            start: x0,
            survived: false,
            exit_time: time,
            pre_exit: pre,
            post_exit: post,
            exit_kind: kind,
        };
        let delta = self.scheme.delta;
        let cap = self.scheme.max_jumps_per_step;
        let steps = (t_max / delta).ceil().max(1.0) as u64;
        let has_drift = self.drift.norm_sq() > 0.0;
        let mut x = x0;
        let mut t = 0.0;
        let mut next_jump = self.wait(rng);
        for k in 0..steps {
            let step_start = k as f64 * delta;
            let step_end = if k + 1 == steps {
                t_max
            } else {
                (k + 1) as f64 * delta
            };
            let mut count = 0u64;
            while next_jump <= step_end {
                if has_drift {
                    let y = x.offset(&self.drift, next_jump - t);
                    if let Some(u) = domain.segment_exit(&x, &y) {
                        let (u, hit) = landing(domain, &x, &y, u);
                        return Ok(exited(t + u * (next_jump - t), hit, hit, ExitKind::SkeletonCrossing));
                    }
                    x = y;
                }
                t = next_jump;
                count += 1;
                if count > cap {
                    return Err(Error::JumpCapExceeded { cap });
                }
                let pre = x;
                x += self.jump(rng);
                if !domain.contains(&x) {
                    return Ok(exited(t, pre, x, ExitKind::Jump));
                }
                next_jump = t + self.wait(rng);
            }
            if has_drift {
                let y = x.offset(&self.drift, step_end - t);
                if let Some(u) = domain.segment_exit(&x, &y) {
                    let (u, hit) = landing(domain, &x, &y, u);
                    return Ok(exited(t + u * (step_end - t), hit, hit, ExitKind::SkeletonCrossing));
                }
                x = y;
            }
            t = step_end;
            if let Some(chol) = &self.chol {
                let pre = x;
                x += self.gaussian(chol, step_end - step_start, rng);
                if !domain.contains(&x) {
                    return Ok(exited(t, pre, x, ExitKind::SkeletonCrossing));
                }
            }
        }
        Ok(censored(x))
    }
}

/// First point at or just past the crossing parameter `u` that lies outside
/// the domain, so rounding never leaves a recorded exit inside.
fn landing(domain: &ConeDomain, a: &Point, b: &Point, u: f64) -> (f64, Point) {
    let d = *b - *a;
    let mut v = u;
    let mut step = f64::EPSILON;
    loop {
        let hit = a.offset(&d, v);
        if !domain.contains(&hit) || v >= 1.0 {
            return (v, hit);
        }
        v = (u + step).min(1.0);
        step *= 2.0;
    }
}

fn cholesky(a: &[[f64; MAX_DIM]; MAX_DIM], dim: usize) -> [[f64; MAX_DIM]; MAX_DIM] {
    let mut l = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..dim {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][j] = (a[i][i] - s).max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Direction distributed as `lambda(w) sigma(dw)`, by rejection from the
/// uniform law on the sphere.
pub fn sample_direction<R: Rng + ?Sized>(model: &StableModel, rng: &mut R) -> Point {
    let scheme = SchemeParams {
        eps: 1.0,
        delta: 1.0,
        small_jump_mode: SmallJumpMode::Drop,
        max_jumps_per_step: u64::MAX,
    };
    PathSampler::new(model, scheme)
        .expect("unit scheme is always valid")
        .direction(rng)
}

pub fn sample_increment<R: Rng + ?Sized>(
    model: &StableModel,
    t: f64,
    scheme: &SchemeParams,
    rng: &mut R,
) -> Result<Point> {
    PathSampler::new(model, *scheme)?.increment(t, rng)
}

pub fn sample_path_exit<R: Rng + ?Sized>(
    model: &StableModel,
    domain: &ConeDomain,
    x0: Point,
    t_max: f64,
    scheme: &SchemeParams,
    rng: &mut R,
) -> Result<ExitRecord> {
    PathSampler::new(model, *scheme)?.exit(domain, x0, t_max, rng)
}

/// Exact sampler (Chambers-Mallows-Stuck) for the one-dimensional strictly
/// stable law with Levy density `c_- |z|^{-1-alpha}` on `z < 0` and
/// `c_+ |z|^{-1-alpha}` on `z > 0`.
#[derive(Clone, Copy, Debug)]
pub struct ExactStable1d {
    alpha: f64,
    /// Scale of `Y_1`.
    scale: f64,
    shift: f64,
    s_factor: f64,
}

impl ExactStable1d {
    pub fn new(alpha: f64, c_minus: f64, c_plus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(c_minus >= 0.0 && c_plus >= 0.0 && c_minus + c_plus > 0.0) {
            return Err(Error::InvalidArgument("coefficients must be non-negative, not both zero"));
        }
        let total = c_minus + c_plus;
        if alpha == 1.0 {
            if (c_plus - c_minus).abs() > 1e-12 * total {
                return Err(Error::AlphaOneAsymmetric {
                    mean_norm: (c_plus - c_minus).abs(),
                    tol: 1e-12 * total,
                });
            }
            return Ok(Self {
                alpha,
                scale: total * PI / 2.0,
                shift: 0.0,
                s_factor: 1.0,
            });
        }
        let skew = (c_plus - c_minus) / total;
        let tan = (PI * alpha / 2.0).tan();
        // log E e^{iuY_1} = -scale^alpha |u|^alpha (1 - i skew sgn(u) tan(pi alpha / 2))
        let scale_pow = -gamma(-alpha) * (PI * alpha / 2.0).cos() * total;
        Ok(Self {
            alpha,
            scale: scale_pow.powf(1.0 / alpha),
            shift: (skew * tan).atan() / alpha,
            s_factor: (1.0 + skew * skew * tan * tan).powf(1.0 / (2.0 * alpha)),
        })
    }

    /// Scale parameter of `Y_1`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let v = loop {
            let u = rng.random::<f64>();
            if u > 0.0 {
                break PI * (u - 0.5);
            }
        };
        let a = self.alpha;
        let y = if a == 1.0 {
            v.tan()
        } else {
            let w = -open_unit(rng).ln();
            let b = self.shift;
            self.s_factor * (a * (v + b)).sin() / v.cos().powf(1.0 / a)
                * ((v - a * (v + b)).cos() / w).powf((1.0 - a) / a)
        };
        self.scale * t.powf(1.0 / a) * y
    }
}

pub fn sample_increment_1d_exact<R: Rng + ?Sized>(
    alpha: f64,
    c_minus: f64,
    c_plus: f64,
    t: f64,
    rng: &mut R,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("increment needs t > 0"));
    }
    Ok(ExactStable1d::new(alpha, c_minus, c_plus)?.sample(t, rng))
}

/// Gamma function for real arguments (Lanczos, reflection below 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut acc = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Outcome of [`scheme_bias_probe`].
#[derive(Clone, Debug)]
pub struct BiasReport {
    pub scheme: SchemeParams,
    /// `t^{-1/alpha} X_t` (t = 4) against `X_1`, last coordinate.
    pub scaling: KsResult,
    /// `<X_1, e_d>` against the exact one-dimensional law, when that law is
    /// determined by the projection coefficients (alpha != 1 or symmetric).
    pub oracle: Option<KsResult>,
    pub suggested_eps: f64,
    pub suggested_delta: f64,
}

impl BiasReport {
    pub fn passes(&self, level: f64) -> bool {
        self.scaling.p_value > level && self.oracle.is_none_or(|o| o.p_value > level)
    }
}

/// Scaling self-test plus exact one-dimensional comparison for a scheme.
pub fn scheme_bias_probe<R: Rng + ?Sized>(
    model: &StableModel,
    scheme: &SchemeParams,
    n: usize,
    rng: &mut R,
) -> Result<BiasReport> {
    if n < 8 {
        return Err(Error::InvalidArgument("bias probe needs n >= 8"));
    }
    let sampler = PathSampler::new(model, *scheme)?;
    let dim = model.dim();
    let axis = Point::last_basis(dim);
    let t = 4.0;
    let factor = t.powf(-1.0 / model.alpha());
    let mut scaled = alloc::vec::Vec::with_capacity(n);
    let mut unit = alloc::vec::Vec::with_capacity(n);
    for _ in 0..n {
        scaled.push(sampler.increment(t, rng)?.dot(&axis) * factor);
    }
    for _ in 0..n {
        unit.push(sampler.increment(1.0, rng)?.dot(&axis));
    }
    let scaling = ks_two_sample(&scaled, &unit);
    let oracle = if model.alpha() != 1.0 || model.is_symmetric() {
        let c = model.projection_coefficients(&axis)?;
        let (cm, cp) = if model.alpha() == 1.0 {
            let m = 0.5 * (c.c_minus + c.c_plus);
            (m, m)
        } else {
            (c.c_minus, c.c_plus)
        };
        let exact = ExactStable1d::new(model.alpha(), cm, cp)?;
        let reference: alloc::vec::Vec<f64> = (0..n).map(|_| exact.sample(1.0, rng)).collect();
        Some(ks_two_sample(&unit, &reference))
    } else {
        None
    };
    let ok = scaling.p_value > 0.01 && oracle.is_none_or(|o| o.p_value > 0.01);
    let suggested_eps = if ok { scheme.eps } else { scheme.eps / 10.0 };
    Ok(BiasReport {
        scheme: *scheme,
        scaling,
        oracle,
        suggested_eps,
        suggested_delta: if ok {
            scheme.delta
        } else {
            suggested_eps.powf(model.alpha()).min(scheme.delta)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, SphericalDensity};
    use crate::seed::batch_rng;

    fn hemi1(alpha: f64, plus: f64, minus: f64) -> StableModel {
        StableModel::validate(ModelParams {
            alpha,
            dim: 1,
            density: SphericalDensity::hemisphere(Point::basis(1, 0), plus, minus, 0.5, 3.0),
        })
        .unwrap()
    }

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-12);
        // Gamma(-0.5) = -2 sqrt(pi)
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_point_direction_frequency() {
        let m = hemi1(0.7, 2.0, 1.0);
        let mut rng = batch_rng(1);
        let n = 200_000;
        let plus = (0..n)
            .filter(|_| sample_direction(&m, &mut rng)[0] > 0.0)
            .count() as f64
            / n as f64;
        let se = (2.0 / 9.0 / n as f64).sqrt();
        assert!((plus - 2.0 / 3.0).abs() < 4.0 * se, "{plus}");
    }

    #[test]
    fn small_epsilon_trips_jump_cap() {
        let m = hemi1(1.5, 1.0, 1.0);
        let mut s = SchemeParams::new(&m, 0.01, 1.0, SmallJumpMode::Drop).unwrap();
        s.max_jumps_per_step = 0;
        assert!(matches!(s.validate(&m), Err(Error::InvalidScheme(_))));
        let s = SchemeParams::new(&m, 1e-3, 1.0, SmallJumpMode::Drop).unwrap();
        let sampler = PathSampler::new(&m, s).unwrap();
        let mut rng = batch_rng(3);
        // 1000 steps worth of jumps in one step of the declared length
        let mut tight = sampler.clone();
        tight.scheme.delta = 1e6;
        assert!(tight.increment(1e3, &mut rng).is_err());
        assert!(sampler.increment(1.0, &mut rng).is_ok());
    }

    #[test]
    fn exact_sampler_rejects_asymmetric_cauchy() {
        assert!(matches!(
            ExactStable1d::new(1.0, 1.0, 2.0),
            Err(Error::AlphaOneAsymmetric { .. })
        ));
        assert!(ExactStable1d::new(1.0, 2.0, 2.0).is_ok());
    }

    #[test]
    fn censoring_is_consistent() {
        let m = hemi1(1.5, 1.0, 1.0);
        let d = ConeDomain::half_space(Point::basis(1, 0)).unwrap();
        let s = SchemeParams::for_horizon(&m, 1.0).unwrap();
        let mut rng = batch_rng(9);
        for _ in 0..500 {
            let r = sample_path_exit(&m, &d, Point::basis(1, 0), 1.0, &s, &mut rng).unwrap();
            assert_eq!(r.survived, r.exit_kind == ExitKind::Censored);
            assert_eq!(r.survived, r.exit_time == 1.0);
            if r.survived {
                assert!(d.contains(&r.post_exit));
            } else {
                assert!(!d.contains(&r.post_exit));
                assert!(r.exit_time <= 1.0);
            }
            if r.exit_kind == ExitKind::Jump {
                assert!(d.contains(&r.pre_exit));
            }
        }
    }

    #[test]
    fn start_outside_is_rejected() {
        let m = hemi1(0.5, 1.0, 1.0);
        let d = ConeDomain::half_space(Point::basis(1, 0)).unwrap();
        let s = SchemeParams::for_horizon(&m, 1.0).unwrap();
        let mut rng = batch_rng(0);
        assert_eq!(
            sample_path_exit(&m, &d, -Point::basis(1, 0), 1.0, &s, &mut rng),
            Err(Error::StartOutsideDomain)
        );
    }
}
