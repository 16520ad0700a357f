//! Strictly alpha-stable models built from a bounded spherical density.
//!
//! The Levy density is `nu(x) = lambda(x/|x|) |x|^{-d-alpha}` with
//! `theta_low <= lambda <= theta_high`. The drift is never a free parameter:
//! it is pinned by the strict-stability condition of the alpha regime.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::point::{Point, MAX_DIM};
use crate::sphere::SphereGrid;

/// Tolerance on `|spherical mean| / total mass` for alpha = 1 models.
pub const MEAN_TOLERANCE: f64 = 1e-6;

const UNIT_TOLERANCE: f64 = 1e-9;

/// Piecewise-constant density on the Voronoi cells of a set of directions.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedDensity {
    nodes: Vec<Point>,
    values: Vec<f64>,
    /// d = 2 only: (angle, index) sorted by angle, for O(log n) lookup.
    by_angle: Vec<(f64, usize)>,
}

impl TabulatedDensity {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn nearest(&self, w: &Point) -> usize {
        match w.dim() {
            1 => {
                let sign = if w[0] >= 0.0 { 1.0 } else { -1.0 };
                self.nodes
                    .iter()
                    .position(|p| p[0] * sign > 0.0)
                    .unwrap_or(0)
            }
            2 => {
                let a = w[1].atan2(w[0]);
                let n = self.by_angle.len();
                let pos = self.by_angle.partition_point(|(b, _)| *b < a);
                let hi = self.by_angle[pos % n];
                let lo = self.by_angle[(pos + n - 1) % n];
                let gap = |b: f64| {
                    let d = (a - b).abs();
                    d.min(2.0 * PI - d)
                };
                if gap(hi.0) <= gap(lo.0) {
                    hi.1
                } else {
                    lo.1
                }
            }
            _ => {
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (i, p) in self.nodes.iter().enumerate() {
                    let d = p.dot(w);
                    if d > best_dot {
                        best_dot = d;
                        best = i;
                    }
                }
                best
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    Constant(f64),
    /// `plus_weight` on `{w . axis >= 0}` (equator included), `minus_weight` elsewhere.
    Hemisphere {
        axis: Point,
        plus_weight: f64,
        minus_weight: f64,
    },
    Tabulated(TabulatedDensity),
}

/// Spherical density `lambda` together with its declared bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalDensity {
    kind: DensityKind,
    theta_low: f64,
    theta_high: f64,
}

impl SphericalDensity {
    pub fn constant(value: f64, theta_low: f64, theta_high: f64) -> Self {
        Self {
            kind: DensityKind::Constant(value),
            theta_low,
            theta_high,
        }
    }

    pub fn hemisphere(
        axis: Point,
        plus_weight: f64,
        minus_weight: f64,
        theta_low: f64,
        theta_high: f64,
    ) -> Self {
        Self {
            kind: DensityKind::Hemisphere {
                axis,
                plus_weight,
                minus_weight,
            },
            theta_low,
            theta_high,
        }
    }

    /// Tabulated values at the given directions (normalized on validation).
    pub fn tabulated(
        nodes: Vec<Point>,
        values: Vec<f64>,
        theta_low: f64,
        theta_high: f64,
    ) -> Self {
        Self {
            kind: DensityKind::Tabulated(TabulatedDensity {
                nodes,
                values,
                by_angle: Vec::new(),
            }),
            theta_low,
            theta_high,
        }
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn theta_low(&self) -> f64 {
        self.theta_low
    }

    pub fn theta_high(&self) -> f64 {
        self.theta_high
    }

    /// `lambda(w)` for a unit vector `w`.
    pub fn eval(&self, w: &Point) -> f64 {
        match &self.kind {
            DensityKind::Constant(v) => *v,
            DensityKind::Hemisphere {
                axis,
                plus_weight,
                minus_weight,
            } => {
                if w.dot(axis) >= 0.0 {
                    *plus_weight
                } else {
                    *minus_weight
                }
            }
            DensityKind::Tabulated(t) => t.values[t.nearest(w)],
        }
    }

    /// Largest value the density takes.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            DensityKind::Constant(v) => *v,
            DensityKind::Hemisphere {
                plus_weight,
                minus_weight,
                ..
            } => plus_weight.max(*minus_weight),
            DensityKind::Tabulated(t) => t.values.iter().copied().fold(f64::MIN, f64::max),
        }
    }

    /// The antipodal reflection `w -> lambda(-w)`.
    pub fn reflected(&self) -> Self {
        let kind = match &self.kind {
            DensityKind::Constant(v) => DensityKind::Constant(*v),
            DensityKind::Hemisphere {
                axis,
                plus_weight,
                minus_weight,
            } => DensityKind::Hemisphere {
                axis: *axis,
                plus_weight: *minus_weight,
                minus_weight: *plus_weight,
            },
            DensityKind::Tabulated(t) => {
                let mut r = TabulatedDensity {
                    nodes: t.nodes.iter().map(|p| -*p).collect(),
                    values: t.values.clone(),
                    by_angle: Vec::new(),
                };
                r.by_angle = angle_index(&r.nodes);
                DensityKind::Tabulated(r)
            }
        };
        Self {
            kind,
            theta_low: self.theta_low,
            theta_high: self.theta_high,
        }
    }

    fn check_value(&self, value: f64) -> Result<()> {
        if !(value >= self.theta_low && value <= self.theta_high) {
            return Err(Error::ThetaBoundViolated {
                value,
                low: self.theta_low,
                high: self.theta_high,
            });
        }
        Ok(())
    }

    fn validated(mut self, dim: usize) -> Result<Self> {
        let (low, high) = (self.theta_low, self.theta_high);
        if !(low > 0.0 && low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::InvalidThetaBounds { low, high });
        }
        match &mut self.kind {
            DensityKind::Constant(_) => {}
            DensityKind::Hemisphere { axis, .. } => *axis = unit_in_dim(axis, dim)?,
            DensityKind::Tabulated(t) => {
                if t.nodes.is_empty() || t.nodes.len() != t.values.len() {
                    return Err(Error::InvalidDensity(
                        "tabulated density needs equally many nodes and values",
                    ));
                }
                for p in &mut t.nodes {
                    if p.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            got: p.dim(),
                        });
                    }
                    *p = p
                        .normalized()
                        .ok_or(Error::InvalidDensity("tabulated node at the origin"))?;
                }
                if dim == 1 && !(t.nodes.iter().any(|p| p[0] > 0.0) && t.nodes.iter().any(|p| p[0] < 0.0)) {
                    return Err(Error::InvalidDensity("d = 1 table must cover both +1 and -1"));
                }
                t.by_angle = angle_index(&t.nodes);
            }
        }
        match &self.kind {
            DensityKind::Constant(v) => self.check_value(*v)?,
            DensityKind::Hemisphere {
                plus_weight,
                minus_weight,
                ..
            } => {
                self.check_value(*plus_weight)?;
                self.check_value(*minus_weight)?;
            }
            DensityKind::Tabulated(t) => {
                for v in &t.values {
                    self.check_value(*v)?;
                }
            }
        }
        Ok(self)
    }
}

fn angle_index(nodes: &[Point]) -> Vec<(f64, usize)> {
    if nodes.first().map(|p| p.dim()) != Some(2) {
        return Vec::new();
    }
    let mut v: Vec<(f64, usize)> = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| (p[1].atan2(p[0]), i))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn unit_in_dim(v: &Point, dim: usize) -> Result<Point> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    let n = v.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnitVector(n));
    }
    Ok(*v * (1.0 / n))
}

/// Raw, unvalidated model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub dim: usize,
    pub density: SphericalDensity,
}

/// A validated strictly alpha-stable model with its quadrature caches.
#[derive(Clone, Debug)]
pub struct StableModel {
    alpha: f64,
    dim: usize,
    density: SphericalDensity,
    grid: Arc<SphereGrid>,
    total_mass: f64,
    mean: Point,
    second_moment: [[f64; MAX_DIM]; MAX_DIM],
    symmetric: bool,
}

impl PartialEq for StableModel {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.dim == other.dim && self.density == other.density
    }
}

/// Coefficients of the one-dimensional Levy density of `<X, direction>`:
/// `c_minus |z|^{-1-alpha}` on `z < 0` and `c_plus |z|^{-1-alpha}` on `z > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionCoeffs {
    pub direction: Point,
    pub c_minus: f64,
    pub c_plus: f64,
}

/// Homogeneity exponents of the half-space Martin kernels of a model and its dual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfspaceExponents {
    /// `P(<X_1, normal> > 0)`.
    pub rho: f64,
    pub beta: f64,
    pub beta_hat: f64,
}

impl StableModel {
    pub fn validate(params: ModelParams) -> Result<Self> {
        let ModelParams {
            alpha,
            dim,
            density,
        } = params;
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let density = density.validated(dim)?;
        let grid = Arc::new(SphereGrid::for_dim(dim));
        Self::with_grid(alpha, dim, density, grid)
    }

    fn with_grid(
        alpha: f64,
        dim: usize,
        density: SphericalDensity,
        grid: Arc<SphereGrid>,
    ) -> Result<Self> {
        let mut total_mass = 0.0;
        let mut mean = Point::zero(dim);
        let mut second = [[0.0; MAX_DIM]; MAX_DIM];
        let mut symmetric = true;
        for (w, wt) in grid.iter() {
            let lam = density.eval(w);
            density.check_value(lam)?;
            if lam != density.eval(&-*w) {
                symmetric = false;
            }
            total_mass += wt * lam;
            mean = mean.offset(w, wt * lam);
            for i in 0..dim {
                for j in 0..dim {
                    second[i][j] += wt * lam * w[i] * w[j];
                }
            }
        }
        if alpha == 1.0 {
            let tol = MEAN_TOLERANCE * total_mass;
            if mean.norm() > tol {
                return Err(Error::AlphaOneAsymmetric {
                    mean_norm: mean.norm(),
                    tol,
                });
            }
        }
        Ok(Self {
            alpha,
            dim,
            density,
            grid,
            total_mass,
            mean,
            second_moment: second,
            symmetric,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn density(&self) -> &SphericalDensity {
        &self.density
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    /// `zeta(S^{d-1})`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `int xi lambda(xi) sigma(d xi)`.
    pub fn spherical_mean(&self) -> Point {
        self.mean
    }

    /// `int xi xi^T lambda(xi) sigma(d xi)`.
    pub fn spherical_second_moment(&self) -> [[f64; MAX_DIM]; MAX_DIM] {
        self.second_moment
    }

    /// True when `lambda(w) = lambda(-w)` on every quadrature node.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Drift `gamma` forced by strict stability (truncation at the unit ball).
    pub fn drift(&self) -> Point {
        let a = self.alpha;
        if a < 1.0 {
            self.mean * (1.0 / (1.0 - a))
        } else if a > 1.0 {
            self.mean * (-1.0 / (a - 1.0))
        } else {
            Point::zero(self.dim)
        }
    }

    /// `nu(x) = lambda(x/|x|) |x|^{-d-alpha}`.
    pub fn levy_density(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::OriginEvaluation);
        }
        let w = *x * (1.0 / r);
        Ok(self.density.eval(&w) * r.powf(-(self.dim as f64) - self.alpha))
    }

    /// `nu({|z| >= eps})`, the intensity of jumps larger than `eps`.
    pub fn big_jump_rate(&self, eps: f64) -> f64 {
        self.total_mass * eps.powf(-self.alpha) / self.alpha
    }

    /// Pruitt's function
    /// `h(r) = r^{-2} int_{B_r} |z|^2 nu + nu(B_r^c) + r^{-1} |gamma + int z (1_{|z|<r} - 1_{|z|<1}) nu|`,
    /// evaluated at `r` from the radial closed forms and spherical quadrature.
    pub fn pruitt_h(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument("pruitt_h needs r > 0"));
        }
        let a = self.alpha;
        let mass = self.total_mass;
        let second = r.powi(-2) * mass * r.powf(2.0 - a) / (2.0 - a);
        let tail = mass * r.powf(-a) / a;
        // int z (1_{|z|<r} - 1_{|z|<1}) nu(dz) = mean * int_1^r s^{-alpha} ds
        let radial = if a == 1.0 {
            r.ln()
        } else {
            (r.powf(1.0 - a) - 1.0) / (1.0 - a)
        };
        let drift_term = (self.drift() + self.mean * radial).norm() / r;
        Ok(second + tail + drift_term)
    }

    /// Hemisphere integrals `c_+ = int_{w.u>0} lambda(w)(w.u)^alpha` and
    /// `c_- = int_{w.u>0} lambda(-w)(w.u)^alpha` for the unit vector `u`.
    pub fn projection_coefficients(&self, direction: &Point) -> Result<ProjectionCoeffs> {
        let u = unit_in_dim(direction, self.dim)?;
        let (mut c_plus, mut c_minus) = (0.0, 0.0);
        for (w, wt) in self.grid.iter() {
            let p = w.dot(&u);
            if p > 0.0 {
                let f = wt * p.powf(self.alpha);
                c_plus += f * self.density.eval(w);
                c_minus += f * self.density.eval(&-*w);
            }
        }
        Ok(ProjectionCoeffs {
            direction: u,
            c_minus,
            c_plus,
        })
    }

    /// Exponents `beta = alpha (1 - rho)` and `beta_hat = alpha rho` for the
    /// half-space with inward `normal`, where `rho = P(<X_1, normal> > 0)`.
    ///
    /// At alpha = 1 the projection is a symmetric Cauchy law: a vanishing
    /// spherical mean forces `c_+ - c_- = <mean, normal> = 0`, so `rho = 1/2`.
    pub fn halfspace_exponents(&self, normal: &Point) -> Result<HalfspaceExponents> {
        let rho = if self.symmetric || self.alpha == 1.0 {
            self.check_dim(normal)?;
            0.5
        } else {
            let coeffs = self.projection_coefficients(normal)?;
            positivity_parameter(&coeffs, self.alpha)?
        };
        Ok(HalfspaceExponents {
            rho,
            beta: self.alpha * (1.0 - rho),
            beta_hat: self.alpha * rho,
        })
    }

    /// Model of the dual process `-X`: `lambda_hat(w) = lambda(-w)`.
    pub fn dual(&self) -> StableModel {
        StableModel {
            alpha: self.alpha,
            dim: self.dim,
            density: self.density.reflected(),
            grid: Arc::clone(&self.grid),
            total_mass: self.total_mass,
            mean: -self.mean,
            // even moments are invariant under w -> -w
            second_moment: self.second_moment,
            symmetric: self.symmetric,
        }
    }

    /// The same process seen through the rotation/reflection `w -> m w`
    /// (`m` orthogonal, given row-major).
    pub fn transformed(&self, m: &[[f64; MAX_DIM]; MAX_DIM]) -> Result<StableModel> {
        let apply = |p: &Point| {
            let mut q = Point::zero(self.dim);
            for i in 0..self.dim {
                q.set(i, (0..self.dim).map(|j| m[i][j] * p[j]).sum());
            }
            q
        };
        let kind = match &self.density.kind {
            DensityKind::Constant(v) => DensityKind::Constant(*v),
            DensityKind::Hemisphere {
                axis,
                plus_weight,
                minus_weight,
            } => DensityKind::Hemisphere {
                axis: apply(axis),
                plus_weight: *plus_weight,
                minus_weight: *minus_weight,
            },
            DensityKind::Tabulated(t) => DensityKind::Tabulated(TabulatedDensity {
                nodes: t.nodes.iter().map(apply).collect(),
                values: t.values.clone(),
                by_angle: Vec::new(),
            }),
        };
        let density = SphericalDensity {
            kind,
            theta_low: self.density.theta_low,
            theta_high: self.density.theta_high,
        }
        .validated(self.dim)?;
        Self::with_grid(self.alpha, self.dim, density, Arc::clone(&self.grid))
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }
}

/// Zolotarev's formula
/// `rho = 1/2 + (pi alpha)^{-1} arctan( (c_+ - c_-)/(c_+ + c_-) tan(pi alpha / 2) )`
/// for `P(Y_1 > 0)`. The principal arctan branch keeps `rho` inside
/// `(1 - 1/alpha, 1/alpha)` when `alpha > 1`.
pub fn positivity_parameter(coeffs: &ProjectionCoeffs, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Err(Error::AlphaEqualsOne);
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let (cm, cp) = (coeffs.c_minus, coeffs.c_plus);
    if !(cm > 0.0 && cp > 0.0) {
        return Err(Error::InvalidArgument("projection coefficients must be positive"));
    }
    let skew = (cp - cm) / (cp + cm);
    Ok(0.5 + (skew * (PI * alpha / 2.0).tan()).atan() / (PI * alpha))
}
