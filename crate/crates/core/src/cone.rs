//! Scale-invariant open sets (cones) with exact membership, boundary
//! distance, segment exit and fat-witness queries.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Clone, Debug, PartialEq)]
pub enum ConeDomain {
    FullSpace { dim: usize },
    /// `{x : x . normal > 0}`
    HalfSpace { normal: Point },
    /// `{x != 0 : angle(x, axis) < half_angle}`
    CircularCone { axis: Point, half_angle: f64 },
    /// `{x : x . normal != 0}`
    ComplementHyperplane { normal: Point },
}

impl ConeDomain {
    pub fn full(dim: usize) -> Self {
        ConeDomain::FullSpace { dim }
    }

    pub fn half_space(normal: Point) -> Result<Self> {
        Ok(ConeDomain::HalfSpace {
            normal: unit(&normal)?,
        })
    }

    pub fn circular_cone(axis: Point, half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle < core::f64::consts::PI) {
            return Err(Error::InvalidDomain("cone half-angle must lie in (0, pi)"));
        }
        Ok(ConeDomain::CircularCone {
            axis: unit(&axis)?,
            half_angle,
        })
    }

    pub fn complement_hyperplane(normal: Point) -> Result<Self> {
        Ok(ConeDomain::ComplementHyperplane {
            normal: unit(&normal)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConeDomain::FullSpace { dim } => *dim,
            ConeDomain::HalfSpace { normal } | ConeDomain::ComplementHyperplane { normal } => {
                normal.dim()
            }
            ConeDomain::CircularCone { axis, .. } => axis.dim(),
        }
    }

    /// The set `-D`.
    pub fn reflected(&self) -> Self {
        match self {
            ConeDomain::FullSpace { dim } => ConeDomain::FullSpace { dim: *dim },
            ConeDomain::HalfSpace { normal } => ConeDomain::HalfSpace { normal: -*normal },
            ConeDomain::CircularCone { axis, half_angle } => ConeDomain::CircularCone {
                axis: -*axis,
                half_angle: *half_angle,
            },
            ConeDomain::ComplementHyperplane { normal } => {
                ConeDomain::ComplementHyperplane { normal: *normal }
            }
        }
    }

    /// A unit vector pointing into the domain (normal or axis).
    pub fn inward_direction(&self) -> Point {
        match self {
            ConeDomain::FullSpace { dim } => Point::last_basis(*dim),
            ConeDomain::HalfSpace { normal } | ConeDomain::ComplementHyperplane { normal } => {
                *normal
            }
            ConeDomain::CircularCone { axis, .. } => *axis,
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            ConeDomain::FullSpace { .. } | ConeDomain::HalfSpace { .. } => true,
            ConeDomain::CircularCone { half_angle, .. } => {
                *half_angle <= FRAC_PI_2 || self.dim() == 1
            }
            ConeDomain::ComplementHyperplane { .. } => false,
        }
    }

    /// Open-set membership; boundary points are outside.
    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            ConeDomain::FullSpace { .. } => true,
            ConeDomain::HalfSpace { normal } => x.dot(normal) > 0.0,
            ConeDomain::ComplementHyperplane { normal } => x.dot(normal) != 0.0,
            ConeDomain::CircularCone { axis, half_angle } => cone_margin(x, axis, *half_angle) > 0.0,
        }
    }

    /// `delta(x) = inf { |y - x| : y outside the domain }` (zero outside).
    pub fn boundary_distance(&self, x: &Point) -> f64 {
        match self {
            ConeDomain::FullSpace { .. } => f64::INFINITY,
            ConeDomain::HalfSpace { normal } => x.dot(normal).max(0.0),
            ConeDomain::ComplementHyperplane { normal } => x.dot(normal).abs(),
            ConeDomain::CircularCone { axis, half_angle } => {
                if !self.contains(x) {
                    return 0.0;
                }
                let r = x.norm();
                if x.dim() == 1 {
                    return r;
                }
                let phi = (x.dot(axis) / r).clamp(-1.0, 1.0).acos();
                r * (half_angle - phi).min(FRAC_PI_2).sin()
            }
        }
    }

    /// First parameter `u` in (0, 1] at which `a + u (b - a)` leaves the
    /// domain, given `a` inside. `None` when the whole segment stays inside.
    pub fn segment_exit(&self, a: &Point, b: &Point) -> Option<f64> {
        match self {
            ConeDomain::FullSpace { .. } => None,
            ConeDomain::HalfSpace { normal } => {
                let (pa, pb) = (a.dot(normal), b.dot(normal));
                (pb <= 0.0).then(|| (pa / (pa - pb)).clamp(0.0, 1.0))
            }
            ConeDomain::ComplementHyperplane { normal } => {
                let (pa, pb) = (a.dot(normal), b.dot(normal));
                (pb == 0.0 || (pa > 0.0) != (pb > 0.0)).then(|| (pa / (pa - pb)).clamp(0.0, 1.0))
            }
            ConeDomain::CircularCone { axis, half_angle } => {
                if self.is_convex() {
                    if self.contains(b) {
                        return None;
                    }
                    let (mut lo, mut hi) = (0.0, 1.0);
                    for _ in 0..64 {
                        let mid = 0.5 * (lo + hi);
                        if self.contains(&a.offset(&(*b - *a), mid)) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    Some(hi)
                } else {
                    reflex_cone_segment_exit(a, b, axis, *half_angle)
                }
            }
        }
    }

    /// Largest `kappa` for which a witness ball `B(A, kappa r)` inside
    /// `D ∩ B(Q, r)` exists, with the corresponding center `A`.
    pub fn best_witness(&self, q: &Point, r: f64) -> (Point, f64) {
        match self {
            ConeDomain::FullSpace { .. } => (*q, 1.0),
            ConeDomain::HalfSpace { normal } => {
                let d = q.dot(normal).max(0.0);
                // maximize min(d + s, r - s) over s in [0, r]
                let s = ((r - d) / 2.0).max(0.0);
                (q.offset(normal, s), (d + s).min(r - s) / r)
            }
            ConeDomain::ComplementHyperplane { normal } => {
                let p = q.dot(normal);
                let n = if p < 0.0 { -*normal } else { *normal };
                let d = p.abs();
                let s = ((r - d) / 2.0).max(0.0);
                (q.offset(&n, s), (d + s).min(r - s) / r)
            }
            ConeDomain::CircularCone { axis, .. } => {
                if q.dim() == 1 {
                    let hl = ConeDomain::HalfSpace { normal: *axis };
                    return hl.best_witness(q, r);
                }
                self.search_witness(q, r, axis)
            }
        }
    }

    /// Witness point `A` with `B(A, kappa r) ⊆ D ∩ B(Q, r)`.
    pub fn fat_witness(&self, q: &Point, r: f64, kappa: f64) -> Result<Point> {
        if !(r > 0.0) || !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::InvalidArgument("fat_witness needs r > 0 and kappa in (0, 1)"));
        }
        let (a, achieved) = self.best_witness(q, r);
        if achieved < kappa {
            return Err(Error::KappaTooLarge {
                requested: kappa,
                achievable: achieved,
            });
        }
        Ok(a)
    }

    /// Fatness constant: the smallest best-witness ratio over the apex and
    /// a geometric range of boundary points (r = 1 by scale invariance).
    pub fn kappa_estimate(&self) -> f64 {
        match self {
            ConeDomain::FullSpace { .. } => 1.0,
            ConeDomain::HalfSpace { .. } | ConeDomain::ComplementHyperplane { .. } => 0.5,
            // the convex complement has a supporting half-space at every
            // boundary point, and far from the apex nothing better fits
            ConeDomain::CircularCone { half_angle, .. } if *half_angle >= FRAC_PI_2 => 0.5,
            ConeDomain::CircularCone { axis, half_angle } => {
                let dim = axis.dim();
                let mut worst = self.best_witness(&Point::zero(dim), 1.0).1;
                if dim > 1 {
                    let perp = perpendicular(axis);
                    let (s, c) = half_angle.sin_cos();
                    let ray = *axis * c + perp * s;
                    let mut rho = 1.0 / 64.0;
                    while rho <= 64.0 {
                        worst = worst.min(self.best_witness(&(ray * rho), 1.0).1);
                        rho *= 2.0;
                    }
                }
                worst
            }
        }
    }

    /// Grid search plus pattern refinement over witness centers in the plane
    /// spanned by the axis and the component of `q` orthogonal to it.
    fn search_witness(&self, q: &Point, r: f64, axis: &Point) -> (Point, f64) {
        let qa = q.dot(axis);
        let perp = match (*q - *axis * qa).normalized() {
            Some(p) => p,
            None => perpendicular(axis),
        };
        let score = |u: f64, v: f64| -> f64 {
            let a = q.offset(axis, u).offset(&perp, v);
            let dist = (a - *q).norm();
            if dist >= r {
                return 0.0;
            }
            self.boundary_distance(&a).min(r - dist) / r
        };
        const GRID: usize = 80;
        let (mut bu, mut bv, mut best) = (0.0, 0.0, score(0.0, 0.0));
        for i in 0..=GRID {
            for j in 0..=GRID {
                let u = r * (2.0 * i as f64 / GRID as f64 - 1.0);
                let v = r * (2.0 * j as f64 / GRID as f64 - 1.0);
                let s = score(u, v);
                if s > best {
                    (bu, bv, best) = (u, v, s);
                }
            }
        }
        let mut step = 2.0 * r / GRID as f64;
        while step > 1e-9 * r {
            let mut moved = false;
            for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let s = score(bu + du, bv + dv);
                if s > best {
                    (bu, bv, best) = (bu + du, bv + dv, s);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (q.offset(axis, bu).offset(&perp, bv), best)
    }
}

/// `x . axis - |x| cos(half_angle)`, positive exactly inside the cone.
#[inline]
fn cone_margin(x: &Point, axis: &Point, half_angle: f64) -> f64 {
    let r = x.norm();
    if r == 0.0 {
        return -1.0;
    }
    if half_angle == FRAC_PI_2 {
        return x.dot(axis);
    }
    x.dot(axis) - r * half_angle.cos()
}

/// For a cone with half-angle above pi/2 the complement is a closed convex
/// cone, so the set of exit parameters is an interval whose left end is a
/// root of the quadratic boundary equation, a root of the linear sign
/// condition, or an endpoint.
fn reflex_cone_segment_exit(a: &Point, b: &Point, axis: &Point, half_angle: f64) -> Option<f64> {
    let d = *b - *a;
    let c = half_angle.cos();
    // q(u) = (p.axis)^2 - c^2 |p|^2 with p = a + u d
    let (la, ld) = (a.dot(axis), d.dot(axis));
    let qa = ld * ld - c * c * d.norm_sq();
    let qb = 2.0 * (la * ld - c * c * a.dot(&d));
    let qc = la * la - c * c * a.norm_sq();
    let mut candidates: Vec<f64> = alloc::vec![1.0];
    if qa.abs() > 1e-300 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            candidates.push((-qb - sq) / (2.0 * qa));
            candidates.push((-qb + sq) / (2.0 * qa));
        }
    } else if qb.abs() > 1e-300 {
        candidates.push(-qc / qb);
    }
    if ld.abs() > 1e-300 {
        candidates.push(-la / ld);
    }
    candidates.retain(|u| *u > 0.0 && *u <= 1.0);
    candidates.sort_by(|x, y| x.total_cmp(y));
    candidates.into_iter().find(|&u| {
        let p = a.offset(&d, u);
        cone_margin(&p, axis, half_angle) <= 1e-12 * p.norm().max(1e-300)
    })
}

fn unit(v: &Point) -> Result<Point> {
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitVector(n));
    }
    Ok(*v * (1.0 / n))
}

/// Some unit vector orthogonal to `v` (d >= 2).
fn perpendicular(v: &Point) -> Point {
    let dim = v.dim();
    let mut best = Point::basis(dim, 0);
    let mut best_dot = f64::INFINITY;
    for i in 0..dim {
        let e = Point::basis(dim, i);
        if v.dot(&e).abs() < best_dot {
            best_dot = v.dot(&e).abs();
            best = e;
        }
    }
    (best - *v * v.dot(&best)).normalized().unwrap()
}
