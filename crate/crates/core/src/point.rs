use core::fmt;
use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_traits::Float;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point (or vector) in R^d for d in 1..=3, stored inline.
///
/// Coordinates beyond `dim` are always zero, so componentwise arithmetic on
/// points of equal dimension never has to look at `dim`.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl Point {
    /// The origin of R^dim.
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} not supported");
        Self {
            coords: [0.0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Build from a slice of 1..=3 coordinates.
    pub fn from_slice(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() || xs.len() > MAX_DIM {
            return None;
        }
        let mut p = Self::zero(xs.len());
        p.coords[..xs.len()].copy_from_slice(xs);
        Some(p)
    }

    /// Standard basis vector `e_{axis+1}` in R^dim.
    pub fn basis(dim: usize, axis: usize) -> Self {
        assert!(axis < dim);
        let mut p = Self::zero(dim);
        p.coords[axis] = 1.0;
        p
    }

    /// The reference point (0, ..., 0, 1).
    pub fn last_basis(dim: usize) -> Self {
        Self::basis(dim, dim - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        assert!(i < self.dim as usize);
        self.coords[i] = v;
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self / |self|`, or `None` for the origin or non-finite input.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(*self * (1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// `self + s * dir`
    pub fn offset(&self, dir: &Point, s: f64) -> Point {
        let mut p = *self;
        for i in 0..MAX_DIM {
            p.coords[i] += s * dir.coords[i];
        }
        p
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(mut self, rhs: Point) -> Point {
        self += rhs;
        self
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..MAX_DIM {
            self.coords[i] += rhs.coords[i];
        }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(mut self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..MAX_DIM {
            self.coords[i] -= rhs.coords[i];
        }
        self
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(mut self, s: f64) -> Point {
        for c in &mut self.coords {
            *c *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_respects_dimension() {
        let a = Point::from_slice(&[1.0, 2.0]).unwrap();
        let b = Point::from_slice(&[0.5, -1.0]).unwrap();
        assert_eq!((a + b).as_slice(), &[1.5, 1.0]);
        assert_eq!((a - b).as_slice(), &[0.5, 3.0]);
        assert_eq!(a.dot(&b), -1.5);
        assert_eq!((-a).as_slice(), &[-1.0, -2.0]);
        assert!(Point::from_slice(&[]).is_none());
        assert!(Point::from_slice(&[0.0; 4]).is_none());
        assert!(Point::zero(2).normalized().is_none());
    }
}
