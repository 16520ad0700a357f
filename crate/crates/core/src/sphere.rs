//! Deterministic quadrature rules on the unit sphere S^{d-1}.
//!
//! d = 1: the two points {-1, +1} with counting measure.
//! d = 2: midpoint rule with 4096 equally spaced nodes on the circle.
//! d = 3: vertices of a level-4 subdivided icosahedron (2562 nodes), each
//! weighted by one third of the spherical area of its incident triangles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::point::Point;

pub const CIRCLE_NODES: usize = 4096;
pub const ICOSPHERE_LEVEL: u32 = 4;

/// Nodes and weights; the weights sum to the surface area of S^{d-1}.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    nodes: Vec<Point>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            1 => Self {
                nodes: alloc::vec![Point::basis(1, 0), -Point::basis(1, 0)],
                weights: alloc::vec![1.0, 1.0],
            },
            2 => circle(CIRCLE_NODES),
            3 => icosphere(ICOSPHERE_LEVEL),
            _ => panic!("no sphere grid for dimension {dim}"),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.nodes.iter().zip(self.weights.iter().copied())
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Quadrature of `f` against the surface measure.
    pub fn integrate(&self, mut f: impl FnMut(&Point) -> f64) -> f64 {
        self.iter().map(|(w, wt)| wt * f(w)).sum()
    }
}

/// Surface area of S^{d-1}.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("dimension {dim} not supported"),
    }
}

fn circle(n: usize) -> SphereGrid {
    let h = 2.0 * PI / n as f64;
    let nodes = (0..n)
        .map(|k| {
            let (s, c) = ((k as f64 + 0.5) * h).sin_cos();
            Point::from_slice(&[c, s]).unwrap()
        })
        .collect();
    SphereGrid {
        nodes,
        weights: alloc::vec![h; n],
    }
}

fn icosphere(level: u32) -> SphereGrid {
    let t = (1.0 + 5.0.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut verts: Vec<Point> = raw
        .iter()
        .map(|v| Point::from_slice(v).unwrap().normalized().unwrap())
        .collect();
    let mut faces: Vec<[usize; 3]> = alloc::vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        // edge -> midpoint index; sorted-pair keys in a flat list keep this
        // allocation-light without a hash map.
        let mut mids: Vec<((usize, usize), usize)> = Vec::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            if let Ok(pos) = mids.binary_search_by(|(k, _)| k.cmp(&key)) {
                return mids[pos].1;
            }
            let m = ((verts[a] + verts[b]) * 0.5).normalized().unwrap();
            verts.push(m);
            let idx = verts.len() - 1;
            let pos = mids.partition_point(|(k, _)| *k < key);
            mids.insert(pos, (key, idx));
            idx
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    let mut weights = alloc::vec![0.0; verts.len()];
    for &[a, b, c] in &faces {
        let area = spherical_triangle_area(&verts[a], &verts[b], &verts[c]);
        for v in [a, b, c] {
            weights[v] += area / 3.0;
        }
    }
    SphereGrid {
        nodes: verts,
        weights,
    }
}

/// Spherical excess via the Van Oosterom-Strackee formula.
fn spherical_triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.abs().atan2(denom)
}
