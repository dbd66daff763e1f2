//! Convex polygons in the plane with exact orientation tests.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::points::PointCloud;
use crate::predicates::orient2d;

/// A convex polygon with vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon {
    /// Validates convexity; clockwise input is reversed.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateBody("a polygon needs three vertices".into()));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        let (mut left, mut right) = (false, false);
        for i in 0..n {
            match orient2d(&vertices[i], &vertices[(i + 1) % n], &vertices[(i + 2) % n]) {
                1 => left = true,
                -1 => right = true,
                _ => {}
            }
        }
        if left && right {
            return Err(Error::NonConvex);
        }
        if !left && !right {
            return Err(Error::DegenerateBody("collinear vertices".into()));
        }
        if right {
            vertices.reverse();
        }
        // All turns agree; a convex polygon also winds exactly once.
        let mut turning = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
            let (vx, vy) = (c[0] - b[0], c[1] - b[1]);
            turning += (ux * vy - uy * vx).atan2(ux * vx + uy * vy);
        }
        if turning > 3.0 * core::f64::consts::PI {
            return Err(Error::NonConvex);
        }
        Ok(ConvexPolygon { vertices })
    }

    /// Convex hull of a planar point set by the monotone chain.
    pub fn hull_of(points: &[[f64; 2]]) -> Result<Self> {
        let mut pts: Vec<[f64; 2]> = points.to_vec();
        if pts.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegenerateHull);
        }
        let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: &mut dyn Iterator<Item = &[f64; 2]> =
                if pass == 0 { &mut pts.iter() } else { &mut pts.iter().rev() };
            for p in iter {
                while hull.len() >= start + 2 && orient2d(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0 {
                    hull.pop();
                }
                hull.push(*p);
            }
            hull.pop();
        }
        if hull.len() < 3 {
            return Err(Error::DegenerateHull);
        }
        Ok(ConvexPolygon { vertices: hull })
    }

    pub fn from_cloud(points: &PointCloud) -> Result<Self> {
        if points.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: points.dim() });
        }
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        ConvexPolygon::hull_of(&pts)
    }

    /// The polygon of a planar polytope body.
    pub fn from_body(body: &ConvexBody) -> Result<Self> {
        match body.vertices() {
            Some(v) => ConvexPolygon::from_cloud(v),
            None => Err(Error::InvalidArgument("body is not a polytope".into())),
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        ConvexBody::vpolytope(&PointCloud::from_rows(2, &self.vertices)?)
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                (b[0] - a[0]).hypot(b[1] - a[1])
            })
            .sum()
    }

    /// Exact closed membership.
    pub fn contains(&self, p: &[f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| orient2d(&self.vertices[i], &self.vertices[(i + 1) % n], p) >= 0)
    }

    pub fn support(&self, u: &[f64; 2]) -> f64 {
        self.vertices.iter().map(|v| u[0] * v[0] + u[1] * v[1]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Area of the intersection, by clipping `self` against each edge of `other`.
    pub fn intersection_area(&self, other: &ConvexPolygon) -> f64 {
        let mut poly = self.vertices.clone();
        let mut next = Vec::with_capacity(poly.len() + other.vertices.len());
        let m = other.vertices.len();
        for i in 0..m {
            if poly.is_empty() {
                return 0.0;
            }
            let a = other.vertices[i];
            let b = other.vertices[(i + 1) % m];
            next.clear();
            let k = poly.len();
            for j in 0..k {
                let p = poly[j];
                let q = poly[(j + 1) % k];
                let sp = orient2d(&a, &b, &p);
                let sq = orient2d(&a, &b, &q);
                if sp >= 0 {
                    next.push(p);
                }
                if sp * sq < 0 {
                    next.push(crossing(&a, &b, &p, &q));
                }
            }
            core::mem::swap(&mut poly, &mut next);
        }
        if poly.len() < 3 {
            0.0
        } else {
            shoelace(&poly).max(0.0)
        }
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        s += (a[0] - b[0]) * (a[1] + b[1]);
    }
    0.5 * s
}

/// Intersection of segment `pq` with the line through `a` and `b`.
fn crossing(a: &[f64; 2], b: &[f64; 2], p: &[f64; 2], q: &[f64; 2]) -> [f64; 2] {
    let side = |x: &[f64; 2]| (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
    let (fp, fq) = (side(p), side(q));
    let t = (fp / (fp - fq)).clamp(0.0, 1.0);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}
