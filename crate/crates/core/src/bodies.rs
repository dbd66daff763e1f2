//! Convex bodies: balls, ellipsoids, V-polytopes and H-polytopes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hrep::enumerate_vertices;
use crate::hull::{convex_hull, HullResult};
use crate::linalg::{dot, unit_ball_volume, Matrix};
use crate::points::PointCloud;
use crate::predicates;
use crate::MAX_HULL_DIM;

const UNIT_TOL: f64 = 1e-12;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidBody(format!("{what} has non-finite entries")))
    }
}

/// Euclidean ball `{x : |x - c| <= r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_dim(center.len())?;
        check_finite(&center, "center")?;
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidBody(format!("radius {radius} is not a nonnegative number")));
        }
        if radius == 0.0 {
            return Err(Error::DegenerateBody("ball of radius zero".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Ellipsoid `{x : (x - c)^T A (x - c) <= 1}` with `A` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    shape: Matrix,
    /// Lower Cholesky factor `L` with `A = L L^T`.
    factor: Matrix,
    inverse: Matrix,
    det: f64,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, shape: Matrix) -> Result<Self> {
        let d = center.len();
        check_dim(d)?;
        check_finite(&center, "center")?;
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: shape.nrows() });
        }
        check_finite(shape.as_slice(), "shape matrix")?;
        let scale = shape.amax();
        if (&shape - shape.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidBody("shape matrix is not symmetric".into()));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let chol = Cholesky::new(shape.clone())
            .ok_or_else(|| Error::DegenerateBody("shape matrix is not positive definite".into()))?;
        let factor = chol.l();
        let det: f64 = factor.diagonal().iter().map(|x| x * x).product();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateBody("shape matrix is singular".into()));
        }
        let inverse = chol.inverse();
        Ok(Ellipsoid { center, shape, factor, inverse, det })
    }

    /// Axis-aligned ellipsoid with the given semi-axis lengths.
    pub fn axis_aligned(center: Vec<f64>, semi_axes: &[f64]) -> Result<Self> {
        if semi_axes.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::DegenerateBody("semi-axes must be positive".into()));
        }
        let d = semi_axes.len();
        let shape = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 / (semi_axes[i] * semi_axes[i]) } else { 0.0 });
        Ellipsoid::new(center, shape)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    pub fn shape_inverse(&self) -> &Matrix {
        &self.inverse
    }

    /// Lower Cholesky factor `L` of the shape matrix.
    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn shape_det(&self) -> f64 {
        self.det
    }

    /// `(x - c)^T A (x - c)`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let diff = DVector::from_iterator(d, x.iter().zip(&self.center).map(|(a, b)| a - b));
        diff.dot(&(&self.shape * &diff))
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) / self.det.sqrt()
    }

    /// The affine map `y -> c + L^{-T} y` carrying the unit ball onto this ellipsoid.
    pub fn from_unit_ball(&self) -> AffineMap {
        let lt_inv = self
            .factor
            .transpose()
            .try_inverse()
            .expect("Cholesky factor of a positive definite matrix is invertible");
        AffineMap::new(lt_inv, self.center.clone()).expect("invertible by construction")
    }

    /// The affine map `x -> L^T (x - c)` carrying this ellipsoid onto the unit ball.
    pub fn to_unit_ball(&self) -> AffineMap {
        let lt = self.factor.transpose();
        let offset: Vec<f64> = (-(&lt * DVector::from_column_slice(&self.center))).iter().copied().collect();
        AffineMap::new(lt, offset).expect("invertible by construction")
    }
}

/// Convex hull of finitely many points, stored by its extreme points.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    hull: HullResult,
    volume: f64,
}

impl VPolytope {
    /// Canonicalizes to the extreme points (lexicographic order).
    pub fn new(points: &PointCloud) -> Result<Self> {
        let d = points.dim();
        check_dim(d)?;
        if d > MAX_HULL_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let hull = match convex_hull(points) {
            Ok(h) => h,
            Err(Error::DegenerateHull) => {
                return Err(Error::DegenerateBody("vertices do not span a full-dimensional polytope".into()))
            }
            Err(e) => return Err(e),
        };
        let volume = hull.volume();
        if !(volume > 0.0) {
            return Err(Error::DegenerateBody("polytope has zero volume".into()));
        }
        Ok(VPolytope { hull, volume })
    }

    pub fn vertices(&self) -> &PointCloud {
        self.hull.vertices()
    }

    pub fn hull(&self) -> &HullResult {
        &self.hull
    }
}

/// Bounded intersection of halfspaces `a_i . x <= b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    normals: PointCloud,
    offsets: Vec<f64>,
    hull: HullResult,
    volume: f64,
}

impl HPolytope {
    pub fn new(normals: PointCloud, offsets: Vec<f64>) -> Result<Self> {
        let d = normals.dim();
        check_dim(d)?;
        if d > MAX_HULL_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        if normals.len() != offsets.len() {
            return Err(Error::InvalidBody("one offset per halfspace required".into()));
        }
        check_finite(normals.as_flat(), "halfspace normal")?;
        check_finite(&offsets, "halfspace offset")?;
        if normals.iter().any(|a| a.iter().all(|&x| x == 0.0)) {
            return Err(Error::InvalidBody("zero halfspace normal".into()));
        }
        let vertices = enumerate_vertices(&normals, &offsets)?;
        Self::from_parts(normals, offsets, &vertices)
    }

    fn from_parts(normals: PointCloud, offsets: Vec<f64>, vertices: &PointCloud) -> Result<Self> {
        let hull = match convex_hull(vertices) {
            Ok(h) => h,
            Err(Error::DegenerateHull) => {
                return Err(Error::DegenerateBody("halfspaces bound a set of measure zero".into()))
            }
            Err(e) => return Err(e),
        };
        let volume = hull.volume();
        if !(volume > 0.0) {
            return Err(Error::DegenerateBody("polytope has zero volume".into()));
        }
        Ok(HPolytope { normals, offsets, hull, volume })
    }

    pub fn normals(&self) -> &PointCloud {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn vertices(&self) -> &PointCloud {
        self.hull.vertices()
    }
}

/// A convex body: compact, convex, with positive volume.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ball(Ball),
    Ellipsoid(Ellipsoid),
    VPolytope(VPolytope),
    HPolytope(HPolytope),
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| *l <= *x && *x <= *h)
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(ConvexBody::Ball)
    }

    pub fn unit_ball(d: usize) -> Result<Self> {
        Self::ball(vec![0.0; d], 1.0)
    }

    pub fn ellipsoid(center: Vec<f64>, shape: Matrix) -> Result<Self> {
        Ellipsoid::new(center, shape).map(ConvexBody::Ellipsoid)
    }

    pub fn vpolytope(vertices: &PointCloud) -> Result<Self> {
        VPolytope::new(vertices).map(ConvexBody::VPolytope)
    }

    pub fn hpolytope(normals: PointCloud, offsets: Vec<f64>) -> Result<Self> {
        HPolytope::new(normals, offsets).map(ConvexBody::HPolytope)
    }

    /// The box `[lo, hi]^d` as a V-polytope.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        check_dim(d)?;
        if d > MAX_HULL_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut pts = PointCloud::with_capacity(d, 1 << d);
        for mask in 0..(1usize << d) {
            let p: Vec<f64> = (0..d).map(|i| if mask & (1 << i) != 0 { hi } else { lo }).collect();
            pts.push(&p)?;
        }
        Self::vpolytope(&pts)
    }

    /// The standard simplex `conv{0, e_1, .., e_d}`.
    pub fn standard_simplex(d: usize) -> Result<Self> {
        let mut pts = PointCloud::with_capacity(d, d + 1);
        pts.push(&vec![0.0; d])?;
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            pts.push(&e)?;
        }
        Self::vpolytope(&pts)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball(b) => b.center.len(),
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::VPolytope(p) => p.vertices().dim(),
            ConvexBody::HPolytope(p) => p.normals.dim(),
        }
    }

    /// Vertices of a polytope; `None` for smooth bodies.
    pub fn vertices(&self) -> Option<&PointCloud> {
        match self {
            ConvexBody::VPolytope(p) => Some(p.vertices()),
            ConvexBody::HPolytope(p) => Some(p.vertices()),
            _ => None,
        }
    }

    /// Closed membership. Exact for polytopes; closed form for balls and ellipsoids.
    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok(match self {
            ConvexBody::Ball(b) => {
                let r2: f64 = p.iter().zip(&b.center).map(|(x, c)| (x - c) * (x - c)).sum();
                r2 <= b.radius * b.radius
            }
            ConvexBody::Ellipsoid(e) => e.quadratic_form(p) <= 1.0,
            ConvexBody::VPolytope(v) => v.hull.contains(p),
            ConvexBody::HPolytope(h) => {
                h.normals.iter().zip(&h.offsets).all(|(a, &b)| predicates::affine_sign(a, p, b) <= 0)
            }
        })
    }

    /// Support function `h(u) = sup_{x in body} u . x` for a unit vector `u`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        let len2 = dot(u, u);
        if (len2.sqrt() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidArgument(format!("direction has norm {}", len2.sqrt())));
        }
        Ok(self.support_homogeneous(u))
    }

    /// The support function extended positively homogeneously to all of `R^d`.
    pub fn support_homogeneous(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball(b) => dot(u, &b.center) + b.radius * dot(u, u).sqrt(),
            ConvexBody::Ellipsoid(e) => {
                let v = DVector::from_column_slice(u);
                dot(u, &e.center) + v.dot(&(&e.inverse * &v)).max(0.0).sqrt()
            }
            ConvexBody::VPolytope(_) | ConvexBody::HPolytope(_) => {
                let verts = self.vertices().expect("polytope");
                verts.iter().map(|v| dot(u, v)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Ball(b) => unit_ball_volume(b.center.len()) * b.radius.powi(b.center.len() as i32),
            ConvexBody::Ellipsoid(e) => e.volume(),
            ConvexBody::VPolytope(p) => p.volume,
            ConvexBody::HPolytope(p) => p.volume,
        }
    }

    /// Axis-aligned bounding box from support evaluations along `+-e_i`.
    pub fn bounding_box(&self) -> Aabb {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        let mut e = vec![0.0; d];
        for i in 0..d {
            e[i] = 1.0;
            hi[i] = self.support_homogeneous(&e);
            e[i] = -1.0;
            lo[i] = -self.support_homogeneous(&e);
            e[i] = 0.0;
        }
        Aabb { lo, hi }
    }

    /// Largest distance from `c` to a point of the body.
    pub fn radius_about(&self, c: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball(b) => crate::linalg::norm(&diff(&b.center, c)) + b.radius,
            ConvexBody::Ellipsoid(e) => {
                // The largest semi-axis is at most sqrt(trace A^{-1}).
                crate::linalg::norm(&diff(&e.center, c)) + e.inverse.trace().sqrt()
            }
            _ => self
                .vertices()
                .expect("polytope")
                .iter()
                .map(|v| crate::linalg::norm(&diff(v, c)))
                .fold(0.0, f64::max),
        }
    }

    /// Image of the body under an invertible affine map, in the same family
    /// (a ball becomes an ellipsoid unless the map is a similarity).
    pub fn affine_image(&self, t: &AffineMap) -> Result<ConvexBody> {
        let d = self.dim();
        if t.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: t.dim() });
        }
        match self {
            ConvexBody::Ball(b) => {
                let center = t.apply(&b.center);
                let gram = t.linear.transpose() * &t.linear;
                let s2 = gram.trace() / d as f64;
                let off = (gram - DMatrix::identity(d, d) * s2).amax();
                if off <= 1e-12 * s2 {
                    ConvexBody::ball(center, s2.sqrt() * b.radius)
                } else {
                    let shape = t.inverse.transpose() * &t.inverse / (b.radius * b.radius);
                    ConvexBody::ellipsoid(center, symmetrize(shape))
                }
            }
            ConvexBody::Ellipsoid(e) => {
                let center = t.apply(&e.center);
                let shape = t.inverse.transpose() * &e.shape * &t.inverse;
                ConvexBody::ellipsoid(center, symmetrize(shape))
            }
            ConvexBody::VPolytope(p) => ConvexBody::vpolytope(&t.apply_cloud(p.vertices())),
            ConvexBody::HPolytope(h) => {
                let inv_t = t.inverse.transpose();
                let mut normals = PointCloud::with_capacity(d, h.normals.len());
                let mut offsets = Vec::with_capacity(h.offsets.len());
                for (a, &b) in h.normals.iter().zip(&h.offsets) {
                    let na: Vec<f64> = (&inv_t * DVector::from_column_slice(a)).iter().copied().collect();
                    offsets.push(b + dot(&na, &t.offset));
                    normals.push(&na)?;
                }
                HPolytope::from_parts(normals, offsets, &t.apply_cloud(h.vertices())).map(ConvexBody::HPolytope)
            }
        }
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Invertible affine map `x -> M x + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: Matrix,
    offset: Vec<f64>,
    inverse: Matrix,
    det: f64,
}

impl AffineMap {
    pub fn new(linear: Matrix, offset: Vec<f64>) -> Result<Self> {
        let d = offset.len();
        if linear.nrows() != d || linear.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: linear.nrows() });
        }
        if linear.iter().chain(offset.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("affine map has non-finite entries".into()));
        }
        let det = linear.clone().lu().determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMap);
        }
        let inverse = linear.clone().try_inverse().ok_or(Error::SingularMap)?;
        Ok(AffineMap { linear, offset, inverse, det })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap::new(DMatrix::identity(d, d), vec![0.0; d]).expect("identity is invertible")
    }

    /// `x -> s x`.
    pub fn scaling(d: usize, s: f64) -> Result<Self> {
        AffineMap::new(DMatrix::identity(d, d) * s, vec![0.0; d])
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        AffineMap::new(DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 }), vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &Matrix {
        &self.linear
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let y = &self.linear * DVector::from_column_slice(x);
        y.iter().zip(&self.offset).map(|(a, b)| a + b).collect()
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        let shifted = DVector::from_iterator(y.len(), y.iter().zip(&self.offset).map(|(a, b)| a - b));
        (&self.inverse * shifted).iter().copied().collect()
    }

    pub fn apply_cloud(&self, pts: &PointCloud) -> PointCloud {
        let mut out = PointCloud::with_capacity(pts.dim(), pts.len());
        for p in pts.iter() {
            out.push(&self.apply(p)).expect("dimension preserved");
        }
        out
    }

    pub fn inverse(&self) -> AffineMap {
        let offset: Vec<f64> = (-(&self.inverse * DVector::from_column_slice(&self.offset))).iter().copied().collect();
        AffineMap { linear: self.inverse.clone(), offset, inverse: self.linear.clone(), det: 1.0 / self.det }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let linear = &self.linear * &other.linear;
        let offset = self.apply(&other.offset);
        AffineMap::new(linear, offset).expect("composition of invertible maps")
    }
}
