//! Distances between convex bodies, Steiner-formula coefficients and the
//! constants of the missing-volume deviation bound.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore};

use crate::bodies::{Aabb, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{binomial, dot, unit_ball_volume};
use crate::points::PointCloud;
use crate::polygon::ConvexPolygon;
use crate::stats::{least_squares, Z95};

/// A finite set of unit directions with a covering guarantee: every unit
/// vector lies within chord distance [`DirectionNet::chord`] of some member.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionNet {
    dirs: PointCloud,
    chord: f64,
}

impl DirectionNet {
    /// At least `m` directions. In the plane they are equispaced starting at
    /// angle `phase`; in higher dimensions they are the normalized points of
    /// a regular grid on the surface of the cube `[-1, 1]^d` (`phase` unused).
    pub fn new(d: usize, m: usize, phase: f64) -> Self {
        let m = m.max(2 * d);
        if d == 2 {
            let step = core::f64::consts::TAU / m as f64;
            let mut dirs = PointCloud::with_capacity(2, m);
            for k in 0..m {
                let (s, c) = (phase + step * k as f64).sin_cos();
                dirs.push(&[c, s]).expect("planar");
            }
            let chord = 2.0 * (core::f64::consts::PI / (2.0 * m as f64)).sin();
            return DirectionNet { dirs, chord };
        }
        let count = |k: usize| (k + 1).pow(d as u32) - (k - 1).pow(d as u32);
        let mut k = 1;
        while count(k) < m {
            k += 1;
        }
        let mut dirs = PointCloud::with_capacity(d, count(k));
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            if idx.iter().any(|&i| i == 0 || i == k) {
                for (xi, &i) in x.iter_mut().zip(&idx) {
                    *xi = -1.0 + 2.0 * i as f64 / k as f64;
                }
                let n = dot(&x, &x).sqrt();
                x.iter_mut().for_each(|v| *v /= n);
                dirs.push(&x).expect("dimension");
            }
            let mut a = 0;
            while a < d && idx[a] == k {
                idx[a] = 0;
                a += 1;
            }
            if a == d {
                break;
            }
            idx[a] += 1;
        }
        let chord = ((d - 1) as f64).sqrt() / k as f64;
        DirectionNet { dirs, chord }
    }

    pub fn dim(&self) -> usize {
        self.dirs.dim()
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &PointCloud {
        &self.dirs
    }

    /// Largest distance from a unit vector to its nearest net direction.
    pub fn chord(&self) -> f64 {
        self.chord
    }

    /// The directions reordered so that every prefix is spread over the
    /// sphere (bit-reversal of the index), which lets separation tests stop early.
    pub fn spread_order(&self) -> Vec<usize> {
        let n = self.len();
        let bits = usize::BITS - (n.max(2) - 1).leading_zeros();
        let mut order: Vec<usize> =
            (0..1usize << bits).map(|i| i.reverse_bits() >> (usize::BITS - bits)).filter(|&i| i < n).collect();
        order.truncate(n);
        order
    }
}

/// Support values of `body` on every direction of `net`.
pub fn support_profile(body: &ConvexBody, net: &DirectionNet) -> Vec<f64> {
    net.directions().iter().map(|u| body.support_homogeneous(u)).collect()
}

/// Hausdorff distance estimate and a bound on its deficit: the true distance
/// lies in `[estimate, estimate + error_bound]`.
pub fn hausdorff(g: &ConvexBody, h: &ConvexBody, m: usize) -> Result<(f64, f64)> {
    let d = g.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
    }
    if m < 2 * d {
        return Err(Error::InvalidArgument(alloc::format!("direction count {m} below 2d")));
    }
    Ok(hausdorff_on_net(g, h, &DirectionNet::new(d, m, 0.0)))
}

pub fn hausdorff_on_net(g: &ConvexBody, h: &ConvexBody, net: &DirectionNet) -> (f64, f64) {
    let estimate = net
        .directions()
        .iter()
        .map(|u| (g.support_homogeneous(u) - h.support_homogeneous(u)).abs())
        .fold(0.0, f64::max);
    let bb = g.bounding_box().union(&h.bounding_box());
    let c: Vec<f64> = bb.lo.iter().zip(&bb.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    // The support gap is Lipschitz on the sphere with constant R_g + R_h
    // about any common center.
    let lipschitz = g.radius_about(&c) + h.radius_about(&c);
    (estimate, lipschitz * net.chord())
}

/// Exact `|P △ Q|` of two convex polygons.
pub fn nikodym_2d(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    (p.area() + q.area() - 2.0 * p.intersection_area(q)).max(0.0)
}

/// Monte Carlo `|G △ G'|` from `n` uniform points of the common bounding
/// box, with the half-width of a normal 95% interval.
pub fn nikodym_mc<R: RngCore + ?Sized>(g: &ConvexBody, h: &ConvexBody, rng: &mut R, n: usize) -> Result<(f64, f64)> {
    let d = g.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    let bb: Aabb = g.bounding_box().union(&h.bounding_box());
    let mut x = vec![0.0; d];
    let mut hits = 0u64;
    for _ in 0..n {
        for ((xi, lo), hi) in x.iter_mut().zip(&bb.lo).zip(&bb.hi) {
            *xi = lo + rng.random::<f64>() * (hi - lo);
        }
        if g.contains(&x)? != h.contains(&x)? {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    let vol = bb.volume();
    Ok((vol * p, vol * Z95 * (p * (1.0 - p) / n as f64).sqrt()))
}

/// Steiner coefficients `L_1..L_d` of the unit ball, from
/// `|B^λ| = β_d (1 + λ)^d`: `L_j = β_d binom(d, j)`.
pub fn steiner_coeffs_ball(d: usize) -> Vec<f64> {
    let beta = unit_ball_volume(d);
    (1..=d).map(|j| beta * binomial(d, j)).collect()
}

/// `|P^λ|` of a convex polygon: `area + perimeter λ + π λ²`.
pub fn neighborhood_volume_2d(p: &ConvexPolygon, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("negative dilation radius {lambda}")));
    }
    Ok(p.area() + p.perimeter() * lambda + core::f64::consts::PI * lambda * lambda)
}

/// Monte Carlo shell volumes `|B^λ \ B|` of the unit ball and the Steiner
/// coefficients fitted to them.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerFit {
    pub lambdas: Vec<f64>,
    pub volumes: Vec<f64>,
    pub coefficients: Vec<f64>,
}

/// Estimates `|B_d^λ \ B_d|` on `lambdas` with `lines` random lines parallel
/// to the last axis through the box `[-R, R]^d`, `R = 1 + max λ`, and fits
/// `Σ_j c_j λ^j`.
///
/// The lines are jittered over a regular grid of the first `d - 1`
/// coordinates, and each contributes the exact length of its intersection
/// with the shell.
pub fn steiner_fit_ball<R: RngCore + ?Sized>(
    d: usize,
    lambdas: &[f64],
    lines: usize,
    rng: &mut R,
) -> Result<SteinerFit> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if lambdas.len() < d || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("need at least d positive dilation radii".into()));
    }
    let big_r = 1.0 + lambdas.iter().cloned().fold(0.0, f64::max);
    let k = ((lines as f64).powf(1.0 / (d - 1) as f64).ceil() as usize).max(1);
    let cells = k.pow(d as u32 - 1);
    let h = 2.0 * big_r / k as f64;
    let chord = |r: f64, s2: f64| 2.0 * (r * r - s2).max(0.0).sqrt();
    let mut sums = vec![0.0; lambdas.len()];
    let mut idx = vec![0usize; d - 1];
    for _ in 0..cells {
        let mut s2 = 0.0;
        for &i in &idx {
            let y = -big_r + h * (i as f64 + rng.random::<f64>());
            s2 += y * y;
        }
        let inner = chord(1.0, s2);
        for (acc, &l) in sums.iter_mut().zip(lambdas) {
            *acc += chord(1.0 + l, s2) - inner;
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < k {
                break;
            }
            *i = 0;
        }
    }
    let cell_volume = h.powi(d as i32 - 1);
    let volumes: Vec<f64> = sums.iter().map(|s| s * cell_volume).collect();
    let rows: Vec<Vec<f64>> = lambdas.iter().map(|&l| (1..=d).map(|j| l.powi(j as i32)).collect()).collect();
    let coefficients = least_squares(&rows, &volumes)?;
    Ok(SteinerFit { lambdas: lambdas.to_vec(), volumes, coefficients })
}

/// The explicit constants of the deviation bound in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsTable {
    pub d: usize,
    pub beta_d: f64,
    /// `L_j(B_d)` for `j = 1..d`.
    pub l: Vec<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub c2: f64,
}

/// Constants evaluated from their defining sums:
/// `α₁ = Σ L_j 2^j`, `α₂ = Σ L_j`, `α₃ = 1 + (3α₁ + α₂)/β_d`, `C₂ = α₃ β_d`.
pub fn constants(d: usize) -> Result<ConstantsTable> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let beta_d = unit_ball_volume(d);
    let l = steiner_coeffs_ball(d);
    let alpha1: f64 = l.iter().enumerate().map(|(j, lj)| lj * 2f64.powi(j as i32 + 1)).sum();
    let alpha2: f64 = l.iter().sum();
    let alpha3 = 1.0 + (3.0 * alpha1 + alpha2) / beta_d;
    let c2 = alpha3 * beta_d;
    Ok(ConstantsTable { d, beta_d, l, alpha1, alpha2, alpha3, c2 })
}
