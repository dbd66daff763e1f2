//! Seed-deterministic uniform sampling from convex bodies.
//!
//! Every replicate draws from its own [`RngStream`], a ChaCha12 keystream
//! keyed by the master seed and positioned on the replicate's stream id, so a
//! replicate's points never depend on which thread produced them or when.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::bodies::{AffineMap, Aabb, ConvexBody};
use crate::ellipsoid;
use crate::error::{Error, Result};
use crate::points::PointCloud;

/// Identifier of the stream construction, written into every output file.
pub const ALGORITHM_ID: &str = "chacha12-v1";

/// Rejection envelopes accepting less than this fraction are refused.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

const ENVELOPE_INFLATION: f64 = 1.0 + 1e-9;

/// A reproducible random stream identified by `(master_seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        RngStream { master_seed, stream_id, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn algorithm_id(&self) -> &'static str {
        ALGORITHM_ID
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn make_stream(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::new(master_seed, stream_id)
}

/// `n` uniform points together with the number of proposals spent on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub points: PointCloud,
    pub proposals: u64,
}

impl Sample {
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.proposals as f64
    }
}

#[derive(Debug, Clone)]
enum Method {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid(AffineMap),
    Simplex(PointCloud),
    Box(Aabb),
    RejectEllipsoid(AffineMap),
    RejectBox(Aabb),
}

/// Uniform sampler for one body. The construction picks the method; sampling
/// itself only reads `self`, so one sampler can serve many threads.
#[derive(Debug, Clone)]
pub struct UniformSampler<'a> {
    body: &'a ConvexBody,
    method: Method,
    expected_acceptance: f64,
}

impl<'a> UniformSampler<'a> {
    pub fn new(body: &'a ConvexBody) -> Result<Self> {
        let d = body.dim();
        let (method, expected_acceptance) = match body {
            ConvexBody::Ball(b) => (Method::Ball { center: b.center().to_vec(), radius: b.radius() }, 1.0),
            ConvexBody::Ellipsoid(e) => (Method::Ellipsoid(e.from_unit_ball()), 1.0),
            _ => {
                let verts = body.vertices().expect("polytope");
                let bbox = body.bounding_box();
                let vol = body.volume();
                if verts.len() == d + 1 {
                    (Method::Simplex(verts.clone()), 1.0)
                } else if ((bbox.volume() - vol) / vol).abs() <= 1e-12 {
                    (Method::Box(bbox), 1.0)
                } else {
                    let cert = ellipsoid::mvee_points(verts, ellipsoid::DEFAULT_TOL)?;
                    let e = cert.ellipsoid;
                    let map = e.from_unit_ball();
                    let scale = AffineMap::scaling(d, ENVELOPE_INFLATION)?;
                    // Inflate about the center: x -> c + s (x - c).
                    let inflated = map.compose(&scale);
                    let evol = e.volume() * ENVELOPE_INFLATION.powi(d as i32);
                    if evol < bbox.volume() {
                        (Method::RejectEllipsoid(inflated), vol / evol)
                    } else {
                        let bvol = bbox.volume();
                        (Method::RejectBox(bbox), vol / bvol)
                    }
                }
            }
        };
        if expected_acceptance < MIN_ACCEPTANCE {
            return Err(Error::EnvelopeTooLoose(expected_acceptance));
        }
        Ok(UniformSampler { body, method, expected_acceptance })
    }

    pub fn body(&self) -> &ConvexBody {
        self.body
    }

    /// Name of the sampling method in use.
    pub fn method(&self) -> &'static str {
        match self.method {
            Method::Ball { .. } => "ball",
            Method::Ellipsoid(_) => "ellipsoid",
            Method::Simplex(_) => "simplex",
            Method::Box(_) => "box",
            Method::RejectEllipsoid(_) => "rejection-ellipsoid",
            Method::RejectBox(_) => "rejection-box",
        }
    }

    /// `volume(body) / volume(envelope)`; 1 for direct methods.
    pub fn expected_acceptance(&self) -> f64 {
        self.expected_acceptance
    }

    /// Writes one uniform point of the body into `out` and returns the number
    /// of proposals it took.
    pub fn sample_point<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> u64 {
        let mut proposals = 0;
        loop {
            proposals += 1;
            self.propose(rng, out);
            // Rounding can push a closed-form point a hair outside; such draws
            // are redrawn like rejections.
            if self.body.contains(out).unwrap_or(false) {
                return proposals;
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, rng: &mut R) -> Sample {
        let d = self.body.dim();
        let mut flat = vec![0.0; n * d];
        let mut proposals = 0;
        for p in flat.chunks_exact_mut(d) {
            proposals += self.sample_point(rng, p);
        }
        let points = PointCloud::from_flat(d, flat).expect("consistent length");
        Sample { points, proposals }
    }

    fn propose<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.method {
            Method::Ball { center, radius } => {
                unit_ball_point(rng, out);
                for (x, c) in out.iter_mut().zip(center) {
                    *x = c + radius * *x;
                }
            }
            Method::Ellipsoid(map) | Method::RejectEllipsoid(map) => {
                unit_ball_point(rng, out);
                let y = map.apply(out);
                out.copy_from_slice(&y);
            }
            Method::Simplex(verts) => {
                let mut w: [f64; 16] = [0.0; 16];
                let k = verts.len();
                let mut total = 0.0;
                for wi in w[..k].iter_mut() {
                    *wi = Exp1.sample(rng);
                    total += *wi;
                }
                out.iter_mut().for_each(|x| *x = 0.0);
                for (v, wi) in verts.iter().zip(&w[..k]) {
                    let t = wi / total;
                    for (x, vc) in out.iter_mut().zip(v) {
                        *x += t * vc;
                    }
                }
            }
            Method::Box(b) | Method::RejectBox(b) => {
                for ((x, lo), hi) in out.iter_mut().zip(&b.lo).zip(&b.hi) {
                    let u: f64 = rng.random();
                    *x = lo + u * (hi - lo);
                }
            }
        }
    }
}

/// Uniform point in the unit ball: polar form in the plane, otherwise a
/// Gaussian direction scaled by `U^(1/d)`.
fn unit_ball_point<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let d = out.len();
    if d == 2 {
        let r = rng.random::<f64>().sqrt();
        let theta = core::f64::consts::TAU * rng.random::<f64>();
        let (s, c) = theta.sin_cos();
        out[0] = r * c;
        out[1] = r * s;
        return;
    }
    let mut norm2: f64 = 0.0;
    while norm2 == 0.0 {
        norm2 = 0.0;
        for x in out.iter_mut() {
            *x = StandardNormal.sample(rng);
            norm2 += *x * *x;
        }
    }
    let r = rng.random::<f64>().powf(1.0 / d as f64) / norm2.sqrt();
    out.iter_mut().for_each(|x| *x *= r);
}

/// `n` uniform points of `body` drawn from `stream`.
pub fn sample_uniform(body: &ConvexBody, n: usize, stream: &mut RngStream) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    Ok(UniformSampler::new(body)?.sample(n, stream).points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = make_stream(42, 0);
        let mut b = make_stream(42, 0);
        let mut c = make_stream(42, 1);
        let xs: Vec<u64> = (0..10_000).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..10_000).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..10_000).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn neighbouring_streams_are_uncorrelated() {
        let mut a = make_stream(7, 3);
        let mut b = make_stream(7, 4);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| a.random::<f64>() - 0.5).collect();
        let ys: Vec<f64> = (0..n).map(|_| b.random::<f64>() - 0.5).collect();
        let r: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>() / (n as f64 / 12.0);
        // Correlation of independent streams has standard deviation 1/sqrt(n).
        assert!(r.abs() < 4.0 / (n as f64).sqrt(), "r = {r}");
    }

    #[test]
    fn ball_sample_mean_is_centered() {
        let body = ConvexBody::unit_ball(3).unwrap();
        let n = 100_000;
        let pts = sample_uniform(&body, n, &mut make_stream(1, 0)).unwrap();
        // Each coordinate of the uniform unit 3-ball has variance 1/5.
        let sd = (0.2f64).sqrt();
        for k in 0..3 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 4.0 * sd / (n as f64).sqrt(), "coordinate {k}: {mean}");
        }
    }

    #[test]
    fn square_coordinates_pass_ks() {
        let body = ConvexBody::cube(2, 0.0, 1.0).unwrap();
        let s = UniformSampler::new(&body).unwrap();
        assert_eq!(s.method(), "box");
        let pts = s.sample(20_000, &mut make_stream(2, 0)).points;
        for k in 0..2 {
            let xs: Vec<f64> = pts.iter().map(|p| p[k]).collect();
            let (_, p) = stats::ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
            assert!(p > 0.01, "coordinate {k}: p = {p}");
        }
    }

    #[test]
    fn triangle_corner_fraction() {
        let tri = PointCloud::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let body = ConvexBody::vpolytope(&tri).unwrap();
        let s = UniformSampler::new(&body).unwrap();
        assert_eq!(s.method(), "simplex");
        let n = 100_000;
        let pts = s.sample(n, &mut make_stream(3, 0)).points;
        let hits = pts.iter().filter(|p| p[0] + p[1] <= 0.5).count() as f64 / n as f64;
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((hits - 0.25).abs() < 4.0 * sigma, "{hits}");
    }

    #[test]
    fn rejection_acceptance_matches_volume_ratio() {
        // A regular hexagon: neither a simplex nor a box.
        let rows: Vec<[f64; 2]> = (0..6)
            .map(|k| {
                let t = k as f64 * core::f64::consts::PI / 3.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let body = ConvexBody::vpolytope(&PointCloud::from_rows(2, &rows).unwrap()).unwrap();
        let s = UniformSampler::new(&body).unwrap();
        assert_eq!(s.method(), "rejection-ellipsoid");
        let sample = s.sample(50_000, &mut make_stream(4, 0));
        let p = s.expected_acceptance();
        // Hexagon in its circumscribed circle.
        assert!((p - 3.0 * 3f64.sqrt() / (2.0 * core::f64::consts::PI)).abs() < 1e-6);
        let trials = sample.proposals as f64;
        let rate = sample.acceptance_rate();
        assert!((rate - p).abs() < 4.0 * (p * (1.0 - p) / trials).sqrt(), "{rate} vs {p}");
    }

    #[test]
    fn halfplane_fraction_in_ellipse() {
        let body = ConvexBody::Ellipsoid(
            crate::bodies::Ellipsoid::axis_aligned(vec![1.0, -1.0], &[2.0, 0.5]).unwrap(),
        );
        let n = 100_000;
        let pts = sample_uniform(&body, n, &mut make_stream(5, 0)).unwrap();
        // The line x = 2 cuts the ellipse at u = 1/2 of its semi-axis: area
        // fraction (pi/3 - sqrt(3)/4) / pi on the right.
        let exact = (core::f64::consts::PI / 3.0 - 3f64.sqrt() / 4.0) / core::f64::consts::PI;
        let hits = pts.iter().filter(|p| p[0] >= 2.0).count() as f64 / n as f64;
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((hits - exact).abs() < 4.0 * sigma, "{hits} vs {exact}");
    }

    #[test]
    fn every_point_is_inside() {
        let bodies = [
            ConvexBody::unit_ball(2).unwrap(),
            ConvexBody::unit_ball(4).unwrap(),
            ConvexBody::standard_simplex(3).unwrap(),
            ConvexBody::cube(3, -1.0, 1.0).unwrap(),
        ];
        for body in &bodies {
            let pts = sample_uniform(body, 2000, &mut make_stream(6, 0)).unwrap();
            assert!(pts.iter().all(|p| body.contains(p).unwrap()));
        }
    }

    #[test]
    fn zero_points_is_an_error() {
        let body = ConvexBody::unit_ball(2).unwrap();
        assert!(sample_uniform(&body, 0, &mut make_stream(0, 0)).is_err());
    }
}
