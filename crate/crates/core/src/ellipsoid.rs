//! Minimum-volume enclosing ellipsoids and the affine normalization they induce.
//!
//! The solver is Khachiyan's barycentric coordinate ascent on the lifted
//! points `(p_i, 1)`, with Todd-Yildirim away steps so that weight can leave
//! points that are not on the optimal ellipsoid.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::bodies::{AffineMap, ConvexBody, Ellipsoid, VPolytope};
use crate::error::{Error, Result};
use crate::hull::convex_hull;
use crate::linalg::{dot, Matrix};
use crate::points::PointCloud;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITER: usize = 1_000_000;

/// Boundary points examined when checking containment of a smooth body.
const SMOOTH_PROBES: usize = 1 << 12;

/// An enclosing ellipsoid with its volume ratio to the enclosed body.
#[derive(Debug, Clone, PartialEq)]
pub struct MveeCertificate {
    pub ellipsoid: Ellipsoid,
    /// `volume(ellipsoid) / volume(body)`.
    pub ratio: f64,
    pub tolerance: f64,
    pub iterations: usize,
}

/// MVEE of a V-polytope's vertices.
pub fn mvee(p: &VPolytope, tol: f64) -> Result<MveeCertificate> {
    let (ellipsoid, iterations) = khachiyan(p.vertices(), tol, None)?;
    let ratio = ellipsoid.volume() / p.hull().volume();
    Ok(MveeCertificate { ellipsoid, ratio, tolerance: tol, iterations })
}

/// MVEE of a point set, with the ratio taken against the hull of the points.
pub fn mvee_points(points: &PointCloud, tol: f64) -> Result<MveeCertificate> {
    let (ellipsoid, iterations) = khachiyan(points, tol, None)?;
    let hull_volume = match convex_hull(points) {
        Ok(h) => h.volume(),
        Err(Error::DegenerateHull) => return Err(Error::DegenerateBody("points are not full-dimensional".into())),
        Err(e) => return Err(e),
    };
    let ratio = ellipsoid.volume() / hull_volume;
    Ok(MveeCertificate { ellipsoid, ratio, tolerance: tol, iterations })
}

/// As [`mvee_points`], also returning `log det X(u)` after every iteration.
pub fn mvee_traced(points: &PointCloud, tol: f64) -> Result<(MveeCertificate, Vec<f64>)> {
    let mut trace = Vec::new();
    let (ellipsoid, iterations) = khachiyan(points, tol, Some(&mut trace))?;
    let hull_volume = convex_hull(points)?.volume();
    let ratio = ellipsoid.volume() / hull_volume;
    Ok((MveeCertificate { ellipsoid, ratio, tolerance: tol, iterations }, trace))
}

/// Enclosing ellipsoid of any body: the body itself for balls and ellipsoids,
/// the vertex MVEE for polytopes.
pub fn enclosing_ellipsoid(body: &ConvexBody, tol: f64) -> Result<MveeCertificate> {
    let d = body.dim();
    let ellipsoid = match body {
        ConvexBody::Ball(b) => {
            let s = 1.0 / (b.radius() * b.radius());
            Ellipsoid::new(b.center().to_vec(), DMatrix::identity(d, d) * s)?
        }
        ConvexBody::Ellipsoid(e) => e.clone(),
        _ => {
            let verts = body.vertices().expect("polytope");
            let (ellipsoid, iterations) = khachiyan(verts, tol, None)?;
            let ratio = ellipsoid.volume() / body.volume();
            return Ok(MveeCertificate { ellipsoid, ratio, tolerance: tol, iterations });
        }
    };
    let ratio = ellipsoid.volume() / body.volume();
    Ok(MveeCertificate { ellipsoid, ratio, tolerance: tol, iterations: 0 })
}

/// Whether `cert` satisfies the `d^d` volume bound for `body` and contains
/// its vertices (or, for smooth bodies, a net of boundary points) after
/// scaling by `1 + tol` about its center.
pub fn ratio_check(body: &ConvexBody, cert: &MveeCertificate) -> bool {
    let d = body.dim();
    let slack = 1.0 + cert.tolerance;
    let bound = (d as f64).powi(d as i32) * slack.powi(d as i32);
    let ratio = cert.ellipsoid.volume() / body.volume();
    if !(cert.ratio <= bound && ratio <= bound) {
        return false;
    }
    let limit = slack * slack;
    let e = &cert.ellipsoid;
    match body.vertices() {
        Some(verts) => verts.iter().all(|v| e.quadratic_form(v) <= limit),
        None => {
            let net = crate::metrics::DirectionNet::new(d, SMOOTH_PROBES, 0.0);
            net.directions().iter().all(|u| e.quadratic_form(&boundary_point(body, u)) <= limit)
        }
    }
}

/// The boundary point of a ball or ellipsoid with outer normal `u`.
fn boundary_point(body: &ConvexBody, u: &[f64]) -> Vec<f64> {
    match body {
        ConvexBody::Ball(b) => b.center().iter().zip(u).map(|(c, x)| c + b.radius() * x).collect(),
        ConvexBody::Ellipsoid(e) => {
            let w = e.shape_inverse() * DVector::from_column_slice(u);
            let s = dot(u, w.as_slice()).sqrt();
            e.center().iter().zip(w.iter()).map(|(c, x)| c + x / s).collect()
        }
        _ => unreachable!("polytopes are checked through their vertices"),
    }
}

/// The map `T` sending the enclosing ellipsoid of `body` onto the unit ball,
/// and the normalized body `T(body)`.
pub fn normalize(body: &ConvexBody) -> Result<(AffineMap, ConvexBody)> {
    normalize_with_tol(body, DEFAULT_TOL)
}

pub fn normalize_with_tol(body: &ConvexBody, tol: f64) -> Result<(AffineMap, ConvexBody)> {
    let cert = enclosing_ellipsoid(body, tol)?;
    let t = cert.ellipsoid.to_unit_ball();
    let image = body.affine_image(&t)?;
    Ok((t, image))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("tolerance {tol} outside (0, 1e-3]")))
    }
}

fn lifted_inverse(q: &[DVector<f64>], u: &[f64]) -> Option<Matrix> {
    let n = q[0].len();
    let mut x = DMatrix::zeros(n, n);
    for (qi, &ui) in q.iter().zip(u) {
        if ui > 0.0 {
            x.ger(ui, qi, qi, 1.0);
        }
    }
    Cholesky::new(x).map(|c| c.inverse())
}

fn log_det(q: &[DVector<f64>], u: &[f64]) -> f64 {
    let n = q[0].len();
    let mut x = DMatrix::zeros(n, n);
    for (qi, &ui) in q.iter().zip(u) {
        x.ger(ui, qi, qi, 1.0);
    }
    let l = Cholesky::new(x).expect("positive definite").l();
    2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

fn khachiyan(points: &PointCloud, tol: f64, mut trace: Option<&mut Vec<f64>>) -> Result<(Ellipsoid, usize)> {
    check_tol(tol)?;
    let d = points.dim();
    let m = points.len();
    if m < d + 1 {
        return Err(Error::DegenerateBody("too few points for a full-dimensional ellipsoid".into()));
    }
    let n = d + 1;
    let nf = n as f64;
    let q: Vec<DVector<f64>> =
        points.iter().map(|p| DVector::from_iterator(n, p.iter().copied().chain(core::iter::once(1.0)))).collect();
    let mut u = vec![1.0 / m as f64; m];
    let mut xinv = lifted_inverse(&q, &u)
        .ok_or_else(|| Error::DegenerateBody("points are not full-dimensional".into()))?;
    let mut mq = vec![0.0; m];
    let mut iterations = 0;
    loop {
        for (k, qi) in q.iter().enumerate() {
            mq[k] = qi.dot(&(&xinv * qi));
        }
        let mut j = 0;
        for k in 1..m {
            if mq[k] > mq[j] {
                j = k;
            }
        }
        if mq[j] <= nf * (1.0 + tol) {
            break;
        }
        if iterations == MAX_ITER {
            return Err(Error::NoConvergence(MAX_ITER));
        }
        iterations += 1;
        let mut k_away = usize::MAX;
        for k in 0..m {
            if u[k] > 0.0 && (k_away == usize::MAX || mq[k] < mq[k_away]) {
                k_away = k;
            }
        }
        let ascent = mq[j] / nf - 1.0;
        let descent = 1.0 - mq[k_away] / nf;
        let mut refresh = iterations % 256 == 0;
        if ascent >= descent {
            let mj = mq[j];
            let beta = (mj - nf) / (nf * (mj - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - beta);
            u[j] += beta;
            let w = &xinv * &q[j];
            let denom = 1.0 - beta + beta * mj;
            xinv.ger(-beta / denom, &w, &w, 1.0);
            xinv /= 1.0 - beta;
        } else {
            let k = k_away;
            let mk = mq[k];
            let drop = u[k] / (1.0 - u[k]);
            let beta = if mk > 1.0 { ((nf - mk) / (nf * (mk - 1.0))).min(drop) } else { drop };
            u.iter_mut().for_each(|w| *w *= 1.0 + beta);
            if beta == drop {
                u[k] = 0.0;
                refresh = true;
            } else {
                u[k] -= beta;
            }
            if !refresh {
                let w = &xinv * &q[k];
                let denom = 1.0 + beta - beta * mk;
                xinv.ger(beta / denom, &w, &w, 1.0);
                xinv /= 1.0 + beta;
            }
        }
        if refresh {
            let total: f64 = u.iter().sum();
            u.iter_mut().for_each(|w| *w /= total);
            xinv = lifted_inverse(&q, &u).ok_or_else(|| Error::DegenerateBody("lost full rank".into()))?;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(log_det(&q, &u));
        }
    }

    let mut c = vec![0.0; d];
    for (p, &w) in points.iter().zip(&u) {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += w * pi;
        }
    }
    let mut s = DMatrix::zeros(d, d);
    for (p, &w) in points.iter().zip(&u) {
        if w > 0.0 {
            let v = DVector::from_iterator(d, p.iter().zip(&c).map(|(a, b)| a - b));
            s.ger(w, &v, &v, 1.0);
        }
    }
    let s_inv = Cholesky::new(s)
        .ok_or_else(|| Error::DegenerateBody("points are not full-dimensional".into()))?
        .inverse();
    let mut shape = s_inv / d as f64;
    shape = (&shape + shape.transpose()) * 0.5;
    let e = Ellipsoid::new(c.clone(), shape.clone())?;
    // Scale so that every point lies in the closed ellipsoid.
    let worst = points.iter().map(|p| e.quadratic_form(p)).fold(0.0, f64::max);
    Ok((Ellipsoid::new(c, shape / worst)?, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_ball_volume;
    use crate::sampler::{make_stream, sample_uniform};
    use core::f64::consts::PI;

    fn poly(rows: &[[f64; 2]]) -> VPolytope {
        VPolytope::new(&PointCloud::from_rows(2, rows).unwrap()).unwrap()
    }

    fn random_polygon(seed: u64) -> ConvexBody {
        let disc = ConvexBody::unit_ball(2).unwrap();
        let pts = sample_uniform(&disc, 12, &mut make_stream(seed, 0)).unwrap();
        ConvexBody::vpolytope(&pts).unwrap()
    }

    #[test]
    fn square_gives_circumscribed_circle() {
        let c = mvee(&poly(&[[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!((c.ratio - PI / 2.0).abs() < 1e-6, "{}", c.ratio);
        let a = c.ellipsoid.shape();
        assert!((a[(0, 0)] - 0.5).abs() < 1e-7 && (a[(1, 1)] - 0.5).abs() < 1e-7 && a[(0, 1)].abs() < 1e-7);
        assert!(c.ellipsoid.center().iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn equilateral_triangle_ratio() {
        let h = 3f64.sqrt() / 2.0;
        let c = mvee(&poly(&[[-1.0, 0.0], [1.0, 0.0], [0.0, 2.0 * h]]), DEFAULT_TOL).unwrap();
        let expected = PI / (3.0 * 3f64.sqrt() / 4.0);
        assert!((c.ratio - expected).abs() < 1e-6, "{} vs {expected}", c.ratio);
        assert!(c.ratio <= 4.0);
    }

    #[test]
    fn cube_gives_ball_of_radius_sqrt_d() {
        for d in 2..=4 {
            let body = ConvexBody::cube(d, -1.0, 1.0).unwrap();
            let c = enclosing_ellipsoid(&body, DEFAULT_TOL).unwrap();
            for v in body.vertices().unwrap().iter() {
                let r2: f64 = v.iter().map(|x| x * x).sum();
                assert!((r2 - d as f64).abs() < 1e-12);
                assert!((c.ellipsoid.quadratic_form(v) - 1.0).abs() < 1e-6);
            }
            let expected = unit_ball_volume(d) * (d as f64).powf(d as f64 / 2.0) / 2f64.powi(d as i32);
            assert!((c.ratio - expected).abs() < 1e-5 * expected);
            assert!(ratio_check(&body, &c));
        }
    }

    #[test]
    fn objective_never_decreases() {
        for seed in 0..20 {
            let body = random_polygon(seed);
            let (cert, trace) = mvee_traced(body.vertices().unwrap(), 1e-9).unwrap();
            assert_eq!(trace.len(), cert.iterations);
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn random_polygons_pass_ratio_check() {
        for seed in 0..200 {
            let body = random_polygon(1000 + seed);
            let cert = enclosing_ellipsoid(&body, DEFAULT_TOL).unwrap();
            assert!(ratio_check(&body, &cert), "seed {seed}");
            assert!(cert.ratio <= 4.0 * (1.0 + DEFAULT_TOL).powi(2));
        }
    }

    #[test]
    fn excluding_ellipsoid_fails_check() {
        let body = ConvexBody::cube(2, -1.0, 1.0).unwrap();
        let e = Ellipsoid::axis_aligned(vec![0.0, 0.0], &[1.2, 1.2]).unwrap();
        let cert = MveeCertificate { ratio: e.volume() / 4.0, ellipsoid: e, tolerance: DEFAULT_TOL, iterations: 0 };
        assert!(!ratio_check(&body, &cert));
    }

    #[test]
    fn smooth_bodies_certify_themselves() {
        let e = ConvexBody::Ellipsoid(Ellipsoid::axis_aligned(vec![1.0, 2.0, 3.0], &[1.0, 2.0, 0.5]).unwrap());
        let cert = enclosing_ellipsoid(&e, DEFAULT_TOL).unwrap();
        assert!((cert.ratio - 1.0).abs() < 1e-12);
        assert!(ratio_check(&e, &cert));
    }

    #[test]
    fn degenerate_and_bad_tolerance() {
        let flat = PointCloud::from_rows(2, &[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(matches!(mvee_points(&flat, DEFAULT_TOL), Err(Error::DegenerateBody(_))));
        let sq = poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(matches!(mvee(&sq, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(mvee(&sq, 0.01), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn normalize_ball() {
        let body = ConvexBody::ball(vec![1.0, -2.0], 3.0).unwrap();
        let (t, k) = normalize(&body).unwrap();
        assert!((t.det() - 1.0 / 9.0).abs() < 1e-15);
        let ConvexBody::Ball(b) = k else { panic!("expected a ball") };
        assert!((b.radius() - 1.0).abs() < 1e-15);
        assert!(b.center().iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn normalize_ellipsoid() {
        let e = Ellipsoid::axis_aligned(vec![0.0, 0.0], &[2.0, 0.5]).unwrap();
        let det_a = e.shape_det();
        let (t, k) = normalize(&ConvexBody::Ellipsoid(e)).unwrap();
        assert!((t.det().abs() - det_a.sqrt()).abs() < 1e-15);
        assert!((k.volume() - PI).abs() < 1e-12);
    }

    #[test]
    fn normalize_square() {
        let body = ConvexBody::cube(2, 0.0, 1.0).unwrap();
        let cert = enclosing_ellipsoid(&body, DEFAULT_TOL).unwrap();
        let (t, k) = normalize(&body).unwrap();
        assert!(k.vertices().unwrap().iter().all(|v| crate::linalg::norm(v) <= 1.0001));
        assert!((k.volume() - t.det().abs()).abs() < 1e-12);
        let beta = unit_ball_volume(2);
        assert!((t.det().abs() * cert.ellipsoid.volume() - beta).abs() < 1e-8 * beta);
    }
}
