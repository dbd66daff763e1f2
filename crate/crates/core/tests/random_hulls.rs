use std::f64::consts::PI;

use randpoly_core::ellipsoid::{enclosing_ellipsoid, normalize, DEFAULT_TOL};
use randpoly_core::stats::mean_se;
use randpoly_core::{
    constants, convex_hull, hausdorff, make_stream, missing_volume, AffineMap, ConvexBody, PointCloud,
    UniformSampler,
};

fn mean_missing_fraction(body: &ConvexBody, n: usize, reps: u64, seed: u64) -> (f64, f64) {
    let sampler = UniformSampler::new(body).unwrap();
    let vol = body.volume();
    let v: Vec<f64> = (0..reps)
        .map(|r| {
            let pts = sampler.sample(n, &mut make_stream(seed, r)).points;
            missing_volume(body, &pts).unwrap() / vol
        })
        .collect();
    mean_se(&v)
}

fn assert_close(body: &ConvexBody, n: usize, expected: f64) {
    let (m, se) = mean_missing_fraction(body, n, 20_000, 17);
    assert!((m - expected).abs() < 4.0 * se, "n={n}: {m} ± {se}, expected {expected}");
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[test]
fn triangle_missing_area_matches_exact_mean() {
    let t = ConvexBody::standard_simplex(2).unwrap();
    for n in [3, 4, 10, 40] {
        assert_close(&t, n, 2.0 * harmonic(n) / (n as f64 + 1.0));
    }
}

#[test]
fn random_triangles_in_disc_and_square() {
    assert_close(&ConvexBody::unit_ball(2).unwrap(), 3, 1.0 - 35.0 / (48.0 * PI * PI));
    assert_close(&ConvexBody::cube(2, 0.0, 1.0).unwrap(), 3, 1.0 - 11.0 / 144.0);
}

#[test]
fn random_tetrahedron_in_ball() {
    assert_close(&ConvexBody::unit_ball(3).unwrap(), 4, 1.0 - 9.0 / 715.0);
}

#[test]
fn missing_fraction_is_affine_invariant_pointwise() {
    let body = ConvexBody::cube(3, -1.0, 1.0).unwrap();
    let t = AffineMap::new(
        randpoly_core::linalg::Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.0, 0.5, -0.1, 0.4, 0.0, 1.5]),
        vec![3.0, -1.0, 0.25],
    )
    .unwrap();
    let image = body.affine_image(&t).unwrap();
    let sampler = UniformSampler::new(&body).unwrap();
    for rep in 0..20 {
        let pts = sampler.sample(50, &mut make_stream(5, rep)).points;
        let a = missing_volume(&body, &pts).unwrap() / body.volume();
        let b = missing_volume(&image, &t.apply_cloud(&pts)).unwrap() / image.volume();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn hull_of_cube_corners() {
    for d in 2..=5 {
        let cube = ConvexBody::cube(d, 0.0, 1.0).unwrap();
        let mut pts = PointCloud::new(d);
        for v in cube.vertices().unwrap().iter() {
            pts.push(v).unwrap();
        }
        pts.push(&vec![0.5; d]).unwrap();
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices().len(), 1 << d);
        assert!((h.volume() - 1.0).abs() < 1e-12);
        assert!(missing_volume(&cube, &pts).unwrap().abs() < 1e-12);
    }
}

#[test]
fn concentric_balls_are_radius_gap_apart() {
    let a = ConvexBody::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let b = ConvexBody::ball(vec![0.0, 0.0, 0.0], 0.6).unwrap();
    let (est, err) = hausdorff(&a, &b, 512).unwrap();
    assert!((est - 0.4).abs() <= err + 1e-12);
}

#[test]
fn normalized_bodies_sit_between_balls() {
    for body in [
        ConvexBody::cube(3, 0.0, 2.0).unwrap(),
        ConvexBody::standard_simplex(3).unwrap(),
        ConvexBody::standard_simplex(2).unwrap(),
    ] {
        let d = body.dim();
        let cert = enclosing_ellipsoid(&body, DEFAULT_TOL).unwrap();
        assert!(cert.ratio <= (d as f64).powi(d as i32) * (1.0 + DEFAULT_TOL).powi(d as i32));
        let (_, image) = normalize(&body).unwrap();
        let r = image.radius_about(&vec![0.0; d]);
        assert!(r <= 1.0 + 1e-6, "{r}");
        let beta = constants(d).unwrap().beta_d;
        assert!(image.volume() >= beta / (d as f64).powi(d as i32) * (1.0 - 1e-6));
    }
}
