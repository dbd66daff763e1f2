use proptest::{prop_assert, proptest};

use randpoly::experiments::*;
use randpoly_core::{constants, make_stream, AffineMap, ConvexBody};

#[test]
fn replicates_do_not_depend_on_workers() {
    let body = ConvexBody::standard_simplex(3).unwrap();
    let a = relative_missing_volumes(&body, 40, 25, 9, 1).unwrap();
    let b = relative_missing_volumes(&body, 40, 25, 9, 4).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn replicate_prefixes_are_stable() {
    let disc = ConvexBody::unit_ball(2).unwrap();
    let short = relative_missing_volumes(&disc, 30, 10, 2, 2).unwrap();
    let long = relative_missing_volumes(&disc, 30, 40, 2, 3).unwrap();
    assert_eq!(short[..], long[..10]);
}

#[test]
fn moments_decrease_and_dominate() {
    let disc = ConvexBody::unit_ball(2).unwrap();
    let t = moment_table("disc", &disc, &[1.0, 2.0], &[16, 64, 256], 400, 3, 2).unwrap();
    let m1 = t.series(1.0);
    let m2 = t.series(2.0);
    assert!(m1.windows(2).all(|w| w[1].moment < w[0].moment));
    for (a, b) in m1.iter().zip(&m2) {
        assert!(b.moment >= a.moment * a.moment);
        assert!(b.moment <= a.moment);
    }
}

fn synthetic(d: usize, q: f64, model: RateModel, c: f64) -> MomentTable {
    let rows = [32usize, 64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| {
            let x = n as f64;
            let moment = match model {
                RateModel::Power => c * x.powf(q),
                RateModel::PowerLog => c * (x.ln().powi(d as i32 - 1) / x).powf(q),
            };
            MomentRow { n, q: q.abs(), moment, se: 0.0 }
        })
        .collect();
    MomentTable { body_id: "synthetic".into(), d, rows }
}

proptest! {
    #[test]
    fn power_fits_recover_exponents(slope in -3.0f64..-0.1, c in 0.01f64..100.0) {
        let f = &rate_fit(&synthetic(2, slope, RateModel::Power, c), RateModel::Power).unwrap()[0];
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(f.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn power_log_fits_recover_constants(d in 2usize..5, q in 0.5f64..3.0, c in 0.1f64..10.0) {
        let f = &rate_fit(&synthetic(d, q, RateModel::PowerLog, c), RateModel::PowerLog).unwrap()[0];
        prop_assert!((f.slope - q).abs() < 1e-9);
        prop_assert!((f.constant.unwrap() - c).abs() < 1e-9 * c);
    }
}

#[test]
fn tail_curves_are_monotone_with_valid_intervals() {
    let square = ConvexBody::cube(2, 0.0, 1.0).unwrap();
    let v = relative_missing_volumes(&square, 100, 300, 4, 2).unwrap();
    let c = tail_curve(&v, 2, 100, 40).unwrap();
    for curve in [&c.shifted, &c.unshifted] {
        assert!(curve.windows(2).all(|w| w[1].s <= w[0].s));
        assert!(curve.iter().all(|p| p.ci_lo <= p.s && p.s <= p.ci_hi && p.ci_lo >= 0.0 && p.ci_hi <= 1.0));
    }
    assert_eq!(c.unshifted[0].s, 1.0);
    let decay = c.decay.expect("enough replicates for a decay fit");
    assert!(decay.rate > 0.0 && decay.x_hi > decay.x_lo);
    // At this n the shift exceeds every replicate.
    assert!(c.shifted.iter().all(|p| p.s == 0.0));
    assert!(c.envelope_violations(1e3).unwrap().is_empty());
}

#[test]
fn small_samples_have_no_decay_fit() {
    let c = tail_curve(&[0.1, 0.2, 0.3], 2, 10, 5).unwrap();
    assert!(c.decay.is_none());
    assert!(tail_curve(&[], 2, 10, 5).is_err());
}

#[test]
fn disc_and_its_affine_image_agree() {
    let disc = ConvexBody::unit_ball(2).unwrap();
    let t = AffineMap::diagonal(&[3.0, 0.25]).unwrap();
    let r = affine_invariance_test(&disc, &t, 32, 600, (1, 2), 2).unwrap();
    assert!(r.p_value > 1e-3, "{r:?}");
}

#[test]
fn random_polygons_lie_in_the_disc() {
    let mut touching = 0;
    for k in 0..400 {
        let p = random_polygon(&mut make_stream(8, k));
        let r = p.vertices().iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        assert!(r <= 1.0 + 1e-12 && p.area() > 0.0);
        if (r - 1.0).abs() < 1e-12 {
            touching += 1;
        }
    }
    assert!((150..250).contains(&touching), "{touching}");
}

#[test]
fn nikodym_over_hausdorff_stays_below_perimeter_scale() {
    let r = lemma2_check(60, 3, 2).unwrap();
    assert_eq!(r.alpha1, constants(2).unwrap().alpha1);
    assert!(r.max_ratio <= r.max_ratio_upper);
    assert!(r.max_ratio_upper < 2.0 * std::f64::consts::TAU, "{r:?}");
}

#[test]
fn packing_is_monotone_and_worker_independent() {
    let a = packing_number(&[0.5, 0.35, 0.25], 300, 1, 128, 1).unwrap();
    let b = packing_number(&[0.5, 0.35, 0.25], 300, 1, 128, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.rows.windows(2).all(|w| w[1].count >= w[0].count));
    assert!(a.rows.iter().all(|r| r.count >= 1 && r.count <= 300));
}

#[test]
fn ellipsoid_chain_holds_replicate_by_replicate() {
    for body in [ConvexBody::cube(2, 0.0, 3.0).unwrap(), ConvexBody::standard_simplex(3).unwrap()] {
        let c = ellipsoid_chain_check(&body, 30, 40, 6).unwrap();
        assert_eq!(c.violations, 0, "{c:?}");
        assert!(c.max_ratio <= 1.0 + 1e-9);
    }
}

#[test]
fn ball_lower_bound_constant_is_positive() {
    let lb = lower_bound_check(2, 1.0, &[16, 32, 64, 128], 200, 2, 2).unwrap();
    assert!(lb.a_q > 0.0);
    assert!(lb.scaled.iter().all(|s| s.1 >= lb.a_q || s.0 < 64));
}

#[test]
fn saturation_is_flagged_only_when_the_pool_binds() {
    let r = packing_number(&[2.5, 0.01], 200, 2, 64, 1).unwrap();
    assert_eq!(r.rows[0].count, 1);
    assert!(!r.rows[0].saturated);
    assert_eq!(r.rows[1].count, 200);
    assert!(r.rows[1].saturated);
}
