//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails.
//!
//! Run alone with `cargo test -p randpoly --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use randpoly::cli::{config_from, execute, Cli};
use randpoly::experiments::{
    affine_invariance_test, compare_bodies, lemma2_check, moment_table, packing_number, random_polygon,
    relative_missing_volumes, rate_fit, tail_curve, RateModel,
};
use randpoly_core::ellipsoid::{enclosing_ellipsoid, mvee, DEFAULT_TOL};
use randpoly_core::metrics::steiner_fit_ball;
use randpoly_core::{constants, make_stream, AffineMap, ConvexBody};

type Check = Result<(bool, String), String>;

const WORKERS: usize = 4;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Unit ball volumes by the two-step recursion `β_d = 2π/d · β_{d-2}`.
fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * ball_volume(d - 2),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn constants_exact() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut identities = true;
    for d in 2..=10usize {
        let t = constants(d).map_err(|e| e.to_string())?;
        let beta = ball_volume(d);
        let (p3, p2) = (3u64.pow(d as u32), 2u64.pow(d as u32));
        // Integer parts: α₁ = β(3^d − 1), α₂ = β(2^d − 1), α₃ = 3^{d+1} + 2^d − 3.
        let (a1, a2, a3) = (p3 - 1, p2 - 1, 3 * p3 + p2 - 3);
        identities &= a3 == 1 + 3 * a1 + a2;
        identities &= (1..=d as u64).map(|j| binomial(d as u64, j) * (1 << j)).sum::<u64>() == a1;
        identities &= (1..=d as u64).map(|j| binomial(d as u64, j)).sum::<u64>() == a2;
        for (got, want) in [
            (t.beta_d, beta),
            (t.alpha1, beta * a1 as f64),
            (t.alpha2, beta * a2 as f64),
            (t.alpha3, a3 as f64),
            (t.c2, a3 as f64 * beta),
            (t.c2, t.alpha3 * t.beta_d),
            (t.alpha3, 1.0 + (3.0 * t.alpha1 + t.alpha2) / t.beta_d),
        ] {
            worst = worst.max(rel(got, want));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-12 && identities && secs < 1.0,
        format!("max relative error {worst:.1e} over d = 2..10, integer identities {identities}, {secs:.3} s"),
    ))
}

fn steiner() -> Check {
    let lambdas = [0.1, 0.2, 0.3, 0.4, 0.5];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for d in [2usize, 3] {
        let fit = steiner_fit_ball(d, &lambdas, 10_000_000, &mut make_stream(2, d as u64)).map_err(|e| e.to_string())?;
        let beta = ball_volume(d);
        for (j, c) in fit.coefficients.iter().enumerate() {
            let want = beta * binomial(d as u64, j as u64 + 1) as f64;
            worst = worst.max(rel(*c, want));
            parts.push(format!("L{}(B{d}) {c:.4}/{want:.4}", j + 1));
        }
    }
    Ok((worst <= 0.02, format!("max relative error {:.3}%: {}", worst * 100.0, parts.join(", "))))
}

fn mvee_ratio() -> Check {
    let tol = DEFAULT_TOL;
    let mut worst_excess: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut failures = 0;
    let mut check = |body: &ConvexBody| -> Result<(), String> {
        let d = body.dim();
        let cert = match body {
            ConvexBody::VPolytope(p) => mvee(p, tol),
            _ => enclosing_ellipsoid(body, tol),
        }
        .map_err(|e| e.to_string())?;
        let excess = body
            .vertices()
            .expect("polytope")
            .iter()
            .map(|v| cert.ellipsoid.quadratic_form(v) - 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let bound = (d as f64).powi(d as i32) * (1.0 + tol).powi(d as i32);
        let ratio = cert.ellipsoid.volume() / body.volume();
        if excess > 1e-9 || ratio > bound {
            failures += 1;
        }
        worst_excess = worst_excess.max(excess);
        worst_ratio = worst_ratio.max(ratio / bound);
        Ok(())
    };
    for k in 0..1000 {
        check(&random_polygon(&mut make_stream(3, k)).to_body().map_err(|e| e.to_string())?)?;
    }
    check(&ConvexBody::cube(3, 0.0, 1.0).map_err(|e| e.to_string())?)?;
    check(&ConvexBody::standard_simplex(3).map_err(|e| e.to_string())?)?;
    Ok((
        failures == 0,
        format!(
            "1002 bodies, {failures} failures, max vertex excess {worst_excess:.1e}, max ratio/bound {worst_ratio:.4}"
        ),
    ))
}

fn lemma2() -> Check {
    let r = lemma2_check(1000, 4, WORKERS).map_err(|e| e.to_string())?;
    Ok((
        r.max_ratio_upper <= 8.0 * PI,
        format!(
            "max |G △ G'|/d_H = {:.4} (certified lower {:.4}) against alpha1 = {:.4}, perimeter scale 2π = {:.4}",
            r.max_ratio_upper,
            r.max_ratio,
            r.alpha1,
            2.0 * PI
        ),
    ))
}

fn smooth_rate() -> Check {
    let ns: Vec<usize> = (5..=12).map(|k| 1 << k).collect();
    let disc = ConvexBody::unit_ball(2).map_err(|e| e.to_string())?;
    let ball = ConvexBody::unit_ball(3).map_err(|e| e.to_string())?;
    let t2 = moment_table("disc", &disc, &[1.0, 2.0], &ns, 10_000, 5, WORKERS).map_err(|e| e.to_string())?;
    let t3 = moment_table("ball3", &ball, &[1.0], &ns, 10_000, 6, WORKERS).map_err(|e| e.to_string())?;
    let f2 = rate_fit(&t2, RateModel::Power).map_err(|e| e.to_string())?;
    let f3 = rate_fit(&t3, RateModel::Power).map_err(|e| e.to_string())?;
    let checks = [
        ("disc q=1", f2[0].slope, -2.0 / 3.0, 0.07),
        ("disc q=2", f2[1].slope, -4.0 / 3.0, 0.12),
        ("ball3 q=1", f3[0].slope, -0.5, 0.08),
    ];
    let ok = checks.iter().all(|(_, s, want, tol)| (s - want).abs() <= *tol);
    let detail = checks.iter().map(|(name, s, want, tol)| format!("{name} slope {s:.4} ({want:.4} ± {tol})")).collect::<Vec<_>>();
    Ok((ok, detail.join(", ")))
}

fn polytope_rate() -> Check {
    let square = ConvexBody::cube(2, 0.0, 1.0).map_err(|e| e.to_string())?;
    let n = 4096usize;
    let v = relative_missing_volumes(&square, n, 10_000, 7, WORKERS).map_err(|e| e.to_string())?;
    let (m, se) = randpoly_core::stats::mean_se(&v);
    let scale = n as f64 / (n as f64).ln();
    let value = m * scale;
    Ok((
        (2.27..=3.07).contains(&value),
        format!("E[v_rel] n/ln n = {value:.4} ± {:.4} at n = 4096 (window [2.27, 3.07])", se * scale),
    ))
}

fn exponential_tail() -> Check {
    let disc = ConvexBody::unit_ball(2).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, seed) in [(100usize, 8u64), (1000, 9)] {
        let v = relative_missing_volumes(&disc, n, 100_000, seed, WORKERS).map_err(|e| e.to_string())?;
        let curve = tail_curve(&v, 2, n, 128).map_err(|e| e.to_string())?;
        let fit = curve.decay.ok_or("no decay fit")?;
        ok &= fit.rate >= 1.0 / PI;
        parts.push(format!("n={n} rate {:.4} (r2 {:.3}, x in [{:.2}, {:.2}])", fit.rate, fit.r2, fit.x_lo, fit.x_hi));
    }
    Ok((ok, format!("{} against 1/π = {:.4}", parts.join(", "), 1.0 / PI)))
}

fn affine_invariance() -> Check {
    let disc = ConvexBody::unit_ball(2).map_err(|e| e.to_string())?;
    let square = ConvexBody::cube(2, 0.0, 1.0).map_err(|e| e.to_string())?;
    let t = AffineMap::diagonal(&[2.0, 0.5]).map_err(|e| e.to_string())?;
    let same = affine_invariance_test(&disc, &t, 64, 10_000, (10, 11), WORKERS).map_err(|e| e.to_string())?;
    let diff = compare_bodies(&disc, &square, 64, 10_000, (12, 13), WORKERS).map_err(|e| e.to_string())?;
    Ok((
        same.p_value > 0.01 && diff.p_value < 0.01,
        format!(
            "disc vs ellipse D = {:.4}, p = {:.3}; disc vs square D = {:.4}, p = {:.2e}",
            same.statistic, same.p_value, diff.statistic, diff.p_value
        ),
    ))
}

fn entropy_exponent() -> Check {
    let r = packing_number(&[0.2, 0.1, 0.05, 0.025], 100_000, 14, 256, WORKERS).map_err(|e| e.to_string())?;
    let counts = r
        .rows
        .iter()
        .map(|row| format!("N({}) = {}{}", row.delta, row.count, if row.saturated { " saturated" } else { "" }))
        .collect::<Vec<_>>();
    Ok((
        r.r2 > 0.9 && r.slope > 0.0,
        format!("pool {}: {}; ln N = {:.3} + {:.3} δ^(-1/2), R² = {:.3}", r.pool, counts.join(", "), r.intercept, r.slope, r.r2),
    ))
}

fn determinism() -> Check {
    let runs: &[&[&str]] = &[
        &["simulate", "--body", "ball3", "--n", "64,256", "--reps", "200", "--seed", "15"],
        &["tail", "--body", "cube3", "--n", "128", "--reps", "300", "--seed", "16"],
        &["moments", "--body", "ellipse(2,0.5)", "--q", "1,2", "--n", "32:256:x2", "--reps", "200", "--seed", "17"],
        &["packing", "--deltas", "0.4,0.3", "--pool", "500", "--seed", "18"],
        &["normalize", "--body", "triangle"],
    ];
    let mut mismatched = Vec::new();
    for args in runs {
        let render = |workers: &str| -> Result<String, String> {
            let argv = [&["randpoly"], *args, &["--workers", workers]].concat();
            let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
            let c = config_from(&cli.command).map_err(|e| e.to_string())?;
            Ok(execute(&c).map_err(|e| e.to_string())?.contents)
        };
        let one = render("1")?;
        if ["2", "3", "8"].iter().map(|w| render(w)).any(|o| o.as_ref() != Ok(&one)) {
            mismatched.push(args[0]);
        }
    }
    let a = lemma2_check(50, 19, 1).map_err(|e| e.to_string())?;
    let b = lemma2_check(50, 19, 5).map_err(|e| e.to_string())?;
    if a != b {
        mismatched.push("lemma2");
    }
    Ok((
        mismatched.is_empty(),
        format!("{} commands at 1, 2, 3 and 8 workers, mismatches: {:?}", runs.len() + 1, mismatched),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("constants exactness", constants_exact),
        ("Steiner coefficients", steiner),
        ("enclosing ellipsoid ratio", mvee_ratio),
        ("Nikodym over Hausdorff", lemma2),
        ("smooth rate", smooth_rate),
        ("polytope rate", polytope_rate),
        ("exponential tail", exponential_tail),
        ("affine invariance", affine_invariance),
        ("entropy exponent", entropy_exponent),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
