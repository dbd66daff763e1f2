//! Exact sign predicates on floating-point input.
//!
//! Every predicate first evaluates in `f64` together with a forward error
//! bound. When the float result is too close to zero for the bound to certify
//! its sign, the input is converted to big integers (every finite `f64` is a
//! dyadic rational) and the sign is computed exactly.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, Zero};

const EPS: f64 = f64::EPSILON * 0.5;
const CCW_ERRBOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const O3D_ERRBOUND: f64 = (7.0 + 56.0 * EPS) * EPS;
/// Absolute slack covering gradual underflow in the filtered paths.
const UNDERFLOW_SLACK: f64 = 1e-290;

/// Largest homogeneous matrix order handled by the stack-allocated filter.
const STACK_ORDER: usize = 8;

#[inline]
fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign of `det [a-c; b-c]`; positive when `a, b, c` turn counterclockwise.
pub fn orient2d(a: &[f64], b: &[f64], c: &[f64]) -> i8 {
    let detleft = (a[0] - c[0]) * (b[1] - c[1]);
    let detright = (a[1] - c[1]) * (b[0] - c[0]);
    let det = detleft - detright;
    let detsum = if detleft > 0.0 {
        if detright <= 0.0 {
            return sign_of(det);
        }
        detleft + detright
    } else if detleft < 0.0 {
        if detright >= 0.0 {
            return sign_of(det);
        }
        -detleft - detright
    } else {
        return exact_or(det, a, b, c);
    };
    let bound = CCW_ERRBOUND * detsum + UNDERFLOW_SLACK;
    if det.abs() > bound {
        return sign_of(det);
    }
    let rows: [&[f64]; 3] = [a, b, c];
    exact_homogeneous_sign(&rows, &[0, 1])
}

fn exact_or(det: f64, a: &[f64], b: &[f64], c: &[f64]) -> i8 {
    // A zero difference is exact, so a nonzero float product carries the sign.
    if det != 0.0 {
        return sign_of(det);
    }
    let rows: [&[f64]; 3] = [a, b, c];
    exact_homogeneous_sign(&rows, &[0, 1])
}

/// Sign of `det [a-d; b-d; c-d]`.
pub fn orient3d(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> i8 {
    let adx = a[0] - d[0];
    let bdx = b[0] - d[0];
    let cdx = c[0] - d[0];
    let ady = a[1] - d[1];
    let bdy = b[1] - d[1];
    let cdy = c[1] - d[1];
    let adz = a[2] - d[2];
    let bdz = b[2] - d[2];
    let cdz = c[2] - d[2];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;

    let det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * adz.abs()
        + (cdxady.abs() + adxcdy.abs()) * bdz.abs()
        + (adxbdy.abs() + bdxady.abs()) * cdz.abs();
    let bound = O3D_ERRBOUND * permanent + UNDERFLOW_SLACK;
    if det.abs() > bound {
        return sign_of(det);
    }
    let rows: [&[f64]; 4] = [a, b, c, d];
    exact_homogeneous_sign(&rows, &[0, 1, 2])
}

/// Orientation of the point `q` relative to the oriented hyperplane through
/// the `d` points of `simplex` in `R^d`: the sign of the determinant whose rows
/// are `[p, 1]` for `p` in `simplex` followed by `[q, 1]`.
///
/// Agrees with [`orient2d`] and [`orient3d`] (with `q` as the last argument).
pub fn orient(simplex: &[&[f64]], q: &[f64]) -> i8 {
    let d = q.len();
    debug_assert_eq!(simplex.len(), d);
    match d {
        2 => orient2d(simplex[0], simplex[1], q),
        3 => orient3d(simplex[0], simplex[1], simplex[2], q),
        _ => {
            let mut rows: [&[f64]; 16] = [&[]; 16];
            assert!(d < 16, "orientation only supported up to d = 15");
            rows[..d].copy_from_slice(simplex);
            rows[d] = q;
            let axes: [usize; 15] = core::array::from_fn(|i| i);
            homogeneous_sign(&rows[..=d], &axes[..d])
        }
    }
}

/// Orientation of `k + 1` points after projecting onto the coordinate axes
/// listed in `axes` (`axes.len() == k`). Nonzero exactly when the projected
/// points are affinely independent.
pub fn orient_projected(points: &[&[f64]], axes: &[usize]) -> i8 {
    debug_assert_eq!(points.len(), axes.len() + 1);
    match axes.len() {
        1 => {
            let a = points[0][axes[0]];
            let b = points[1][axes[0]];
            // Comparison of two floats is exact.
            if a > b {
                1
            } else if a < b {
                -1
            } else {
                0
            }
        }
        _ => homogeneous_sign(points, axes),
    }
}

/// Sign of the determinant of the homogeneous matrix with rows
/// `[p[axes[0]], .., p[axes[k-1]], 1]`.
fn homogeneous_sign(points: &[&[f64]], axes: &[usize]) -> i8 {
    let n = axes.len() + 1;
    let (det, perm) = if n <= STACK_ORDER {
        let mut m = [0.0f64; STACK_ORDER * STACK_ORDER];
        fill_homogeneous(&mut m, points, axes);
        let mut dets = [0.0f64; 1 << STACK_ORDER];
        let mut perms = [0.0f64; 1 << STACK_ORDER];
        laplace_with_permanent(&m, n, &mut dets, &mut perms)
    } else {
        let mut m = vec![0.0f64; n * n];
        fill_homogeneous(&mut m, points, axes);
        let mut dets = vec![0.0f64; 1 << n];
        let mut perms = vec![0.0f64; 1 << n];
        laplace_with_permanent(&m, n, &mut dets, &mut perms)
    };
    // Each cofactor level contributes at most (k + 1) roundings on top of the
    // level below; (n^2 + 3n) * eps covers the accumulated bound with slack.
    let bound = ((n * n + 3 * n) as f64) * EPS * perm * (1.0 + 1e-10) + UNDERFLOW_SLACK;
    if det.is_finite() && perm.is_finite() && det.abs() > bound {
        return sign_of(det);
    }
    exact_homogeneous_sign(points, axes)
}

fn fill_homogeneous(m: &mut [f64], points: &[&[f64]], axes: &[usize]) {
    let n = axes.len() + 1;
    for (r, p) in points.iter().enumerate() {
        for (c, &ax) in axes.iter().enumerate() {
            m[r * n + c] = p[ax];
        }
        m[r * n + n - 1] = 1.0;
    }
}

/// Determinant by Laplace expansion over column subsets, together with the
/// permanent of the entrywise absolute values (the error-bound magnitude).
fn laplace_with_permanent(m: &[f64], n: usize, dets: &mut [f64], perms: &mut [f64]) -> (f64, f64) {
    dets[0] = 1.0;
    perms[0] = 1.0;
    for s in 1usize..(1 << n) {
        let row = s.count_ones() as usize - 1;
        let mut det = 0.0;
        let mut perm = 0.0;
        let mut bits = s;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << j);
            let greater = (s >> (j + 1)).count_ones();
            let entry = m[row * n + j];
            let term = entry * dets[rest];
            if greater % 2 == 0 {
                det += term;
            } else {
                det -= term;
            }
            perm += entry.abs() * perms[rest];
        }
        dets[s] = det;
        perms[s] = perm;
    }
    let full = (1 << n) - 1;
    (dets[full], perms[full])
}

/// Converts finite floats to integers sharing a common power-of-two scale.
fn to_common_scale(values: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(i64, i32)> = values
        .iter()
        .map(|&v| {
            assert!(v.is_finite(), "exact predicates require finite input");
            if v == 0.0 {
                (0, 0)
            } else {
                let (mant, exp, sign) = v.integer_decode();
                (sign as i64 * mant as i64, exp as i32)
            }
        })
        .collect();
    let min_exp = decoded.iter().filter(|(m, _)| *m != 0).map(|&(_, e)| e).min().unwrap_or(0);
    decoded
        .into_iter()
        .map(|(m, e)| {
            if m == 0 {
                BigInt::zero()
            } else {
                BigInt::from(m) << ((e - min_exp) as usize)
            }
        })
        .collect()
}

fn exact_homogeneous_sign(points: &[&[f64]], axes: &[usize]) -> i8 {
    let n = axes.len() + 1;
    let mut flat = vec![0.0f64; n * n];
    fill_homogeneous(&mut flat, points, axes);
    let ints = to_common_scale(&flat);
    bareiss_sign(ints, n)
}

/// Exact determinant sign of an integer matrix by fraction-free elimination.
fn bareiss_sign(mut a: Vec<BigInt>, n: usize) -> i8 {
    let mut sign: i8 = 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k * n + k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                return 0;
            };
            for c in 0..n {
                a.swap(k * n + c, swap * n + c);
            }
            sign = -sign;
        }
        if k + 1 == n {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    let last = &a[n * n - 1];
    if last.is_zero() {
        0
    } else if last.is_positive() {
        sign
    } else {
        -sign
    }
}

/// Exact sign of `a . x - b`.
pub fn affine_sign(a: &[f64], x: &[f64], b: f64) -> i8 {
    debug_assert_eq!(a.len(), x.len());
    let mut sum = -b;
    let mut mag = b.abs();
    for (ai, xi) in a.iter().zip(x) {
        let t = ai * xi;
        sum += t;
        mag += t.abs();
    }
    let bound = (2 * a.len() + 4) as f64 * EPS * mag + UNDERFLOW_SLACK;
    if sum.is_finite() && sum.abs() > bound {
        return sign_of(sum);
    }
    exact_affine_sign(a, x, b)
}

fn exact_affine_sign(a: &[f64], x: &[f64], b: f64) -> i8 {
    // Each product of two dyadics is a dyadic; collect them as (mantissa, exp).
    let mut terms: Vec<(BigInt, i32)> = Vec::with_capacity(a.len() + 1);
    let decode = |v: f64| -> Option<(BigInt, i32)> {
        if v == 0.0 {
            None
        } else {
            let (m, e, s) = v.integer_decode();
            Some((BigInt::from(s as i64 * m as i64), e as i32))
        }
    };
    for (&ai, &xi) in a.iter().zip(x) {
        if let (Some((ma, ea)), Some((mx, ex))) = (decode(ai), decode(xi)) {
            terms.push((ma * mx, ea + ex));
        }
    }
    if let Some((mb, eb)) = decode(b) {
        terms.push((-mb, eb));
    }
    let Some(min_exp) = terms.iter().map(|t| t.1).min() else {
        return 0;
    };
    let total: BigInt = terms.into_iter().map(|(m, e)| m << ((e - min_exp) as usize)).sum();
    if total.is_zero() {
        0
    } else if total.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orient2d_basic() {
        assert_eq!(orient2d(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]), 1);
        assert_eq!(orient2d(&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]), -1);
        assert_eq!(orient2d(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]), 0);
    }

    #[test]
    fn orient2d_near_degenerate_is_exact() {
        // Points on the line y = x, perturbed by one ulp.
        let a = [0.5, 0.5];
        let b = [12.0, 12.0];
        let c = [24.0, 24.0];
        assert_eq!(orient2d(&a, &b, &c), 0);
        let c_up = [24.0, f64::from_bits(24.0f64.to_bits() + 1)];
        let c_dn = [24.0, f64::from_bits(24.0f64.to_bits() - 1)];
        assert_eq!(orient2d(&a, &b, &c_up), 1);
        assert_eq!(orient2d(&a, &b, &c_dn), -1);
    }

    #[test]
    fn generic_matches_specialized() {
        let a = [0.1, 0.7, -0.3];
        let b = [1.3, -0.2, 0.4];
        let c = [-0.5, 0.9, 1.1];
        let d = [0.25, 0.25, 0.25];
        let axes = [0, 1, 2];
        assert_eq!(orient3d(&a, &b, &c, &d), homogeneous_sign(&[&a, &b, &c, &d], &axes));
        assert_eq!(orient3d(&a, &b, &c, &d), exact_homogeneous_sign(&[&a, &b, &c, &d], &axes));
        let p = [0.3, 0.1];
        let q = [-0.7, 2.0];
        let r = [1e-3, 5.0];
        assert_eq!(orient2d(&p, &q, &r), homogeneous_sign(&[&p, &q, &r], &[0, 1]));
    }

    #[test]
    fn coplanar_in_four_dimensions() {
        // Five points on the hyperplane x0 + x1 + x2 + x3 = 1 (dyadic, so exact).
        let pts: [[f64; 4]; 5] = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.125, 0.25, 0.375, 0.25],
        ];
        let simplex: [&[f64]; 4] = [&pts[0], &pts[1], &pts[2], &pts[3]];
        assert_eq!(orient(&simplex, &pts[4]), 0);
        assert_ne!(orient(&simplex, &[0.0; 4]), 0);
        // 0.1 + 0.2 + 0.3 + 0.4 is not exactly 1 in binary.
        assert_ne!(orient(&simplex, &[0.1, 0.2, 0.3, 0.4]), 0);
        assert_eq!(orient(&simplex, &[0.0; 4]), -orient(&simplex, &[1.0; 4]));
    }

    #[test]
    fn affine_sign_exact() {
        assert_eq!(affine_sign(&[1.0, 0.0], &[1.0, 0.5], 1.0), 0);
        assert_eq!(affine_sign(&[1.0, 0.0], &[1.0001, 0.5], 1.0), 1);
        // 0.1 + 0.2 != 0.3 in binary; the exact sign must reflect the dyadic values.
        assert_eq!(affine_sign(&[1.0, 1.0], &[0.1, 0.2], 0.3), 1);
        assert_eq!(affine_sign(&[1.0], &[0.5], 0.5), 0);
    }

    #[test]
    fn bareiss_known_determinants() {
        let m: Vec<BigInt> = [2, 0, 1, 1, 3, 2, 1, 1, 1].iter().map(|&v| BigInt::from(v)).collect();
        // det = 2*(3-2) - 0 + 1*(1-3) = 0
        assert_eq!(bareiss_sign(m, 3), 0);
        let m: Vec<BigInt> = [0, 1, 1, 0].iter().map(|&v| BigInt::from(v)).collect();
        assert_eq!(bareiss_sign(m, 2), -1);
    }
}
