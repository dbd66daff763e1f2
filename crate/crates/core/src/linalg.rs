//! Small dense helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Determinant of a row-major `n x n` matrix by partial-pivot elimination.
/// The buffer is overwritten.
pub fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for i in k + 1..n {
            let v = m[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            if f != 0.0 {
                for c in k + 1..n {
                    m[i * n + c] -= f * m[k * n + c];
                }
            }
        }
    }
    det
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Volume of the unit Euclidean ball, `pi^(d/2) / Gamma(d/2 + 1)`, via the
/// two-step recurrence `b_d = b_{d-2} * 2 pi / d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut b = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        b *= two_pi / k as f64;
        k += 2;
    }
    b
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn matrix_from_rows(rows: &[alloc::vec::Vec<f64>]) -> Matrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}
