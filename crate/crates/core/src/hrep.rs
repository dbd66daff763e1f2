//! Vertex enumeration for bounded H-polytopes by the double-description method.
//!
//! The polytope `{x : a_i . x <= b_i}` is homogenized to the pointed cone
//! `{(x, t) : a_i . x - b_i t <= 0, t >= 0}`, whose extreme rays with `t > 0`
//! are the vertices. Constraints are added one at a time; new rays are formed
//! from adjacent pairs on opposite sides, with adjacency decided by the
//! combinatorial zero-set test.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::points::PointCloud;
use crate::MAX_HULL_DIM;

const ZERO_TOL: f64 = 1e-9;

#[derive(Clone)]
struct Ray {
    dir: Vec<f64>,
    zeros: Vec<u64>,
}

fn bit_set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Vertices of `{x : normals[i] . x <= offsets[i]}`.
///
/// Errors with [`Error::Unbounded`] when the region is unbounded and with
/// [`Error::DegenerateBody`] when it is empty.
pub fn enumerate_vertices(normals: &PointCloud, offsets: &[f64]) -> Result<PointCloud> {
    let d = normals.dim();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if d > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if normals.len() != offsets.len() {
        return Err(Error::InvalidBody("one offset per halfspace required".into()));
    }
    let n = d + 1;
    let mut rows: Vec<Vec<f64>> = normals
        .iter()
        .zip(offsets)
        .map(|(a, &b)| {
            let mut r = a.to_vec();
            r.push(-b);
            normalize(&mut r);
            r
        })
        .collect();
    let mut t_row = vec![0.0; n];
    t_row[d] = -1.0;
    rows.push(t_row);
    let m = rows.len();
    let words = m.div_ceil(64);

    let basis = independent_rows(&rows, n);
    if basis.len() < n {
        return Err(Error::Unbounded);
    }
    let r0 = crate::linalg::Matrix::from_fn(n, n, |i, j| rows[basis[i]][j]);
    let inv = r0.try_inverse().ok_or(Error::Unbounded)?;
    let mut rays: Vec<Ray> = (0..n)
        .map(|k| {
            let mut dir: Vec<f64> = (0..n).map(|i| -inv[(i, k)]).collect();
            normalize(&mut dir);
            let mut zeros = vec![0u64; words];
            for (j, &row) in basis.iter().enumerate() {
                if j != k {
                    bit_set(&mut zeros, row);
                }
            }
            Ray { dir, zeros }
        })
        .collect();

    for (i, row) in rows.iter().enumerate() {
        if basis.contains(&i) {
            continue;
        }
        let vals: Vec<f64> = rays.iter().map(|r| crate::linalg::dot(row, &r.dir)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > ZERO_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -ZERO_TOL).collect();
        if pos.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k].abs() <= ZERO_TOL {
                    bit_set(&mut r.zeros, i);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for &p in &pos {
            for &q in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[q].zeros).map(|(a, b)| a & b).collect();
                let count: u32 = common.iter().map(|w| w.count_ones()).sum();
                if (count as usize) + 2 < n {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(w, r)| w == p || w == q || !subset(&common, &r.zeros));
                if !adjacent {
                    continue;
                }
                let (sp, sq) = (vals[p], vals[q]);
                let mut dir: Vec<f64> =
                    rays[q].dir.iter().zip(&rays[p].dir).map(|(yq, yp)| sp * yq - sq * yp).collect();
                normalize(&mut dir);
                let mut zeros = common;
                bit_set(&mut zeros, i);
                next.push(Ray { dir, zeros });
            }
        }
        for (k, r) in rays.into_iter().enumerate() {
            if vals[k] < -ZERO_TOL {
                next.push(r);
            } else if vals[k].abs() <= ZERO_TOL {
                let mut r = r;
                bit_set(&mut r.zeros, i);
                next.push(r);
            }
        }
        rays = next;
    }

    let finite: Vec<&Ray> = rays.iter().filter(|r| r.dir[d] > ZERO_TOL).collect();
    if finite.is_empty() {
        return Err(Error::DegenerateBody("halfspaces have empty intersection".into()));
    }
    if finite.len() != rays.len() {
        return Err(Error::Unbounded);
    }
    let mut out = PointCloud::with_capacity(d, finite.len());
    for r in finite {
        let t = r.dir[d];
        let v: Vec<f64> = r.dir[..d].iter().map(|x| x / t).collect();
        out.push(&v)?;
    }
    Ok(out)
}

/// Greedy selection of linearly independent rows by Gram-Schmidt.
fn independent_rows(rows: &[Vec<f64>], n: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut picked = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for b in &basis {
            let c = crate::linalg::dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-10 {
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
            picked.push(i);
            if picked.len() == n {
                break;
            }
        }
    }
    picked
}
