//! Exact convex hulls in dimensions 2 through 6 and polytope volumes.
//!
//! The hull is built by beneath-beyond insertion over the lexicographically
//! sorted input. With that order every inserted point is extreme for the
//! current hull and sees at least one facet incident to the previously
//! inserted point, so locating the visible region never needs a global scan.
//! All visibility decisions use the exact orientation predicate; facets whose
//! hyperplane contains the new point are replaced as if visible, which keeps
//! the vertex set minimal (points on a facet hyperplane are never vertices).

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::{det_in_place, factorial};
use crate::points::PointCloud;
use crate::predicates;
use crate::MAX_HULL_DIM;

const NONE: u32 = u32::MAX;
const RIDGE_KEY: usize = MAX_HULL_DIM - 2;

/// A facet of a hull: `d` vertex indices plus its outward unit normal and offset.
///
/// Vertex order is significant: `orient` over the facet vertices is negative
/// for interior points.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Convex hull of a finite point set: extreme points in lexicographic order
/// and a simplicial facet list.
#[derive(Debug, Clone, PartialEq)]
pub struct HullResult {
    vertices: PointCloud,
    source: Vec<usize>,
    facets: Vec<Facet>,
    interior: Vec<f64>,
}

impl HullResult {
    pub fn dim(&self) -> usize {
        self.vertices.dim()
    }

    /// Extreme points of the input, sorted lexicographically.
    pub fn vertices(&self) -> &PointCloud {
        &self.vertices
    }

    /// Position of each vertex in the input point list.
    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// A point strictly inside every facet (centroid of the initial simplex).
    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    pub fn volume(&self) -> f64 {
        polytope_volume(self)
    }

    fn facet_orient(&self, f: &Facet, p: &[f64]) -> i8 {
        let mut s: [&[f64]; MAX_HULL_DIM] = [&[]; MAX_HULL_DIM];
        for (k, &v) in f.vertices.iter().enumerate() {
            s[k] = self.vertices.get(v);
        }
        predicates::orient(&s[..self.dim()], p)
    }

    /// Exact closed membership test.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.facets.iter().all(|f| self.facet_orient(f, p) <= 0)
    }
}

/// Exact convex hull of `points`.
///
/// Fails with [`Error::DegenerateHull`] when the points do not contain `d + 1`
/// affinely independent members.
pub fn convex_hull(points: &PointCloud) -> Result<HullResult> {
    let d = points.dim();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if d > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if points.as_flat().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coordinate".into()));
    }
    if points.len() < d + 1 {
        return Err(Error::DegenerateHull);
    }
    let mut b = Builder::new(points);
    b.run()?;
    Ok(b.finish())
}

/// Volume of a hull as a fan of simplices from its interior point.
pub fn polytope_volume(h: &HullResult) -> f64 {
    let d = h.dim();
    let c = h.interior_point();
    let mut m = [0.0f64; MAX_HULL_DIM * MAX_HULL_DIM];
    let mut total = 0.0;
    for f in h.facets() {
        for (r, &v) in f.vertices.iter().enumerate() {
            let p = h.vertices().get(v);
            for k in 0..d {
                m[r * d + k] = p[k] - c[k];
            }
        }
        total += det_in_place(&mut m[..d * d], d).abs();
    }
    total / factorial(d)
}

/// Missing volume `|K| - |conv(points)|` of the sample `points` drawn from `body`.
///
/// A hull of measure zero leaves the whole body missing.
pub fn missing_volume(body: &ConvexBody, points: &PointCloud) -> Result<f64> {
    if points.dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), found: points.dim() });
    }
    for p in points.iter() {
        if !body.contains(p)? {
            return Err(Error::SampleNotInBody);
        }
    }
    let total = body.volume();
    match convex_hull(points) {
        Ok(h) => Ok((total - polytope_volume(&h)).clamp(0.0, total)),
        Err(Error::DegenerateHull) => Ok(total),
        Err(e) => Err(e),
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        // partial_cmp treats -0.0 and 0.0 as equal, matching real order.
        match x.partial_cmp(y).expect("finite coordinates") {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

struct Builder<'a> {
    d: usize,
    pts: &'a PointCloud,
    order: Vec<u32>,
    verts: Vec<u32>,
    nbrs: Vec<u32>,
    alive: Vec<bool>,
    free: Vec<u32>,
    stamp: Vec<u32>,
    seen_visible: Vec<bool>,
    epoch: u32,
    initial: Vec<u32>,
    stack: Vec<u32>,
    visible: Vec<u32>,
    horizon: Vec<(u32, u32, u32)>,
    cone: Vec<u32>,
    ridges: Vec<([u32; RIDGE_KEY], u32, u32)>,
}

impl<'a> Builder<'a> {
    fn new(pts: &'a PointCloud) -> Self {
        let n = pts.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            lex_cmp(pts.get(a as usize), pts.get(b as usize)).then(a.cmp(&b))
        });
        order.dedup_by(|a, b| lex_cmp(pts.get(*a as usize), pts.get(*b as usize)) == Ordering::Equal);
        Builder {
            d: pts.dim(),
            pts,
            order,
            verts: Vec::new(),
            nbrs: Vec::new(),
            alive: Vec::new(),
            free: Vec::new(),
            stamp: Vec::new(),
            seen_visible: Vec::new(),
            epoch: 0,
            initial: Vec::new(),
            stack: Vec::new(),
            visible: Vec::new(),
            horizon: Vec::new(),
            cone: Vec::new(),
            ridges: Vec::new(),
        }
    }

    #[inline]
    fn point(&self, i: u32) -> &'a [f64] {
        self.pts.get(i as usize)
    }

    fn orient_verts(&self, vs: &[u32], q: &[f64]) -> i8 {
        let mut s: [&[f64]; MAX_HULL_DIM] = [&[]; MAX_HULL_DIM];
        for (k, &v) in vs.iter().enumerate() {
            s[k] = self.point(v);
        }
        predicates::orient(&s[..self.d], q)
    }

    #[inline]
    fn orient_facet(&self, f: u32, q: &[f64]) -> i8 {
        let base = f as usize * self.d;
        self.orient_verts(&self.verts[base..base + self.d], q)
    }

    fn alloc_facet(&mut self) -> u32 {
        if let Some(f) = self.free.pop() {
            self.alive[f as usize] = true;
            return f;
        }
        let id = self.alive.len() as u32;
        self.verts.extend(core::iter::repeat_n(NONE, self.d));
        self.nbrs.extend(core::iter::repeat_n(NONE, self.d));
        self.alive.push(true);
        self.stamp.push(0);
        self.seen_visible.push(false);
        id
    }

    /// Whether `q` raises the affine rank of `chosen`.
    fn independent(&self, chosen: &[u32], q: u32) -> bool {
        let k = chosen.len();
        let d = self.d;
        let mut rows: [&[f64]; MAX_HULL_DIM + 1] = [&[]; MAX_HULL_DIM + 1];
        for (i, &c) in chosen.iter().enumerate() {
            rows[i] = self.point(c);
        }
        rows[k] = self.point(q);
        if k == d {
            return predicates::orient(&rows[..d], rows[d]) != 0;
        }
        let mut axes = [0usize; MAX_HULL_DIM];
        for mask in 1u32..(1 << d) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let mut n = 0;
            for (ax, slot) in (0..d).filter(|&ax| mask & (1 << ax) != 0).zip(axes.iter_mut()) {
                *slot = ax;
                n += 1;
            }
            debug_assert_eq!(n, k);
            if predicates::orient_projected(&rows[..=k], &axes[..k]) != 0 {
                return true;
            }
        }
        false
    }

    fn run(&mut self) -> Result<()> {
        let d = self.d;
        let order = core::mem::take(&mut self.order);
        let mut chosen: Vec<u32> = vec![order[0]];
        let mut skipped: Vec<u32> = Vec::new();
        let mut pos = 1;
        while chosen.len() < d + 1 && pos < order.len() {
            let q = order[pos];
            if self.independent(&chosen, q) {
                chosen.push(q);
            } else {
                skipped.push(q);
            }
            pos += 1;
        }
        if chosen.len() < d + 1 {
            self.order = order;
            return Err(Error::DegenerateHull);
        }
        self.build_simplex(&chosen);

        // Points passed over while growing the simplex are not lexicographic
        // maxima, so their visible facets are located by a scan.
        let mut need_scan = !skipped.is_empty();
        for &q in &skipped {
            self.insert_scanning(q);
        }
        for &q in &order[pos..] {
            if need_scan {
                self.insert_scanning(q);
                need_scan = false;
            } else {
                self.insert_lexmax(q);
            }
        }
        self.order = order;
        self.initial = chosen;
        Ok(())
    }

    fn build_simplex(&mut self, chosen: &[u32]) {
        let d = self.d;
        let ids: Vec<u32> = (0..=d).map(|_| self.alloc_facet()).collect();
        for j in 0..=d {
            let mut vs: Vec<u32> = chosen.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &c)| c).collect();
            let s = self.orient_verts(&vs, self.point(chosen[j]));
            debug_assert!(s != 0);
            if s > 0 {
                vs.swap(0, 1);
            }
            let base = ids[j] as usize * d;
            self.verts[base..base + d].copy_from_slice(&vs);
        }
        for j in 0..=d {
            let base = ids[j] as usize * d;
            for s in 0..d {
                let v = self.verts[base + s];
                let k = chosen.iter().position(|&c| c == v).expect("simplex vertex");
                self.nbrs[base + s] = ids[k];
            }
        }
        self.cone.clear();
        self.cone.extend(ids.iter().enumerate().filter(|&(j, _)| j != d).map(|(_, &f)| f));
    }

    fn insert_scanning(&mut self, q: u32) {
        let p = self.point(q);
        let start = (0..self.alive.len() as u32).find(|&f| self.alive[f as usize] && self.orient_facet(f, p) > 0);
        if let Some(f) = start {
            self.insert(q, f);
        }
    }

    fn insert_lexmax(&mut self, q: u32) {
        let p = self.point(q);
        let start = self.cone.iter().copied().find(|&f| self.orient_facet(f, p) > 0);
        match start {
            Some(f) => self.insert(q, f),
            None => self.insert_scanning(q),
        }
    }

    fn insert(&mut self, q: u32, start: u32) {
        let d = self.d;
        let p = self.point(q);
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        self.visible.clear();
        self.horizon.clear();
        self.stack.clear();
        self.stack.push(start);
        self.stamp[start as usize] = epoch;
        self.seen_visible[start as usize] = true;
        while let Some(f) = self.stack.pop() {
            self.visible.push(f);
            for i in 0..d {
                let g = self.nbrs[f as usize * d + i];
                let gi = g as usize;
                if self.stamp[gi] == epoch {
                    if !self.seen_visible[gi] {
                        self.horizon.push((f, i as u32, g));
                    }
                    continue;
                }
                self.stamp[gi] = epoch;
                if self.orient_facet(g, p) >= 0 {
                    self.seen_visible[gi] = true;
                    self.stack.push(g);
                } else {
                    self.seen_visible[gi] = false;
                    self.horizon.push((f, i as u32, g));
                }
            }
        }

        self.cone.clear();
        self.ridges.clear();
        let horizon = core::mem::take(&mut self.horizon);
        for &(f, i, g) in &horizon {
            let (f, i, g) = (f as usize, i as usize, g as usize);
            let mut vs = [NONE; MAX_HULL_DIM];
            vs[..d].copy_from_slice(&self.verts[f * d..f * d + d]);
            vs[i] = q;
            let k = (0..d).find(|&k| self.nbrs[g * d + k] == f as u32).expect("adjacency is symmetric");
            let inside = self.point(self.verts[g * d + k]);
            let mut qpos = i;
            let s = self.orient_verts(&vs[..d], inside);
            debug_assert!(s != 0, "horizon neighbour lies on the new facet hyperplane");
            if s > 0 {
                vs.swap(0, 1);
                qpos = match qpos {
                    0 => 1,
                    1 => 0,
                    other => other,
                };
            }
            let nf = self.alloc_facet() as usize;
            self.verts[nf * d..nf * d + d].copy_from_slice(&vs[..d]);
            self.nbrs[nf * d + qpos] = g as u32;
            self.nbrs[g * d + k] = nf as u32;
            self.cone.push(nf as u32);
            for j in (0..d).filter(|&j| j != qpos) {
                let mut key = [NONE; RIDGE_KEY];
                let mut n = 0;
                for (t, &v) in vs[..d].iter().enumerate() {
                    if t != j && t != qpos {
                        key[n] = v;
                        n += 1;
                    }
                }
                key[..n].sort_unstable();
                self.ridges.push((key, nf as u32, j as u32));
            }
        }
        self.horizon = horizon;

        self.ridges.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        assert!(self.ridges.len() % 2 == 0, "unpaired horizon ridge");
        for pair in self.ridges.chunks_exact(2) {
            let (ka, fa, ja) = pair[0];
            let (kb, fb, jb) = pair[1];
            assert_eq!(ka, kb, "horizon ridges must pair up");
            self.nbrs[fa as usize * d + ja as usize] = fb;
            self.nbrs[fb as usize * d + jb as usize] = fa;
        }
        for &f in &self.visible {
            self.alive[f as usize] = false;
            self.free.push(f);
        }
    }

    fn finish(self) -> HullResult {
        let d = self.d;
        let n = self.pts.len();
        let mut used = vec![false; n];
        let live: Vec<usize> = (0..self.alive.len()).filter(|&f| self.alive[f]).collect();
        for &f in &live {
            for &v in &self.verts[f * d..f * d + d] {
                used[v as usize] = true;
            }
        }
        let mut index_of = vec![usize::MAX; n];
        let mut vertices = PointCloud::new(d);
        let mut source = Vec::new();
        for &i in &self.order {
            if used[i as usize] {
                index_of[i as usize] = source.len();
                source.push(i as usize);
                vertices.push(self.pts.get(i as usize)).expect("dimension checked");
            }
        }
        let mut interior = vec![0.0; d];
        for &c in &self.initial {
            for (acc, x) in interior.iter_mut().zip(self.pts.get(c as usize)) {
                *acc += x;
            }
        }
        interior.iter_mut().for_each(|x| *x /= (d + 1) as f64);

        let facets = live
            .iter()
            .map(|&f| {
                let vs: Vec<usize> = self.verts[f * d..f * d + d].iter().map(|&v| index_of[v as usize]).collect();
                let (normal, offset) = facet_plane(&vertices, &vs, &interior);
                Facet { vertices: vs, normal, offset }
            })
            .collect();
        HullResult { vertices, source, facets, interior }
    }
}

/// Outward unit normal and offset of the hyperplane through the given vertices.
fn facet_plane(vertices: &PointCloud, vs: &[usize], interior: &[f64]) -> (Vec<f64>, f64) {
    let d = vertices.dim();
    let v0 = vertices.get(vs[0]);
    let mut rows = [0.0f64; MAX_HULL_DIM * MAX_HULL_DIM];
    for (r, &v) in vs[1..].iter().enumerate() {
        let p = vertices.get(v);
        for k in 0..d {
            rows[r * d + k] = p[k] - v0[k];
        }
    }
    let mut normal = vec![0.0; d];
    let mut minor = [0.0f64; MAX_HULL_DIM * MAX_HULL_DIM];
    for (j, nj) in normal.iter_mut().enumerate() {
        let m = d - 1;
        for r in 0..m {
            let mut c = 0;
            for k in (0..d).filter(|&k| k != j) {
                minor[r * m + c] = rows[r * d + k];
                c += 1;
            }
        }
        let det = if m == 0 { 1.0 } else { det_in_place(&mut minor[..m * m], m) };
        *nj = if j % 2 == 0 { det } else { -det };
    }
    let len = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    normal.iter_mut().for_each(|x| *x /= len);
    let toward_inside: f64 = normal.iter().zip(interior.iter().zip(v0)).map(|(n, (c, v))| n * (c - v)).sum();
    if toward_inside > 0.0 {
        normal.iter_mut().for_each(|x| *x = -*x);
    }
    let offset = normal.iter().zip(v0).map(|(n, v)| n * v).sum();
    (normal, offset)
}
