//! Monte Carlo experiments on the missing volume of random polytopes.
//!
//! Replicate `i` of every experiment draws from stream `i` of the master
//! seed, and results are collected in replicate order, so outputs do not
//! depend on the number of worker threads.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use randpoly_core::metrics::{self, DirectionNet};
use randpoly_core::sampler::{make_stream, UniformSampler};
use randpoly_core::stats::{self, linear_fit, wilson, Z95};
use randpoly_core::{missing_volume, AffineMap, ConvexBody, ConvexPolygon, Error, PointCloud, Result};

/// Direction count used for Hausdorff distances between random polygons.
pub const POLYGON_DIRECTIONS: usize = 1 << 12;

/// Mean size of the point sets whose hulls form random test bodies.
pub const RANDOM_BODY_POINTS: f64 = 20.0;

/// One replicate: the relative missing volume of the hull of `n` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub body_id: String,
    pub d: usize,
    pub n: usize,
    pub rep: u64,
    pub seed: u64,
    pub v_rel: f64,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// `v_rel = V_n / |K|` for replicates `0..reps`.
pub fn relative_missing_volumes(body: &ConvexBody, n: usize, reps: usize, seed: u64, workers: usize) -> Result<Vec<f64>> {
    if n == 0 || reps == 0 {
        return Err(Error::InvalidArgument("n and reps must be positive".into()));
    }
    let sampler = UniformSampler::new(body)?;
    let volume = body.volume();
    thread_pool(workers)?.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let mut stream = make_stream(seed, rep);
                let pts = sampler.sample(n, &mut stream).points;
                Ok(missing_volume(body, &pts)? / volume)
            })
            .collect()
    })
}

pub fn run_missing_volume(
    body_id: &str,
    body: &ConvexBody,
    n: usize,
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<ReplicateRecord>> {
    let v = relative_missing_volumes(body, n, reps, seed, workers)?;
    Ok(v
        .into_iter()
        .enumerate()
        .map(|(rep, v_rel)| ReplicateRecord { body_id: body_id.to_string(), d: body.dim(), n, rep: rep as u64, seed, v_rel })
        .collect())
}

/// One grid point of a survival curve with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub x: f64,
    pub s: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Least-squares fit of `log S(x) = a - rate x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r2: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub d: usize,
    pub n: usize,
    pub reps: usize,
    /// `C₂ n^{-2/(d+1)}`, subtracted from `v_rel` in the shifted curve.
    pub shift: f64,
    /// Survival of `n (v_rel - shift)`.
    pub shifted: Vec<SurvivalPoint>,
    /// Survival of `n v_rel`.
    pub unshifted: Vec<SurvivalPoint>,
    /// Exponential decay of the unshifted tail beyond its median; `None`
    /// when too few replicates reach the tail.
    pub decay: Option<DecayFit>,
}

/// Replicates required in the tail for a survival value to enter the decay fit.
pub const TAIL_MIN_COUNT: usize = 50;

const DECAY_POINTS: usize = 32;

fn survival(sorted: &[f64], x: f64) -> SurvivalPoint {
    let reps = sorted.len() as u64;
    let above = sorted.len() - sorted.partition_point(|&y| y <= x);
    let (ci_lo, ci_hi) = wilson(above as u64, reps, Z95);
    SurvivalPoint { x, s: above as f64 / reps as f64, ci_lo, ci_hi }
}

/// Empirical survival curves of the scaled missing volume on a grid of
/// `grid_points` values spanning `[0, max n v_rel]`.
pub fn tail_curve(v_rel: &[f64], d: usize, n: usize, grid_points: usize) -> Result<TailCurve> {
    if v_rel.is_empty() || grid_points < 2 {
        return Err(Error::InvalidArgument("need replicates and at least two grid points".into()));
    }
    let c2 = metrics::constants(d)?.c2;
    let nf = n as f64;
    let shift = c2 * nf.powf(-2.0 / (d as f64 + 1.0));
    let mut raw: Vec<f64> = v_rel.iter().map(|v| nf * v).collect();
    raw.sort_by(f64::total_cmp);
    let mut shifted: Vec<f64> = v_rel.iter().map(|v| nf * (v - shift)).collect();
    shifted.sort_by(f64::total_cmp);
    let top = raw[raw.len() - 1];
    let grid: Vec<f64> = (0..grid_points).map(|k| top * k as f64 / (grid_points - 1) as f64).collect();
    let decay = decay_fit(&raw)?;
    Ok(TailCurve {
        d,
        n,
        reps: v_rel.len(),
        shift,
        shifted: grid.iter().map(|&x| survival(&shifted, x)).collect(),
        unshifted: grid.iter().map(|&x| survival(&raw, x)).collect(),
        decay,
    })
}

/// Fits `log S` linearly between the median and the point where only
/// [`TAIL_MIN_COUNT`] replicates remain above.
fn decay_fit(sorted: &[f64]) -> Result<Option<DecayFit>> {
    let reps = sorted.len();
    if reps < 4 * TAIL_MIN_COUNT {
        return Ok(None);
    }
    let x_lo = sorted[reps / 2];
    let x_hi = sorted[reps - TAIL_MIN_COUNT - 1];
    if !(x_hi > x_lo) {
        return Ok(None);
    }
    let mut xs = Vec::with_capacity(DECAY_POINTS);
    let mut ys = Vec::with_capacity(DECAY_POINTS);
    for k in 0..DECAY_POINTS {
        let x = x_lo + (x_hi - x_lo) * k as f64 / (DECAY_POINTS - 1) as f64;
        let p = survival(sorted, x);
        if p.s > 0.0 {
            xs.push(x);
            ys.push(p.s.ln());
        }
    }
    if xs.len() < 3 {
        return Ok(None);
    }
    let f = linear_fit(&xs, &ys)?;
    Ok(Some(DecayFit { rate: -f.slope, r2: f.r2, x_lo, x_hi }))
}

impl TailCurve {
    /// Grid points where even the lower Wilson bound of the shifted survival
    /// exceeds `min(1, c e^{-x/β_d})`.
    pub fn envelope_violations(&self, c: f64) -> Result<Vec<f64>> {
        let beta = metrics::constants(self.d)?.beta_d;
        Ok(self
            .shifted
            .iter()
            .filter(|p| p.ci_lo > (c * (-p.x / beta).exp()).min(1.0))
            .map(|p| p.x)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub q: f64,
    pub moment: f64,
    pub se: f64,
}

/// Estimates of `E[v_rel^q]` over a grid of sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub body_id: String,
    pub d: usize,
    pub rows: Vec<MomentRow>,
}

impl MomentTable {
    pub fn qs(&self) -> Vec<f64> {
        let mut qs: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !qs.contains(&r.q) {
                qs.push(r.q);
            }
        }
        qs
    }

    pub fn series(&self, q: f64) -> Vec<MomentRow> {
        self.rows.iter().filter(|r| r.q == q).copied().collect()
    }
}

/// Moment estimates from one replicate pool per `n`, shared across `q`.
pub fn moment_table(
    body_id: &str,
    body: &ConvexBody,
    qs: &[f64],
    ns: &[usize],
    reps: usize,
    seed: u64,
    workers: usize,
) -> Result<MomentTable> {
    if qs.iter().any(|&q| !(q > 0.0)) {
        return Err(Error::InvalidArgument("moment orders must be positive".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("sample sizes must increase".into()));
    }
    let mut rows = Vec::with_capacity(qs.len() * ns.len());
    for &n in ns {
        let v = relative_missing_volumes(body, n, reps, seed, workers)?;
        for &q in qs {
            let powered: Vec<f64> = v.iter().map(|x| x.powf(q)).collect();
            let (moment, se) = stats::mean_se(&powered);
            rows.push(MomentRow { n, q, moment, se });
        }
    }
    Ok(MomentTable { body_id: body_id.to_string(), d: body.dim(), rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModel {
    /// `log E` against `log n`.
    Power,
    /// `log E` against `log((ln n)^{d-1} / n)`.
    PowerLog,
}

impl std::str::FromStr for RateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(RateModel::Power),
            "power-log" => Ok(RateModel::PowerLog),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: RateModel,
    pub q: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residual_sd: f64,
    /// Power-log model only: `C` in `E = C ((ln n)^{d-1} / n)^q` with the
    /// exponent held fixed.
    pub constant: Option<f64>,
}

/// One least-squares fit per moment order in the table.
pub fn rate_fit(table: &MomentTable, model: RateModel) -> Result<Vec<FitResult>> {
    table.qs().into_iter().map(|q| fit_series(&table.series(q), table.d, q, model)).collect()
}

fn fit_series(rows: &[MomentRow], d: usize, q: f64, model: RateModel) -> Result<FitResult> {
    if rows.len() < 4 {
        return Err(Error::InvalidArgument("rate fits need at least four grid points".into()));
    }
    if rows.iter().any(|r| !(r.moment > 0.0)) {
        return Err(Error::InvalidArgument("nonpositive moment estimate".into()));
    }
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| {
            let n = r.n as f64;
            match model {
                RateModel::Power => n.ln(),
                RateModel::PowerLog => (d as f64 - 1.0) * n.ln().ln() - n.ln(),
            }
        })
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.moment.ln()).collect();
    let f = linear_fit(&xs, &ys)?;
    let constant = match model {
        RateModel::Power => None,
        RateModel::PowerLog => {
            let mean = xs.iter().zip(&ys).map(|(x, y)| y - q * x).sum::<f64>() / xs.len() as f64;
            Some(mean.exp())
        }
    };
    Ok(FitResult {
        model,
        q,
        slope: f.slope,
        slope_se: f.slope_se,
        intercept: f.intercept,
        r2: f.r2,
        residual_sd: f.residual_sd,
        constant,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub d: usize,
    pub q: f64,
    pub fit: FitResult,
    /// `n^{2q/(d+1)} E[v_rel^q]` over the grid.
    pub scaled: Vec<(usize, f64)>,
    /// Minimum of the scaled moments over the top half of the grid.
    pub a_q: f64,
}

/// Scaled moments of the unit ball, whose minimum over the larger half of
/// the grid estimates the lower-bound constant.
pub fn lower_bound_check(d: usize, q: f64, ns: &[usize], reps: usize, seed: u64, workers: usize) -> Result<LowerBound> {
    let ball = ConvexBody::unit_ball(d)?;
    let table = moment_table("ball", &ball, &[q], ns, reps, seed, workers)?;
    let fit = fit_series(&table.rows, d, q, RateModel::Power)?;
    let expo = 2.0 * q / (d as f64 + 1.0);
    let scaled: Vec<(usize, f64)> = table.rows.iter().map(|r| (r.n, (r.n as f64).powf(expo) * r.moment)).collect();
    let a_q = scaled[scaled.len() / 2..].iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    Ok(LowerBound { d, q, fit, scaled, a_q })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS comparison of `v_rel` drawn from two bodies.
pub fn compare_bodies(
    a: &ConvexBody,
    b: &ConvexBody,
    n: usize,
    reps: usize,
    seeds: (u64, u64),
    workers: usize,
) -> Result<KsResult> {
    let va = relative_missing_volumes(a, n, reps, seeds.0, workers)?;
    let vb = relative_missing_volumes(b, n, reps, seeds.1, workers)?;
    let (statistic, p_value) = stats::ks_two_sample(&va, &vb);
    Ok(KsResult { statistic, p_value })
}

/// KS comparison of `v_rel` from `K` and from `T(K)`.
pub fn affine_invariance_test(
    body: &ConvexBody,
    t: &AffineMap,
    n: usize,
    reps: usize,
    seeds: (u64, u64),
    workers: usize,
) -> Result<KsResult> {
    compare_bodies(body, &body.affine_image(t)?, n, reps, seeds, workers)
}

/// Random convex polygon in the unit disc: the hull of a Poisson-sized
/// uniform sample, scaled to touch the circle with probability 1/2.
pub fn random_polygon<R: Rng + ?Sized>(rng: &mut R) -> ConvexPolygon {
    let disc = ConvexBody::unit_ball(2).expect("unit disc");
    let sampler = UniformSampler::new(&disc).expect("disc sampler");
    let poisson = Poisson::new(RANDOM_BODY_POINTS).expect("positive mean");
    loop {
        let k = poisson.sample(rng) as usize;
        if k < 3 {
            continue;
        }
        let pts = sampler.sample(k, rng).points;
        let Ok(poly) = ConvexPolygon::from_cloud(&pts) else { continue };
        if rng.random::<bool>() {
            let r = poly.vertices().iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
            let scaled: Vec<[f64; 2]> = poly.vertices().iter().map(|v| [v[0] / r, v[1] / r]).collect();
            if let Ok(p) = ConvexPolygon::new(scaled) {
                return p;
            }
            continue;
        }
        return poly;
    }
}

fn polygon_profile(p: &ConvexPolygon, net: &DirectionNet) -> Vec<f64> {
    net.directions().iter().map(|u| p.support(&[u[0], u[1]])).collect()
}

/// Hausdorff estimate and error bound between two polygons of the unit disc.
fn polygon_hausdorff(pa: &[f64], pb: &[f64], ra: f64, rb: f64, chord: f64) -> (f64, f64) {
    let est = pa.iter().zip(pb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (est, (ra + rb) * chord)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub pairs: usize,
    pub alpha1: f64,
    /// Largest `|G △ G'| / (estimate + error_bound)`.
    pub max_ratio: f64,
    /// Largest `|G △ G'| / estimate`, an upper bound for the true ratio.
    pub max_ratio_upper: f64,
}

/// Ratios of Nikodym to Hausdorff distance over random polygon pairs in the disc.
pub fn lemma2_check(pairs: usize, seed: u64, workers: usize) -> Result<Lemma2Report> {
    let alpha1 = metrics::constants(2)?.alpha1;
    let net = DirectionNet::new(2, POLYGON_DIRECTIONS, 0.0);
    let ratios: Vec<(f64, f64)> = thread_pool(workers)?.install(|| {
        (0..pairs as u64)
            .into_par_iter()
            .map(|k| {
                let g = random_polygon(&mut make_stream(seed, 2 * k));
                let h = random_polygon(&mut make_stream(seed, 2 * k + 1));
                let (pg, ph) = (polygon_profile(&g, &net), polygon_profile(&h, &net));
                // Both polygons lie in the unit disc, so radius 1 about the origin bounds each.
                let (est, err) = polygon_hausdorff(&pg, &ph, 1.0, 1.0, net.chord());
                let nik = metrics::nikodym_2d(&g, &h);
                (nik / (est + err), nik / est)
            })
            .collect()
    });
    let max_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_ratio_upper = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(Lemma2Report { pairs, alpha1, max_ratio, max_ratio_upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingRow {
    pub delta: f64,
    pub count: usize,
    /// Members accepted from the last tenth of the pool.
    pub late: usize,
    /// More than half of the last tenth of the pool was still accepted, so
    /// the count is limited by the pool rather than by `delta`.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub pool: usize,
    pub directions: usize,
    pub rows: Vec<PackingRow>,
    /// Fit of `ln N` against `delta^{-1/2}`.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Greedy `delta`-separated packings (in Hausdorff distance) of a pool of
/// random polygons in the disc, for each `delta`.
pub fn packing_number(deltas: &[f64], pool: usize, seed: u64, directions: usize, workers: usize) -> Result<PackingResult> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument("deltas must be positive".into()));
    }
    if pool == 0 {
        return Err(Error::InvalidArgument("pool must be nonempty".into()));
    }
    let phase = {
        let mut s = make_stream(seed, u64::MAX);
        s.random::<f64>() * std::f64::consts::TAU / directions.max(4) as f64
    };
    let net = DirectionNet::new(2, directions, phase);
    let m = net.len();
    let order = net.spread_order();
    // Profiles in spread order, so early exits look at well-separated directions first.
    let profiles: Vec<f32> = thread_pool(workers)?.install(|| {
        (0..pool as u64)
            .into_par_iter()
            .flat_map_iter(|i| {
                let p = random_polygon(&mut make_stream(seed, i));
                let prof = polygon_profile(&p, &net);
                order.iter().map(move |&k| prof[k] as f32).collect::<Vec<_>>()
            })
            .collect()
    });
    let body = |i: usize| &profiles[i * m..(i + 1) * m];
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let thr = delta as f32;
        let mut packed: Vec<usize> = Vec::new();
        let mut late = 0;
        for i in 0..pool {
            let cand = body(i);
            let separated = packed.iter().all(|&j| body(j).iter().zip(cand).any(|(a, b)| (a - b).abs() > thr));
            if separated {
                packed.push(i);
                if i >= pool - pool / 10 {
                    late += 1;
                }
            }
        }
        let count = packed.len();
        rows.push(PackingRow { delta, count, late, saturated: late * 20 > pool });
    }
    let (slope, intercept, r2) = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.delta.powf(-0.5)).collect();
        let ys: Vec<f64> = rows.iter().map(|r| (r.count as f64).ln()).collect();
        match linear_fit(&xs, &ys) {
            Ok(f) => (f.slope, f.intercept, f.r2),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        }
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(PackingResult { pool, directions: m, rows, slope, intercept, r2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub replicates: usize,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Checks `|K \ K_n| / |K| <= (d^d / β_d) |K' \ K'_n|` replicate by
/// replicate, where `K' = T(K)` is the normalized body and `K'_n` the image
/// of the same sample.
pub fn ellipsoid_chain_check(body: &ConvexBody, n: usize, reps: usize, seed: u64) -> Result<ChainCheck> {
    let d = body.dim();
    let (t, normalized) = randpoly_core::ellipsoid::normalize(body)?;
    let sampler = UniformSampler::new(body)?;
    let beta = metrics::constants(d)?.beta_d;
    let factor = (d as f64).powi(d as i32) / beta;
    let volume = body.volume();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for rep in 0..reps as u64 {
        let pts = sampler.sample(n, &mut make_stream(seed, rep)).points;
        let lhs = missing_volume(body, &pts)? / volume;
        let image: PointCloud = t.apply_cloud(&pts);
        let hull_volume = match randpoly_core::convex_hull(&image) {
            Ok(h) => h.volume(),
            Err(Error::DegenerateHull) => 0.0,
            Err(e) => return Err(e),
        };
        let rhs = factor * (normalized.volume() - hull_volume).max(0.0);
        if lhs > rhs * (1.0 + 1e-9) {
            violations += 1;
        }
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
    }
    Ok(ChainCheck { replicates: reps, violations, max_ratio })
}
