//! Command line: argument parsing, run configurations and output rendering.
//!
//! Every command is turned into a [`RunConfig`] first. The config (without
//! the worker count and output directory) is embedded in the header of the
//! produced file, and [`execute`] is a pure function of it, so `replay`
//! regenerates any output byte for byte.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use randpoly_core::sampler::ALGORITHM_ID;
use randpoly_core::{ellipsoid, metrics};

use crate::error::{AppError, AppResult};
use crate::experiments::{self, MomentRow, MomentTable, RateModel};
use crate::io::{self, BodySpec, Metadata};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "RANDPOLY_OUT";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "randpoly", version, about = "Random polytopes in convex bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory (default: $RANDPOLY_OUT, else standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; never changes the output.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BodyArgs {
    /// Builtin body (disc, ball3, square, cube3, triangle, simplex3,
    /// ellipse(a,b), ball, cube, simplex) or a body JSON file.
    #[arg(long, default_value = "disc")]
    pub body: String,
    /// Dimension for the ball, cube and simplex builtins.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub body: BodyArgs,
    /// Sample sizes: a list `32,64`, a geometric range `32:4096:x2` or an
    /// arithmetic range `100:1000:+100`.
    #[arg(long, default_value = "100")]
    pub n: String,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants of the deviation bound in dimension `--dim`.
    Constants {
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Relative missing volumes, one row per replicate.
    Simulate(SimArgs),
    /// Survival curves of the scaled missing volume.
    Tail {
        #[command(flatten)]
        sim: SimArgs,
        /// Number of grid points.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Moments of the relative missing volume over a grid of sample sizes.
    Moments {
        #[command(flatten)]
        sim: SimArgs,
        /// Moment orders, comma separated.
        #[arg(long, default_value = "1")]
        q: String,
    },
    /// Rate fits of a moments file.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// `power` or `power-log`.
        #[arg(long, default_value = "power")]
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Greedy Hausdorff packings of random polygons in the disc.
    Packing {
        #[arg(long, default_value = "0.2,0.1,0.05,0.025")]
        deltas: String,
        #[arg(long, default_value_t = 100_000)]
        pool: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Support directions per body.
        #[arg(long, default_value_t = 256)]
        directions: usize,
        #[command(flatten)]
        common: Common,
    },
    /// The affine map sending the enclosing ellipsoid of a body to the unit ball.
    Normalize {
        #[command(flatten)]
        body: BodyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerates an output file from its embedded metadata.
    Replay {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Everything an output depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<BodySpec>,
    pub dim: usize,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub reps: usize,
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: usize,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub pool: usize,
    #[serde(default)]
    pub directions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<RateModel>,
    #[serde(skip)]
    pub workers: usize,
}

impl RunConfig {
    fn empty(command: &str, dim: usize) -> Self {
        RunConfig {
            command: command.to_string(),
            body_id: None,
            body: None,
            dim,
            n: Vec::new(),
            reps: 0,
            q: Vec::new(),
            seed: 0,
            grid: 0,
            deltas: Vec::new(),
            pool: 0,
            directions: 0,
            model: None,
            workers: 1,
        }
    }

    fn metadata(&self) -> Metadata {
        let mut m = Metadata::default();
        m.push("randpoly", VERSION);
        m.push("algorithm_id", ALGORITHM_ID);
        m.push("seed", self.seed.to_string());
        m.push("grid", self.grid_label());
        m.push("config", serde_json::to_string(self).expect("config serializes"));
        m
    }

    fn metadata_json(&self) -> serde_json::Value {
        json!({"randpoly": VERSION, "algorithm_id": ALGORITHM_ID, "seed": self.seed, "grid": self.grid_label(), "config": self})
    }

    fn grid_label(&self) -> String {
        match self.command.as_str() {
            "tail" => format!("n={};x_points={}", join(&self.n), self.grid),
            "packing" => format!("delta={}", join(&self.deltas)),
            "constants" | "normalize" => "none".into(),
            _ => format!("n={}", join(&self.n)),
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        let usage = |msg: String| Err(AppError::Usage(msg));
        match self.command.as_str() {
            "constants" if !(2..=10).contains(&self.dim) => return usage(format!("--dim {} outside 2..=10", self.dim)),
            "simulate" | "tail" | "moments" | "fit" => {
                if self.n.is_empty() || self.n.contains(&0) {
                    return usage("--n needs positive sample sizes".into());
                }
                if self.reps == 0 {
                    return usage("--reps must be positive".into());
                }
                if self.body.is_none() {
                    return usage("a body is required".into());
                }
            }
            _ => {}
        }
        match self.command.as_str() {
            "tail" if self.n.len() != 1 => usage("tail takes a single --n".into()),
            "tail" if self.grid < 2 => usage("--grid must be at least 2".into()),
            "moments" | "fit" if self.q.is_empty() || self.q.iter().any(|&q| !(q > 0.0)) => {
                usage("--q needs positive orders".into())
            }
            "moments" | "fit" if self.n.windows(2).any(|w| w[1] <= w[0]) => usage("--n must increase".into()),
            "fit" if self.n.len() < 4 => usage("fits need at least four sample sizes".into()),
            "packing" if self.deltas.is_empty() || self.deltas.iter().any(|&d| !(d > 0.0)) => {
                usage("--deltas needs positive values".into())
            }
            "packing" if self.pool == 0 || self.directions < 4 => usage("--pool and --directions must be positive".into()),
            _ => Ok(()),
        }
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses `32,64`, `32:4096:x2` or `100:1000:+100`.
pub fn parse_grid(s: &str) -> AppResult<Vec<usize>> {
    let bad = || AppError::Usage(format!("cannot parse sample sizes {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [list] => list.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect(),
        [a, b, step] => {
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.parse().map_err(|_| bad())?;
            let mut out = Vec::new();
            let mut x = a;
            if let Some(f) = step.strip_prefix('x') {
                let f: usize = f.parse().map_err(|_| bad())?;
                if f < 2 || a == 0 {
                    return Err(bad());
                }
                while x <= b {
                    out.push(x);
                    x *= f;
                }
            } else if let Some(d) = step.strip_prefix('+') {
                let d: usize = d.parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                while x <= b {
                    out.push(x);
                    x += d;
                }
            } else {
                return Err(bad());
            }
            Ok(out)
        }
        _ => Err(bad()),
    }
}

pub fn parse_list(s: &str, what: &str) -> AppResult<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| AppError::Usage(format!("cannot parse {what} {s:?}"))))
        .collect()
}

fn sim_config(command: &str, sim: &SimArgs) -> AppResult<RunConfig> {
    let (id, spec) = io::resolve_body(&sim.body.body, sim.body.dim)?;
    let mut c = RunConfig::empty(command, spec.dim());
    c.body_id = Some(id);
    c.body = Some(spec);
    c.n = parse_grid(&sim.n)?;
    c.reps = sim.reps;
    c.seed = sim.seed;
    Ok(c)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn common_of(command: &Command) -> &Common {
    match command {
        Command::Constants { common, .. }
        | Command::Fit { common, .. }
        | Command::Packing { common, .. }
        | Command::Normalize { common, .. }
        | Command::Replay { common, .. } => common,
        Command::Simulate(sim) | Command::Tail { sim, .. } | Command::Moments { sim, .. } => &sim.common,
    }
}

/// Builds the run configuration of a parsed command line.
pub fn config_from(command: &Command) -> AppResult<RunConfig> {
    let mut c = match command {
        Command::Constants { dim, .. } => RunConfig::empty("constants", *dim),
        Command::Simulate(sim) => sim_config("simulate", sim)?,
        Command::Tail { sim, grid } => {
            let mut c = sim_config("tail", sim)?;
            c.grid = *grid;
            c
        }
        Command::Moments { sim, q } => {
            let mut c = sim_config("moments", sim)?;
            c.q = parse_list(q, "moment orders")?;
            c
        }
        Command::Fit { input, model, .. } => {
            let model: RateModel = model.parse().map_err(|_| AppError::Usage(format!("unknown --model {model:?}")))?;
            let mut c = read_config(input)?;
            if c.command != "moments" {
                return Err(AppError::Usage(format!("{}: not a moments file", input.display())));
            }
            c.command = "fit".into();
            c.model = Some(model);
            c
        }
        Command::Packing { deltas, pool, seed, directions, .. } => {
            let mut c = RunConfig::empty("packing", 2);
            c.deltas = parse_list(deltas, "deltas")?;
            c.pool = *pool;
            c.seed = *seed;
            c.directions = *directions;
            c
        }
        Command::Normalize { body, .. } => {
            let (id, spec) = io::resolve_body(&body.body, body.dim)?;
            let mut c = RunConfig::empty("normalize", spec.dim());
            c.body_id = Some(id);
            c.body = Some(spec);
            c
        }
        Command::Replay { input, .. } => read_config(input)?,
    };
    c.workers = common_of(command).workers.unwrap_or_else(default_workers);
    if c.workers == 0 {
        return Err(AppError::Usage("--workers must be positive".into()));
    }
    c.validate()?;
    Ok(c)
}

/// The run configuration embedded in an output file.
pub fn read_config(path: &Path) -> AppResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
    config_from_text(&text)
}

pub fn config_from_text(text: &str) -> AppResult<RunConfig> {
    let raw = if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| AppError::Format(e.to_string()))?;
        v.get("metadata").and_then(|m| m.get("config")).cloned()
    } else {
        Metadata::parse(text).get("config").map(|s| serde_json::from_str(s)).transpose().map_err(|e| AppError::Format(e.to_string()))?
    };
    let raw = raw.ok_or_else(|| AppError::Format("no embedded run configuration".into()))?;
    let mut c: RunConfig = serde_json::from_value(raw).map_err(|e| AppError::Format(e.to_string()))?;
    c.workers = 1;
    Ok(c)
}

/// A rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub file_name: String,
    pub contents: String,
}

#[derive(Serialize)]
struct SimRow<'a> {
    body_id: &'a str,
    d: usize,
    n: usize,
    rep: u64,
    v_rel: f64,
}

#[derive(Serialize)]
struct TailRow {
    curve: &'static str,
    x: f64,
    #[serde(rename = "S")]
    s: f64,
    ci_lo: f64,
    ci_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct MomentCsvRow {
    body_id: String,
    d: usize,
    n: usize,
    q: f64,
    moment: f64,
    se: f64,
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn body_of(c: &RunConfig) -> AppResult<(String, randpoly_core::ConvexBody)> {
    let spec = c.body.as_ref().ok_or_else(|| AppError::Usage("a body is required".into()))?;
    Ok((c.body_id.clone().unwrap_or_else(|| "body".into()), spec.to_body()?))
}

fn moments_of(c: &RunConfig) -> AppResult<MomentTable> {
    let (id, body) = body_of(c)?;
    Ok(experiments::moment_table(&id, &body, &c.q, &c.n, c.reps, c.seed, c.workers)?)
}

/// Runs a validated configuration and renders its output file.
pub fn execute(c: &RunConfig) -> AppResult<Output> {
    c.validate()?;
    let (file_name, contents) = match c.command.as_str() {
        "constants" => {
            let t = metrics::constants(c.dim)?;
            let v = json!({
                "metadata": c.metadata_json(),
                "d": t.d,
                "beta_d": t.beta_d,
                "L": t.l,
                "alpha1": t.alpha1,
                "alpha2": t.alpha2,
                "alpha3": t.alpha3,
                "C2": t.c2,
            });
            ("constants.json", pretty(&v))
        }
        "simulate" => {
            let (id, body) = body_of(c)?;
            let mut rows = Vec::new();
            for &n in &c.n {
                rows.extend(experiments::run_missing_volume(&id, &body, n, c.reps, c.seed, c.workers)?);
            }
            let csv_rows: Vec<SimRow> =
                rows.iter().map(|r| SimRow { body_id: &r.body_id, d: r.d, n: r.n, rep: r.rep, v_rel: r.v_rel }).collect();
            ("simulate.csv", io::write_csv(&c.metadata(), &csv_rows)?)
        }
        "tail" => {
            let (_, body) = body_of(c)?;
            let n = c.n[0];
            let v = experiments::relative_missing_volumes(&body, n, c.reps, c.seed, c.workers)?;
            let curve = experiments::tail_curve(&v, body.dim(), n, c.grid)?;
            let mut meta = c.metadata();
            meta.push("shift", curve.shift.to_string());
            meta.push("decay", serde_json::to_string(&curve.decay).expect("json"));
            let mut rows = Vec::new();
            for (name, pts) in [("shifted", &curve.shifted), ("unshifted", &curve.unshifted)] {
                rows.extend(pts.iter().map(|p| TailRow { curve: name, x: p.x, s: p.s, ci_lo: p.ci_lo, ci_hi: p.ci_hi }));
            }
            ("tail.csv", io::write_csv(&meta, &rows)?)
        }
        "moments" => {
            let t = moments_of(c)?;
            let rows: Vec<MomentCsvRow> = t
                .rows
                .iter()
                .map(|r| MomentCsvRow { body_id: t.body_id.clone(), d: t.d, n: r.n, q: r.q, moment: r.moment, se: r.se })
                .collect();
            ("moments.csv", io::write_csv(&c.metadata(), &rows)?)
        }
        "fit" => return fit_output(c, &moments_of(c)?),
        "packing" => {
            let r = experiments::packing_number(&c.deltas, c.pool, c.seed, c.directions, c.workers)?;
            let mut meta = c.metadata();
            meta.push("fit", json!({"slope": r.slope, "intercept": r.intercept, "r2": r.r2}).to_string());
            ("packing.csv", io::write_csv(&meta, &r.rows)?)
        }
        "normalize" => {
            let (_, body) = body_of(c)?;
            let cert = ellipsoid::enclosing_ellipsoid(&body, ellipsoid::DEFAULT_TOL)?;
            let (t, image) = ellipsoid::normalize(&body)?;
            let lin = t.linear();
            let rows: Vec<Vec<f64>> = (0..lin.nrows()).map(|i| (0..lin.ncols()).map(|j| lin[(i, j)]).collect()).collect();
            let e = &cert.ellipsoid;
            let shape = e.shape();
            let shape_rows: Vec<Vec<f64>> =
                (0..shape.nrows()).map(|i| (0..shape.ncols()).map(|j| shape[(i, j)]).collect()).collect();
            let v = json!({
                "metadata": c.metadata_json(),
                "linear": rows,
                "offset": t.offset(),
                "det": t.det(),
                "ellipsoid": {"center": e.center(), "shape": shape_rows},
                "ratio": cert.ratio,
                "iterations": cert.iterations,
                "normalized": BodySpec::from_body(&image),
            });
            ("normalize.json", pretty(&v))
        }
        other => return Err(AppError::Usage(format!("cannot run command {other:?}"))),
    };
    Ok(Output { file_name: file_name.to_string(), contents })
}

/// Rate fits of an existing moment table, rendered as `fit.json`.
pub fn fit_output(c: &RunConfig, table: &MomentTable) -> AppResult<Output> {
    let fits = experiments::rate_fit(table, c.model.unwrap_or(RateModel::Power))?;
    Ok(Output {
        file_name: "fit.json".into(),
        contents: pretty(&json!({"metadata": c.metadata_json(), "fits": fits})),
    })
}

/// Reads a moments CSV into a table.
pub fn read_moments(text: &str) -> AppResult<MomentTable> {
    let (_, rows): (Metadata, Vec<MomentCsvRow>) = io::read_csv(text)?;
    let first = rows.first().ok_or_else(|| AppError::Format("empty moments file".into()))?;
    Ok(MomentTable {
        body_id: first.body_id.clone(),
        d: first.d,
        rows: rows.iter().map(|r| MomentRow { n: r.n, q: r.q, moment: r.moment, se: r.se }).collect(),
    })
}

/// Output directory from `--out`, else the environment.
pub fn output_dir(common: Option<&Path>) -> Option<PathBuf> {
    common.map(Path::to_path_buf).or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Parses, runs and emits. Returns the path written, if any.
pub fn run(cli: &Cli) -> AppResult<Option<PathBuf>> {
    let config = config_from(&cli.command)?;
    let out = match &cli.command {
        Command::Fit { input, .. } => {
            let text = std::fs::read_to_string(input)?;
            fit_output(&config, &read_moments(&text)?)?
        }
        _ => execute(&config)?,
    };
    match output_dir(common_of(&cli.command).out.as_deref()) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(&out.file_name);
            std::fs::write(&path, out.contents)?;
            Ok(Some(path))
        }
        None => {
            print!("{}", out.contents);
            Ok(None)
        }
    }
}
