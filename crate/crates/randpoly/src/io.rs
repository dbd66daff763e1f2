//! Body specification files, builtin bodies and CSV output with metadata headers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use randpoly_core::bodies::Ellipsoid;
use randpoly_core::linalg::Matrix;
use randpoly_core::{ConvexBody, PointCloud};

use crate::error::{AppError, AppResult};

/// JSON form of a body: `{"dim": d, "type": ..., fields}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodySpec {
    Ball { dim: usize, center: Vec<f64>, radius: f64 },
    Ellipsoid { dim: usize, center: Vec<f64>, shape: Vec<Vec<f64>> },
    Vpolytope { dim: usize, vertices: Vec<Vec<f64>> },
    Hpolytope { dim: usize, normals: Vec<Vec<f64>>, offsets: Vec<f64> },
}

fn check_rows(rows: &[Vec<f64>], dim: usize, what: &str) -> AppResult<()> {
    match rows.iter().find(|r| r.len() != dim) {
        Some(r) => Err(AppError::Format(format!("{what} row of length {} in a {dim}-dimensional body", r.len()))),
        None => Ok(()),
    }
}

impl BodySpec {
    pub fn dim(&self) -> usize {
        match self {
            BodySpec::Ball { dim, .. }
            | BodySpec::Ellipsoid { dim, .. }
            | BodySpec::Vpolytope { dim, .. }
            | BodySpec::Hpolytope { dim, .. } => *dim,
        }
    }

    pub fn to_body(&self) -> AppResult<ConvexBody> {
        let dim = self.dim();
        let body = match self {
            BodySpec::Ball { center, radius, .. } => {
                check_rows(std::slice::from_ref(center), dim, "center")?;
                ConvexBody::ball(center.clone(), *radius)?
            }
            BodySpec::Ellipsoid { center, shape, .. } => {
                check_rows(std::slice::from_ref(center), dim, "center")?;
                check_rows(shape, dim, "shape")?;
                if shape.len() != dim {
                    return Err(AppError::Format("shape matrix must be square".into()));
                }
                let m = Matrix::from_fn(dim, dim, |i, j| shape[i][j]);
                ConvexBody::ellipsoid(center.clone(), m)?
            }
            BodySpec::Vpolytope { vertices, .. } => {
                check_rows(vertices, dim, "vertex")?;
                ConvexBody::vpolytope(&PointCloud::from_rows(dim, vertices)?)?
            }
            BodySpec::Hpolytope { normals, offsets, .. } => {
                check_rows(normals, dim, "normal")?;
                ConvexBody::hpolytope(PointCloud::from_rows(dim, normals)?, offsets.clone())?
            }
        };
        Ok(body)
    }

    /// Canonical specification of a body. V-polytopes list their extreme
    /// points in lexicographic order.
    pub fn from_body(body: &ConvexBody) -> BodySpec {
        let dim = body.dim();
        match body {
            ConvexBody::Ball(b) => BodySpec::Ball { dim, center: b.center().to_vec(), radius: b.radius() },
            ConvexBody::Ellipsoid(e) => BodySpec::Ellipsoid { dim, center: e.center().to_vec(), shape: rows_of(e.shape()) },
            ConvexBody::VPolytope(p) => BodySpec::Vpolytope { dim, vertices: p.vertices().to_rows() },
            ConvexBody::HPolytope(h) => {
                BodySpec::Hpolytope { dim, normals: h.normals().to_rows(), offsets: h.offsets().to_vec() }
            }
        }
    }

    pub fn from_json(text: &str) -> AppResult<BodySpec> {
        serde_json::from_str(text).map_err(|e| AppError::Format(format!("body specification: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("body specification serializes")
    }
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Builtin body names accepted by `--body`.
pub const BUILTIN_BODIES: &[&str] =
    &["disc", "ball3", "square", "cube3", "triangle", "simplex3", "ellipse(a,b)", "ball", "cube", "simplex"];

fn parse_ellipse(name: &str) -> Option<(f64, f64)> {
    let args = name
        .strip_prefix("ellipse(")
        .and_then(|s| s.strip_suffix(')'))
        .or_else(|| name.strip_prefix("ellipse:"))?;
    let (a, b) = args.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Resolves a builtin body. `ball`, `cube` and `simplex` take their
/// dimension from `dim`; the others have fixed dimension.
pub fn builtin(name: &str, dim: usize) -> AppResult<Option<ConvexBody>> {
    let body = match name {
        "disc" => ConvexBody::unit_ball(2)?,
        "ball3" => ConvexBody::unit_ball(3)?,
        "square" => ConvexBody::cube(2, 0.0, 1.0)?,
        "cube3" => ConvexBody::cube(3, 0.0, 1.0)?,
        "triangle" => ConvexBody::standard_simplex(2)?,
        "simplex3" => ConvexBody::standard_simplex(3)?,
        "ball" => ConvexBody::unit_ball(dim)?,
        "cube" => ConvexBody::cube(dim, 0.0, 1.0)?,
        "simplex" => ConvexBody::standard_simplex(dim)?,
        _ => match parse_ellipse(name) {
            Some((a, b)) => ConvexBody::Ellipsoid(Ellipsoid::axis_aligned(vec![0.0, 0.0], &[a, b])?),
            None if name.starts_with("ellipse") => {
                return Err(AppError::Usage(format!("malformed ellipse {name:?}; use ellipse(a,b)")))
            }
            None => return Ok(None),
        },
    };
    Ok(Some(body))
}

/// A builtin name or a path to a body specification file.
pub fn resolve_body(arg: &str, dim: usize) -> AppResult<(String, BodySpec)> {
    if let Some(body) = builtin(arg, dim)? {
        let id = match arg {
            "ball" | "cube" | "simplex" => format!("{arg}{dim}"),
            _ => arg.to_string(),
        };
        return Ok((id, BodySpec::from_body(&body)));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|e| {
        AppError::Usage(format!("{arg}: not a builtin body ({}) and not readable: {e}", BUILTIN_BODIES.join(", ")))
    })?;
    let spec = BodySpec::from_json(&text)?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("body").to_string();
    Ok((id, spec))
}

/// Header lines starting with `#`, one `key: value` pair each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            writeln!(s, "# {k}: {v}").expect("string write");
        }
        s
    }

    /// Leading `# key: value` lines of a file.
    pub fn parse(text: &str) -> Metadata {
        let mut m = Metadata::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix("# ") else { break };
            if let Some((k, v)) = rest.split_once(": ") {
                m.push(k, v);
            }
        }
        m
    }
}

/// CSV text with a metadata header.
pub fn write_csv<R: Serialize>(meta: &Metadata, rows: &[R]) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| AppError::Format(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| AppError::Format(e.to_string()))?;
    let mut out = meta.render();
    out.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    Ok(out)
}

/// Rows of a CSV file with a metadata header.
pub fn read_csv<R: serde::de::DeserializeOwned>(text: &str) -> AppResult<(Metadata, Vec<R>)> {
    let meta = Metadata::parse(text);
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = r
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| AppError::Format(format!("csv: {e}")))?;
    Ok((meta, rows))
}
