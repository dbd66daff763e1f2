//! Random polytopes in convex bodies.
//!
//! This crate holds the allocation-only (`no_std` + `alloc`) algorithmic core:
//! convex body representations, exact convex hulls and polytope volumes,
//! seed-deterministic uniform samplers, minimum-volume enclosing ellipsoids,
//! and the distance functionals (Hausdorff, Nikodym, Steiner) together with the
//! explicit constants of the missing-volume deviation bound.
//!
//! IO, parallel orchestration and the command line live in the `randpoly`
//! companion crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod bodies;
pub mod ellipsoid;
mod error;
pub mod hrep;
pub mod hull;
pub mod linalg;
pub mod metrics;
pub mod points;
pub mod polygon;
pub mod predicates;
pub mod sampler;
pub mod stats;

pub use bodies::{AffineMap, Aabb, ConvexBody, Ellipsoid};
pub use error::{Error, Result};
pub use hull::{convex_hull, missing_volume, polytope_volume, HullResult};
pub use metrics::{constants, hausdorff, nikodym_2d, ConstantsTable};
pub use points::PointCloud;
pub use polygon::ConvexPolygon;
pub use sampler::{make_stream, sample_uniform, RngStream, UniformSampler};

/// Largest ambient dimension supported by the hull and H/V conversions.
pub const MAX_HULL_DIM: usize = 6;
