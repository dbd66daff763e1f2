//! Experiments on random polytopes in convex bodies, with body files,
//! CSV/JSON outputs and the `randpoly` command line.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{AppError, AppResult};
pub use randpoly_core as core;
