use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A list of points of a common dimension stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        PointCloud { dim, coords: Vec::new() }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        PointCloud { dim, coords: Vec::with_capacity(dim * n) }
    }

    /// Wraps a flat coordinate buffer; its length must be a multiple of `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "buffer of length {} is not a multiple of dimension {}",
                coords.len(),
                dim
            )));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut cloud = PointCloud::with_capacity(dim, rows.len());
        for r in rows {
            cloud.push(r.as_ref())?;
        }
        Ok(cloud)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.coords.clear();
    }

    pub fn truncate(&mut self, n: usize) {
        self.coords.truncate(n * self.dim);
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    /// First `n` points as a new cloud.
    pub fn prefix(&self, n: usize) -> PointCloud {
        PointCloud { dim: self.dim, coords: self.coords[..n * self.dim].to_vec() }
    }
}
