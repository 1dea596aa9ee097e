//! Periodic grids over the spatial torus, 1 to 3 dimensions.
//!
//! Fields are flat `Vec<f64>` in row-major order (last axis fastest). All
//! stencil lookups wrap around the torus.

use crate::error::{CmcError, Result};

pub const MAX_DIM: usize = 3;

/// Uniform periodic grid on `prod_k [-b_k, b_k]` with `dims[k]` cells per
/// axis. Spacing along axis `k` is `2 b_k / dims[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    pub dims: Vec<usize>,
    pub periods: Vec<f64>,
    strides: Vec<usize>,
    spacing: Vec<f64>,
    len: usize,
}

impl PeriodicGrid {
    pub fn new(dims: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIM {
            return Err(CmcError::Argument(format!(
                "grid dimension must be 1..={MAX_DIM}, got {}",
                dims.len()
            )));
        }
        if dims.len() != periods.len() {
            return Err(CmcError::Argument(format!(
                "{} grid dims but {} periods",
                dims.len(),
                periods.len()
            )));
        }
        if dims.iter().any(|&n| n < 4 || n > 4096) {
            return Err(CmcError::Argument(format!(
                "each axis resolution must be in 4..=4096, got {dims:?}"
            )));
        }
        if periods.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(CmcError::Argument(format!(
                "periods must be positive and finite, got {periods:?}"
            )));
        }
        let mut strides = vec![0usize; dims.len()];
        let mut acc = 1usize;
        for k in (0..dims.len()).rev() {
            strides[k] = acc;
            acc = acc
                .checked_mul(dims[k])
                .ok_or_else(|| CmcError::Argument("grid too large".into()))?;
        }
        let spacing = dims
            .iter()
            .zip(&periods)
            .map(|(&n, &b)| 2.0 * b / n as f64)
            .collect();
        Ok(PeriodicGrid {
            dims,
            periods,
            strides,
            spacing,
            len: acc,
        })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Coordinate of index component `i` along `axis`, in `[-b, b)`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        -self.periods[axis] + i as f64 * self.spacing[axis]
    }

    /// Decomposes a flat index into per-axis components.
    pub fn unflatten(&self, idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        let mut rem = idx;
        for k in 0..self.dim() {
            out[k] = rem / self.strides[k];
            rem %= self.strides[k];
        }
        out
    }

    pub fn flatten(&self, comps: &[usize]) -> usize {
        comps
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c * s)
            .sum()
    }

    /// Flat index of the neighbor `offset` cells away along `axis`, with
    /// periodic wrap. `offset` may be negative.
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let n = self.dims[axis] as isize;
        let stride = self.strides[axis] as isize;
        let comp = (idx as isize / stride) % n;
        let shifted = (comp + offset).rem_euclid(n);
        (idx as isize + (shifted - comp) * stride) as usize
    }

    /// Centered first difference of `field` along `axis` at `idx`.
    pub fn d1(&self, field: &[f64], idx: usize, axis: usize) -> f64 {
        let p = field[self.neighbor(idx, axis, 1)];
        let m = field[self.neighbor(idx, axis, -1)];
        (p - m) / (2.0 * self.spacing[axis])
    }

    /// Centered second difference of `field` along `axis` at `idx`.
    pub fn d2(&self, field: &[f64], idx: usize, axis: usize) -> f64 {
        let p = field[self.neighbor(idx, axis, 1)];
        let m = field[self.neighbor(idx, axis, -1)];
        let c = field[idx];
        (p - 2.0 * c + m) / (self.spacing[axis] * self.spacing[axis])
    }

    /// Centered cross difference d^2/dx_a dx_b (a != b) at `idx`.
    pub fn d_cross(&self, field: &[f64], idx: usize, a: usize, b: usize) -> f64 {
        let pp = field[self.neighbor(self.neighbor(idx, a, 1), b, 1)];
        let pm = field[self.neighbor(self.neighbor(idx, a, 1), b, -1)];
        let mp = field[self.neighbor(self.neighbor(idx, a, -1), b, 1)];
        let mm = field[self.neighbor(self.neighbor(idx, a, -1), b, -1)];
        (pp - pm - mp + mm) / (4.0 * self.spacing[a] * self.spacing[b])
    }
}
