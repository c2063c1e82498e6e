//! Uniform periodic grids, sampled fields and multi-dimensional FFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform rectangular grid in two or three dimensions. Two-dimensional
/// grids carry a unit third axis so that indexing is uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: usize,
    pub shape: [usize; 3],
    pub lengths: [f64; 3],
    pub origin: [f64; 3],
}

impl Grid {
    /// Centered box `[-L/2, L/2)` per axis.
    pub fn centered(shape: &[usize], lengths: &[f64]) -> Result<Self> {
        let origin: Vec<f64> = lengths.iter().map(|l| -0.5 * l).collect();
        Self::new(shape, lengths, &origin)
    }

    pub fn new(shape: &[usize], lengths: &[f64], origin: &[f64]) -> Result<Self> {
        let dims = shape.len();
        if !(dims == 2 || dims == 3) || lengths.len() != dims || origin.len() != dims {
            return Err(Error::InvalidConfig(format!(
                "grid needs 2 or 3 matching axes, got shape {shape:?} lengths {lengths:?}"
            )));
        }
        let mut g = Grid {
            dims,
            shape: [1; 3],
            lengths: [1.0; 3],
            origin: [0.0; 3],
        };
        for a in 0..dims {
            if shape[a] < 2 || !shape[a].is_power_of_two() {
                return Err(Error::InvalidConfig(format!(
                    "axis {a} resolution {} is not a power of two",
                    shape[a]
                )));
            }
            if !(lengths[a] > 0.0) || !lengths[a].is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "axis {a} length {} must be positive",
                    lengths[a]
                )));
            }
            g.shape[a] = shape[a];
            g.lengths[a] = lengths[a];
            g.origin[a] = origin[a];
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims).map(|a| self.spacing(a)).product()
    }

    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.shape[axis])
            .map(|i| self.origin[axis] + i as f64 * h)
            .collect()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.shape[2];
        let r = idx / self.shape[2];
        (r / self.shape[1], r % self.shape[1], k)
    }

    /// Signed mode number of FFT index `i` on an axis of `n` points.
    #[inline]
    pub fn mode(i: usize, n: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavenumbers of each FFT index along `axis`.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        if axis >= self.dims {
            return vec![0.0; n];
        }
        let base = 2.0 * std::f64::consts::PI / self.lengths[axis];
        (0..n).map(|i| base * Self::mode(i, n) as f64).collect()
    }

    pub fn same_sampling(&self, other: &Grid) -> bool {
        self.dims == other.dims
            && self.shape == other.shape
            && self
                .lengths
                .iter()
                .zip(&other.lengths)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
    }
}

/// A real scalar sampled on a grid, in coordinates `X = x - tilt * y` that
/// follow the shear (`tilt = 0` is the laboratory frame).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
    pub tilt: f64,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
            time: 0.0,
            tilt: 0.0,
        }
    }

    /// Samples `f(x, y, z)` at the grid nodes of a laboratory-frame field.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let xs = grid.coords(0);
        let ys = grid.coords(1);
        let zs = if grid.dims == 3 { grid.coords(2) } else { vec![0.0] };
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = grid.unravel(idx);
                f(xs[i], ys[j], zs[k])
            })
            .collect();
        Field {
            grid,
            values,
            time: 0.0,
            tilt: 0.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Forward/inverse complex FFT over all axes of a grid.
pub struct Spectral {
    shape: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("shape", &self.shape).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = grid.shape.map(|n| planner.plan_fft_forward(n));
        let inv = grid.shape.map(|n| planner.plan_fft_inverse(n));
        Spectral {
            shape: grid.shape,
            fwd,
            inv,
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let plan = if forward {
            &self.fwd[axis]
        } else {
            &self.inv[axis]
        };
        let inner: usize = self.shape[axis + 1..].iter().product();
        if inner == 1 {
            data.par_chunks_mut(n).for_each_init(
                || vec![Complex64::default(); plan.get_inplace_scratch_len()],
                |scratch, line| plan.process_with_scratch(line, scratch),
            );
            return;
        }
        // Strided axis: gather blocks of adjacent lines, transform them in one
        // call, scatter back.
        const BLOCK: usize = 16;
        let slab = n * inner;
        let run = |chunk: &mut [Complex64]| {
            let mut buf = vec![Complex64::default(); BLOCK * n];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let mut i0 = 0;
            while i0 < inner {
                let b = BLOCK.min(inner - i0);
                for k in 0..n {
                    let row = &chunk[k * inner + i0..k * inner + i0 + b];
                    for (l, v) in row.iter().enumerate() {
                        buf[l * n + k] = *v;
                    }
                }
                plan.process_with_scratch(&mut buf[..b * n], &mut scratch);
                for k in 0..n {
                    let row = &mut chunk[k * inner + i0..k * inner + i0 + b];
                    for (l, v) in row.iter_mut().enumerate() {
                        *v = buf[l * n + k];
                    }
                }
                i0 += b;
            }
        };
        data.par_chunks_mut(slab).for_each(run);
    }

    /// Unnormalized forward transform in place.
    pub fn forward_inplace(&self, data: &mut [Complex64]) {
        for a in 0..3 {
            self.transform_axis(data, a, true);
        }
    }

    /// Normalized inverse transform in place.
    pub fn inverse_inplace(&self, data: &mut [Complex64]) {
        for a in 0..3 {
            self.transform_axis(data, a, false);
        }
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    /// Unnormalized forward transform along one axis only.
    pub fn forward_axis_inplace(&self, data: &mut [Complex64], axis: usize) {
        self.transform_axis(data, axis, true);
    }

    /// Normalized inverse transform along one axis only.
    pub fn inverse_axis_inplace(&self, data: &mut [Complex64], axis: usize) {
        self.transform_axis(data, axis, false);
        let scale = 1.0 / self.shape[axis] as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.forward_inplace(&mut d);
        d
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut d = spec.to_vec();
        self.inverse_inplace(&mut d);
        d.into_iter().map(|c| c.re).collect()
    }
}
