//! Operators on fields held as `(kx, y)` half-transforms: Fourier in the
//! streamwise direction, point values across the shear.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{Grid, Spectral};

const FD6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const FD4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];

pub(crate) struct Plane {
    pub grid: Grid,
    pub nx: usize,
    pub ny: usize,
    pub hy: f64,
    pub ys: Vec<f64>,
    /// Streamwise wavenumbers, Nyquist zeroed.
    pub kx: Vec<f64>,
    fft: Spectral,
}

/// Normalized heat weights `h g(mh) / Z` for `m = 0..n`, where `Z` is the
/// lattice sum of `h g` over all integers, together with the lattice
/// variance of the normalized rule.
pub(crate) struct HeatLine {
    weights: Vec<f64>,
    pub variance: f64,
}

impl HeatLine {
    pub fn new(tau: f64, h: f64, n: usize) -> Self {
        let g = |m: f64| (-(m * h).powi(2) / (4.0 * tau)).exp();
        let mut z = g(0.0);
        let mut second = 0.0;
        let mut m = 1.0;
        loop {
            let v = g(m);
            z += 2.0 * v;
            second += 2.0 * v * (m * h).powi(2);
            if v < 1e-300 || v < 1e-18 * z {
                break;
            }
            m += 1.0;
        }
        let weights = (0..n).map(|m| g(m as f64) / z).collect();
        HeatLine {
            weights,
            variance: second / z,
        }
    }
}

impl Plane {
    pub fn new(grid: &Grid) -> Self {
        let nx = grid.shape[0];
        let ny = grid.shape[1];
        let mut kx = grid.wavenumbers(0);
        kx[nx / 2] = 0.0;
        Plane {
            grid: grid.clone(),
            nx,
            ny,
            hy: grid.spacing(1),
            ys: grid.coords(1),
            kx,
            fft: Spectral::new(grid),
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut d: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fft.forward_axis_inplace(&mut d, 0);
        d
    }

    pub fn inverse(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut d = hat.to_vec();
        self.fft.inverse_axis_inplace(&mut d, 0);
        d.into_iter().map(|c| c.re).collect()
    }

    fn rows_mut<'a>(&self, d: &'a mut [Complex64]) -> impl IndexedParallelIterator<Item = (usize, &'a mut [Complex64])> {
        d.par_chunks_mut(self.ny).enumerate()
    }

    /// Exact transport-diffusion over `tau` (times `e^{-tau}` when `damped`):
    /// for each streamwise mode a dense `(y, y0)` sum against the kernel's
    /// Gaussian cross-stream factor with its source-dependent phase.
    pub fn heat(&self, hat: &[Complex64], tau: f64, shear: f64, damped: bool) -> Vec<Complex64> {
        let line = HeatLine::new(tau, self.hy, self.ny);
        let b = 1.0 + shear * shear * tau * tau / 12.0;
        let decay = if damped { (-tau).exp() } else { 1.0 };
        let mut out = vec![Complex64::default(); hat.len()];
        let ny = self.ny;
        self.rows_mut(&mut out).for_each(|(i, row)| {
            let k = self.kx[i];
            if i == self.nx / 2 && self.nx > 1 {
                return;
            }
            let amp = decay * (-k * k * tau * b).exp();
            if amp == 0.0 {
                return;
            }
            let src = &hat[i * ny..(i + 1) * ny];
            let w = -0.5 * k * shear * tau;
            let phase: Vec<Complex64> = self.ys.iter().map(|y| Complex64::from_polar(1.0, w * y)).collect();
            let v: Vec<Complex64> = src.iter().zip(&phase).map(|(a, p)| a * p).collect();
            for (iy, o) in row.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (jy, vj) in v.iter().enumerate() {
                    acc += vj * line.weights[iy.abs_diff(jy)];
                }
                *o = acc * phase[iy] * amp;
            }
        });
        out
    }

    /// `(1 - ∂xx - ∂yy)^{-1}` on the whole line in `y`: trapezoid sums of
    /// `e^{-κ|y-s|} / 2κ` with the kink correction that makes the rule exact
    /// on constants.
    pub fn yukawa(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let h = self.hy;
        let ny = self.ny;
        let mut out = vec![Complex64::default(); hat.len()];
        self.rows_mut(&mut out).for_each(|(i, row)| {
            let kappa = (1.0 + self.kx[i] * self.kx[i]).sqrt();
            let w: Vec<f64> = (0..ny).map(|m| h * (-kappa * m as f64 * h).exp() / (2.0 * kappa)).collect();
            let corr = h / (2.0 * kappa * (0.5 * kappa * h).tanh()) - 1.0 / (kappa * kappa);
            let src = &hat[i * ny..(i + 1) * ny];
            for (iy, o) in row.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (jy, s) in src.iter().enumerate() {
                    acc += s * w[iy.abs_diff(jy)];
                }
                *o = acc - src[iy] * corr;
            }
        });
        out
    }

    pub fn dx(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let mut out = hat.to_vec();
        self.rows_mut(&mut out).for_each(|(i, row)| {
            let ik = Complex64::new(0.0, self.kx[i]);
            row.iter_mut().for_each(|v| *v *= ik);
        });
        out
    }

    /// Central difference in `y` with zero extension past the box.
    pub fn dy(&self, hat: &[Complex64], sixth: bool) -> Vec<Complex64> {
        let ny = self.ny;
        let coef: &[f64] = if sixth { &FD6 } else { &FD4 };
        let inv_h = 1.0 / self.hy;
        let mut out = vec![Complex64::default(); hat.len()];
        self.rows_mut(&mut out).for_each(|(i, row)| {
            let src = &hat[i * ny..(i + 1) * ny];
            let at = |j: isize| {
                if j < 0 || j >= ny as isize {
                    Complex64::default()
                } else {
                    src[j as usize]
                }
            };
            for (j, o) in row.iter_mut().enumerate() {
                let j = j as isize;
                let mut acc = Complex64::default();
                for (m, c) in coef.iter().enumerate() {
                    let m = m as isize + 1;
                    acc += (at(j + m) - at(j - m)) * *c;
                }
                *o = acc * inv_h;
            }
        });
        out
    }

    /// `∇·(n ∇c)` as a half-transform, from half-transforms of `n` and `c`.
    pub fn aggregation(&self, n_hat: &[Complex64], c_hat: &[Complex64], sixth: bool) -> Vec<Complex64> {
        let n = self.inverse(n_hat);
        let cx = self.inverse(&self.dx(c_hat));
        let cy = self.inverse(&self.dy(c_hat, sixth));
        let fx: Vec<f64> = n.iter().zip(&cx).map(|(a, b)| a * b).collect();
        let fy: Vec<f64> = n.iter().zip(&cy).map(|(a, b)| a * b).collect();
        let mut out = self.dx(&self.forward(&fx));
        let dyf = self.dy(&self.forward(&fy), sixth);
        out.iter_mut().zip(&dyf).for_each(|(a, b)| *a += b);
        out
    }

    /// Second `y` difference, for the narrow-kernel error model.
    pub fn dyy_sup(&self, values: &[f64]) -> f64 {
        let ny = self.ny;
        let h2 = self.hy * self.hy;
        (0..values.len())
            .into_par_iter()
            .map(|idx| {
                let j = idx % ny;
                let at = |jj: isize| {
                    if jj < 0 || jj >= ny as isize {
                        0.0
                    } else {
                        values[idx - j + jj as usize]
                    }
                };
                let j = j as isize;
                ((at(j + 1) - 2.0 * at(j) + at(j - 1)) / h2).abs()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Largest `|v|` in the two outermost rows on either side of the `y` range.
    pub fn y_edge(&self, values: &[f64]) -> f64 {
        let ny = self.ny;
        values
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                let j = idx % ny;
                j < 2 || j + 2 >= ny
            })
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
    }
}

/// Aliasing error of the lattice heat rule relative to the data sup.
pub(crate) fn heat_rule_error(tau: f64, h: f64, variance: f64, dyy_sup: f64, sup: f64) -> f64 {
    let alias = 2.0 * (-4.0 * PI * PI * tau / (h * h)).exp() * sup;
    alias + 0.5 * (variance - 2.0 * tau).abs() * dyy_sup
}
