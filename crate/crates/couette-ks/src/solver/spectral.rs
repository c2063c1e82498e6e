//! Fourier-space operators in coordinates moving with the shear.
//!
//! A field stored with tilt `τ` is `f(X, y, z)` with `X = x - τ y`; its
//! physical wavenumber for stored mode `(kx, ky, kz)` is
//! `(kx, ky - τ kx, kz)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{Grid, Spectral};

/// Extra exponential decay applied by the linear propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    None,
    /// Multiplies by `e^{-dt}`, the zeroth-order reaction of the parabolic
    /// chemo-attractant.
    ExpMinusT,
}

/// `∫_0^dt |k_eff(s)|² ds` for a mode whose transverse physical wavenumber
/// starts at `ky_phys` and drifts as `ky_phys - shear * s * kx`.
#[inline]
pub fn dissipation_exponent(kx: f64, ky_phys: f64, kz: f64, dt: f64, shear: f64) -> f64 {
    let mid = ky_phys - 0.5 * shear * dt * kx;
    let spread = shear * dt * kx;
    dt * (kx * kx + kz * kz + mid * mid + spread * spread / 12.0)
}

/// Cached transforms and wavenumber tables for one grid.
#[derive(Debug)]
pub struct ShearSpectral {
    grid: Grid,
    fft: Spectral,
    k: [Vec<f64>; 3],
    /// Derivative wavenumbers with the Nyquist index zeroed.
    kd: [Vec<f64>; 3],
    dealias: bool,
    /// Per-mode tables, flattened in storage order.
    modes: Vec<ModeInfo>,
}

#[derive(Debug, Clone, Copy)]
struct ModeInfo {
    k: [f64; 3],
    kd: [f64; 3],
    mirror: u32,
    kept: bool,
    nyquist: bool,
}

impl ShearSpectral {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        let k = [0, 1, 2].map(|a| grid.wavenumbers(a));
        let nyquist = [0, 1, 2].map(|a| {
            let n = grid.shape[a];
            (0..n).map(|i| a < grid.dims && n > 1 && i == n / 2).collect::<Vec<_>>()
        });
        let kd = [0, 1, 2].map(|a| {
            k[a].iter()
                .zip(&nyquist[a])
                .map(|(v, &q)| if q { 0.0 } else { *v })
                .collect::<Vec<_>>()
        });
        let keep = [0, 1, 2].map(|a| {
            let n = grid.shape[a] as i64;
            (0..grid.shape[a])
                .map(|i| a >= grid.dims || 3 * Grid::mode(i, n as usize).abs() < n)
                .collect::<Vec<_>>()
        });
        let sh = grid.shape;
        let modes = (0..grid.len())
            .map(|idx| {
                let (i, j, l) = grid.unravel(idx);
                ModeInfo {
                    k: [k[0][i], k[1][j], k[2][l]],
                    kd: [kd[0][i], kd[1][j], kd[2][l]],
                    mirror: grid.index((sh[0] - i) % sh[0], (sh[1] - j) % sh[1], (sh[2] - l) % sh[2])
                        as u32,
                    kept: !dealias || (keep[0][i] && keep[1][j] && keep[2][l]),
                    nyquist: nyquist[0][i] || nyquist[1][j] || nyquist[2][l],
                }
            })
            .collect();
        ShearSpectral {
            grid: grid.clone(),
            fft: Spectral::new(grid),
            k,
            kd,
            dealias,
            modes,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fft(&self) -> &Spectral {
        &self.fft
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn to_spectral(&self, values: &[f64]) -> Vec<Complex64> {
        self.fft.forward(values)
    }

    pub fn to_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        self.fft.inverse_real(spec)
    }

    #[inline]
    fn split(&self, idx: usize) -> (usize, usize, usize) {
        self.grid.unravel(idx)
    }

    /// Physical `|k|²` of a stored mode at the given tilt.
    #[inline]
    pub fn k2_physical(&self, idx: usize, tilt: f64) -> f64 {
        let [kx, ky, kz] = self.modes[idx].k;
        let ky = ky - tilt * kx;
        kx * kx + ky * ky + kz * kz
    }

    /// Exact propagator of `∂t u + A y ∂x u = Δu` over `dt`, starting from
    /// tilt `tilt`. Nyquist planes are projected out so the field stays real.
    pub fn propagate(&self, spec: &mut [Complex64], tilt: f64, dt: f64, shear: f64, damping: Damping) {
        let extra = match damping {
            Damping::None => 0.0,
            Damping::ExpMinusT => dt,
        };
        spec.par_iter_mut().zip(&self.modes).for_each(|(v, m)| {
            if m.nyquist {
                *v = Complex64::default();
                return;
            }
            let [kx, ky, kz] = m.k;
            let e = dissipation_exponent(kx, ky - tilt * kx, kz, dt, shear) + extra;
            *v *= (-e).exp();
        });
    }

    /// Screened Poisson solve `(1 - Δ) c = n` in physical wavenumbers.
    pub fn screened_poisson(&self, n_hat: &[Complex64], tilt: f64) -> Vec<Complex64> {
        n_hat
            .par_iter()
            .enumerate()
            .map(|(idx, v)| v / (1.0 + self.k2_physical(idx, tilt)))
            .collect()
    }

    /// Zeroes modes outside the two-thirds box (no-op when dealiasing is off).
    pub fn apply_mask(&self, spec: &mut [Complex64]) {
        if !self.dealias {
            return;
        }
        spec.par_iter_mut().zip(&self.modes).for_each(|(v, m)| {
            if !m.kept {
                *v = Complex64::default();
            }
        });
    }

    /// Physical derivative wavenumbers of a mode at `tilt`.
    #[inline]
    fn kd_physical(m: &ModeInfo, tilt: f64) -> [f64; 3] {
        [m.kd[0], m.kd[1] - tilt * m.kd[0], m.kd[2]]
    }

    /// Spectrum of the physical gradient component along `axis`.
    pub fn gradient(&self, spec: &[Complex64], tilt: f64, axis: usize) -> Vec<Complex64> {
        spec.par_iter()
            .zip(&self.modes)
            .map(|(v, m)| v * Complex64::new(0.0, Self::kd_physical(m, tilt)[axis]))
            .collect()
    }

    /// Spectrum of `-∇·(n ∇c)` with two-thirds dealiasing, plus the largest
    /// gradient magnitude `max |∇c|` found on the grid.
    pub fn chemotaxis(&self, n_hat: &[Complex64], c_hat: &[Complex64], tilt: f64) -> (Vec<Complex64>, f64) {
        let three = self.grid.dims == 3;
        let iu = Complex64::new(0.0, 1.0);
        let zero = Complex64::default();

        // Pack (n, ∂x c) and (∂y c, ∂z c) into two complex inverse transforms;
        // products use dealiased inputs.
        let mut p1: Vec<Complex64> = Vec::with_capacity(n_hat.len());
        let mut p2: Vec<Complex64> = Vec::with_capacity(n_hat.len());
        n_hat
            .par_iter()
            .zip(c_hat)
            .zip(&self.modes)
            .map(|((n, c), m)| {
                if !m.kept {
                    return (zero, zero);
                }
                let [gx, gy, gz] = Self::kd_physical(m, tilt);
                let ic = c * iu;
                (n + ic * gx * iu, ic * gy + ic * gz * iu)
            })
            .unzip_into_vecs(&mut p1, &mut p2);
        self.fft.inverse_inplace(&mut p1);
        self.fft.inverse_inplace(&mut p2);

        // Fluxes n ∇c, packed as (Fx + i Fy) and (Fz + 0i) in place.
        let max_grad = p1
            .par_iter_mut()
            .zip(p2.par_iter_mut())
            .map(|(a, b)| {
                let (n, gx, gy, gz) = (a.re, a.im, b.re, b.im);
                *a = Complex64::new(n * gx, n * gy);
                *b = Complex64::new(n * gz, 0.0);
                (gx * gx + gy * gy + gz * gz).sqrt()
            })
            .reduce(|| 0.0, f64::max);
        self.fft.forward_inplace(&mut p1);
        if three {
            self.fft.forward_inplace(&mut p2);
        }

        let rhs = (0..p1.len())
            .into_par_iter()
            .map(|idx| {
                let m = &self.modes[idx];
                if !m.kept {
                    return zero;
                }
                let p = p1[idx];
                let q = p1[m.mirror as usize].conj();
                let fx = (p + q) * 0.5;
                let fy = (p - q) * Complex64::new(0.0, -0.5);
                let [kx, ky, kz] = Self::kd_physical(m, tilt);
                let mut div = fx * kx + fy * ky;
                if three {
                    div += p2[idx] * kz;
                }
                -iu * div
            })
            .collect();
        (rhs, max_grad)
    }

    /// Relabels transverse modes after the tilt drops by `Lx/Ly`, keeping
    /// physical wavenumbers fixed. Modes pushed off the grid are dropped.
    pub fn remap(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let s = self.grid.shape;
        let mut out = vec![Complex64::default(); spec.len()];
        let ny = s[1] as i64;
        // Transform phases are measured from the origin, which contributes a
        // constant phase per streamwise mode.
        let period = self.grid.lengths[0] / self.grid.lengths[1];
        let y0 = self.grid.origin[1];
        for (idx, v) in spec.iter().enumerate() {
            let (i, j, l) = self.split(idx);
            let mx = Grid::mode(i, s[0]);
            let my = Grid::mode(j, s[1]) - mx;
            if my < -ny / 2 || my >= ny / 2 {
                continue;
            }
            let jj = my.rem_euclid(ny) as usize;
            out[self.grid.index(i, jj, l)] = *v * Complex64::from_polar(1.0, -self.k[0][i] * period * y0);
        }
        out
    }

    /// Fraction of spectral energy with some axis mode beyond a quarter of
    /// the resolution (the top octave).
    pub fn top_octave_fraction(&self, spec: &[Complex64]) -> f64 {
        let s = self.grid.shape;
        let (top, total) = spec
            .par_iter()
            .enumerate()
            .map(|(idx, v)| {
                let (i, j, l) = self.split(idx);
                let e = v.norm_sqr();
                let high = [(0, i), (1, j), (2, l)].iter().any(|&(a, m)| {
                    a < self.grid.dims && 4 * Grid::mode(m, s[a]).unsigned_abs() as usize > s[a]
                });
                (if high { e } else { 0.0 }, e)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if total > 0.0 {
            top / total
        } else {
            0.0
        }
    }

    /// Largest modulus along `axis` among modes with `|m| >= N/4`, relative to
    /// the largest modulus overall.
    pub fn upper_half_amplitude(&self, spec: &[Complex64], axis: usize) -> f64 {
        let n = self.grid.shape[axis];
        let (hi, all) = spec
            .par_iter()
            .enumerate()
            .map(|(idx, v)| {
                let (i, j, l) = self.split(idx);
                let m = [i, j, l][axis];
                let a = v.norm();
                let high = 4 * Grid::mode(m, n).unsigned_abs() as usize >= n;
                (if high { a } else { 0.0 }, a)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
        if all > 0.0 {
            hi / all
        } else {
            0.0
        }
    }

    /// Re-expresses a stored field at a new tilt by exact per-row phase shifts
    /// along the streamwise axis.
    pub fn retilt(&self, values: &[f64], from: f64, to: f64) -> Vec<f64> {
        let delta = to - from;
        if delta == 0.0 {
            return values.to_vec();
        }
        let ys = self.grid.coords(1);
        let s = self.grid.shape;
        let inner = s[1] * s[2];
        let mut d: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fft.forward_axis_inplace(&mut d, 0);
        d.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let i = idx / inner;
            let j = (idx % inner) / s[2];
            let phase = self.kd[0][i] * delta * ys[j];
            *v *= Complex64::from_polar(1.0, phase);
        });
        self.fft.inverse_axis_inplace(&mut d, 0);
        d.into_iter().map(|c| c.re).collect()
    }
}
