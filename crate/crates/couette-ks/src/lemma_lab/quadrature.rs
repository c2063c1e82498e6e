//! Shear-aligned tensor quadrature for the convolution estimates.
//!
//! Every streamwise integral runs in the sheared variable of its factor and
//! is done in closed form; the remaining cross-stream and time integrals are
//! adaptive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_sqrt_singular, Tolerance};
use crate::special::{gauss_gauss, gauss_laplace};

/// Quadrature resolution: relative tolerance of the outermost adaptive
/// integral and the number of equal panels every interval is pre-split into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub rel_tol: f64,
    pub panels: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            rel_tol: 1e-9,
            panels: 1,
        }
    }
}

impl Resolution {
    /// Twice the panels at half the tolerance.
    pub fn refined(self) -> Self {
        Resolution {
            rel_tol: 0.5 * self.rel_tol,
            panels: 2 * self.panels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-3) || self.panels == 0 {
            return Err(Error::param(format!(
                "resolution needs 0 < rel_tol < 1e-3 and panels >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Tolerance for an integral nested `depth` levels inside the outermost.
    pub(crate) fn tolerance(&self, depth: i32) -> Tolerance {
        Tolerance {
            abs: 1e-300,
            rel: (self.rel_tol * 0.1f64.powi(depth)).max(1e-13),
            max_intervals: 20_000,
        }
    }
}

fn panel_cuts(a: f64, b: f64, panels: usize, extra: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = (1..panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .collect();
    cuts.extend_from_slice(extra);
    cuts
}

/// Adaptive integral over `[a, b]`; non-convergence is an error. A signed
/// integrand whose value cancels below the tolerance is accepted when the
/// error is small against `∫ |f|`.
pub(crate) fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    res: &Resolution,
    depth: i32,
    what: &str,
) -> Result<f64> {
    let cuts = panel_cuts(a, b, res.panels, breaks);
    let tol = res.tolerance(depth);
    let r = integrate(&mut f, a, b, &cuts, tol);
    if r.converged && r.value.is_finite() {
        return Ok(r.value);
    }
    let l1 = integrate(|x| f(x).abs(), a, b, &cuts, tol);
    if r.value.is_finite() && l1.converged && r.error <= tol.rel * l1.value {
        Ok(r.value)
    } else {
        Err(Error::Quadrature(format!(
            "{what}: value {} error {} on [{a}, {b}]",
            r.value, r.error
        )))
    }
}

/// `∫_lo^hi g(σ) dσ` where `g` may carry an inverse square-root singularity
/// at `σ = t`; a window ending at `t` is integrated in `τ = t - σ` after the
/// substitution `τ = v²`.
pub(crate) fn time_integral(
    mut g: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    t: f64,
    res: &Resolution,
    what: &str,
) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let mut failure = None;
    let mut eval = |s: f64| match g(s) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let value = if hi >= t {
        let span = t - lo;
        let breaks: Vec<f64> = panel_cuts(0.0, span, res.panels, &[0.5 * span, 1e-3 * span]);
        let r = integrate_sqrt_singular(|tau| eval(t - tau), span, &breaks, res.tolerance(0));
        if !(r.converged && r.value.is_finite()) {
            return Err(Error::Quadrature(format!(
                "{what}: value {} error {} on [{lo}, {hi}]",
                r.value, r.error
            )));
        }
        r.value
    } else {
        adaptive(&mut eval, lo, hi, &[0.5 * (lo + hi)], res, 0, what)?
    };
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// One-dimensional source profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Profile {
    /// `exp(-u²/b)`; `b = 0` is the zero function.
    Gauss(f64),
    /// `exp(-|u|/l)`.
    Laplace(f64),
}

impl Profile {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Profile::Gauss(b) if b > 0.0 => (-u * u / b).exp(),
            Profile::Gauss(_) => 0.0,
            Profile::Laplace(l) => (-u.abs() / l).exp(),
        }
    }

    /// `∫ exp(-(u-mu)²/a) profile(u) du`.
    pub fn smoothed(self, mu: f64, a: f64) -> f64 {
        match self {
            Profile::Gauss(b) if b > 0.0 => gauss_gauss(mu, a, b),
            Profile::Gauss(_) => 0.0,
            Profile::Laplace(l) => gauss_laplace(mu, a, l),
        }
    }

    /// Scale on which the profile varies.
    pub fn scale(self) -> f64 {
        match self {
            Profile::Gauss(b) => b.sqrt(),
            Profile::Laplace(l) => l,
        }
    }
}

/// Transverse wave pattern `exp(-u²/(D s)) + exp(-|u|/D)` at time `s`.
pub(crate) fn transverse(d: f64, s: f64) -> [Profile; 2] {
    [Profile::Gauss(d * s), Profile::Laplace(d)]
}

/// Streamwise wave pattern in its sheared variable at time `s`.
pub(crate) fn streamwise(d: f64, s: f64, shear: f64) -> [Profile; 2] {
    let as_ = shear * s;
    [
        Profile::Gauss(d * s * (1.0 + as_ * as_)),
        Profile::Laplace(d * (1.0 + as_)),
    ]
}

/// Kernel geometry of one convolution: the unnormalized sheared Gaussian
/// `exp(-(x - x0 - Aτ(y+y0)/2)²/ax - (y-y0)²/ay)` against a source whose
/// streamwise profile is taken in `x0 - (A σ / 2) y0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PlaneKernel {
    pub x: f64,
    pub y: f64,
    pub tau: f64,
    pub sigma: f64,
    pub shear: f64,
    /// Streamwise variance denominator `ax`.
    pub ax: f64,
    /// Cross-stream variance denominator `ay`.
    pub ay: f64,
}

impl PlaneKernel {
    /// Kernel `W^{xy}(…; C1, C1)` after time `tau`, source at time `sigma`.
    pub fn wave(x: f64, y: f64, tau: f64, sigma: f64, shear: f64, c1: f64) -> Self {
        let b = crate::kernels::shear_factor(shear, tau);
        PlaneKernel {
            x,
            y,
            tau,
            sigma,
            shear,
            ax: 4.0 * c1 * tau * b,
            ay: 4.0 * c1 * tau,
        }
    }

    /// Offset of the kernel centre from the source's sheared variable.
    #[inline]
    pub fn mu(&self, y0: f64) -> f64 {
        self.x - 0.5 * self.shear * self.tau * (self.y + y0) - 0.5 * self.shear * self.sigma * y0
    }

    /// Cross-stream integration window and breakpoints for given profiles.
    pub fn window(&self, px: &[Profile], py: &[Profile]) -> (f64, f64, Vec<f64>) {
        let s = self.ay.sqrt();
        let (lo, hi) = (self.y - 7.0 * s, self.y + 7.0 * s);
        let mut breaks = vec![0.0, self.y, self.y - s, self.y + s];
        for p in py {
            let w = p.scale();
            breaks.extend([-w, w, -3.0 * w, 3.0 * w]);
        }
        // Source ordinate where the streamwise offset vanishes.
        let slope = 0.5 * self.shear * (self.tau + self.sigma);
        if slope > 0.0 {
            let y_star = (self.x - 0.5 * self.shear * self.tau * self.y) / slope;
            breaks.push(y_star);
            for p in px {
                let w = (self.ax + p.scale().powi(2)).sqrt() / slope;
                breaks.extend([y_star - w, y_star + w, y_star - 3.0 * w, y_star + 3.0 * w]);
            }
        }
        breaks.retain(|b| b.is_finite() && *b > lo && *b < hi);
        (lo, hi, breaks)
    }

    /// `∬ kernel · Σ px(x0 - Aσy0/2) · Σ py(y0) dx0 dy0`.
    pub fn integrate(&self, px: &[Profile], py: &[Profile], res: &Resolution, depth: i32) -> Result<f64> {
        let (lo, hi, breaks) = self.window(px, py);
        adaptive(
            |y0| {
                let dy = self.y - y0;
                let gy = (-dy * dy / self.ay).exp();
                if gy == 0.0 {
                    return 0.0;
                }
                let wy: f64 = py.iter().map(|p| p.eval(y0)).sum();
                if wy == 0.0 {
                    return 0.0;
                }
                let mu = self.mu(y0);
                let wx: f64 = px.iter().map(|p| p.smoothed(mu, self.ax)).sum();
                gy * wy * wx
            },
            lo,
            hi,
            &breaks,
            res,
            depth,
            "cross-stream integral",
        )
    }
}

/// `∫ exp(-(z-z0)²/a) Σ p(z0) dz0`.
pub(crate) fn line_smoothed(z: f64, a: f64, profiles: &[Profile]) -> f64 {
    profiles.iter().map(|p| p.smoothed(z, a)).sum()
}
