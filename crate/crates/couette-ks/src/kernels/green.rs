use std::f64::consts::PI;

use super::KernelQuery;
use crate::error::{Error, Result};

/// `1 + A^2 t^2 / 12`, the shear broadening of the streamwise variance.
#[inline]
pub fn shear_factor(shear: f64, t: f64) -> f64 {
    1.0 + shear * shear * t * t / 12.0
}

#[inline]
pub(crate) fn green3_unchecked(q: &KernelQuery) -> f64 {
    let t = q.t;
    let b = shear_factor(q.shear, t);
    let u = q.sheared_offset();
    let dy = q.y - q.y0;
    let expo = -u * u / (4.0 * t * b) - dy * dy / (4.0 * t) - q.z * q.z / (4.0 * t);
    (4.0 * PI * t).powf(-1.5) / b.sqrt() * expo.exp()
}

#[inline]
pub(crate) fn green2_unchecked(q: &KernelQuery) -> f64 {
    let t = q.t;
    let b = shear_factor(q.shear, t);
    let u = q.sheared_offset();
    let dy = q.y - q.y0;
    let expo = -u * u / (4.0 * t * b) - dy * dy / (4.0 * t);
    (4.0 * PI * t).recip() / b.sqrt() * expo.exp()
}

/// Green's function of `∂t u + A y ∂x u = Δu` in three dimensions.
pub fn green_couette_3d(q: &KernelQuery) -> Result<f64> {
    q.validate()?;
    Ok(green3_unchecked(q))
}

/// Green's function of `∂t u + A y ∂x u = Δu` in two dimensions (`z` ignored).
pub fn green_couette_2d(q: &KernelQuery) -> Result<f64> {
    q.validate()?;
    Ok(green2_unchecked(q))
}

/// Streamwise, source-ordinate and spanwise derivatives of the 3-D kernel.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GreenGradient {
    pub dx: f64,
    pub dy0: f64,
    pub dz: f64,
}

pub fn grad_green_couette(q: &KernelQuery) -> Result<GreenGradient> {
    q.validate()?;
    let g = green3_unchecked(q);
    let t = q.t;
    let b = shear_factor(q.shear, t);
    let u = q.sheared_offset();
    Ok(GreenGradient {
        dx: -u / (2.0 * t * b) * g,
        dy0: (q.shear * t * u / (4.0 * t * b) + (q.y - q.y0) / (2.0 * t)) * g,
        dz: -q.z / (2.0 * t) * g,
    })
}

/// Kernel of the damped parabolic chemo-attractant equation, `e^{-t} G`.
pub fn green_c_parabolic(q: &KernelQuery) -> Result<f64> {
    q.validate()?;
    Ok((-q.t).exp() * green3_unchecked(q))
}

/// Fundamental solution of `-Δ + 1` in three dimensions, taken positive.
pub fn yukawa(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    Ok((-r).exp() / (4.0 * PI * r))
}

/// Magnitude bound `(1+r) e^{-r} / r^2` for the Yukawa gradient, with the
/// constant fixed so that it is exactly `|∇ yukawa|`.
pub fn yukawa_gradient_bound(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    Ok((1.0 + r) * (-r).exp() / (4.0 * PI * r * r))
}
