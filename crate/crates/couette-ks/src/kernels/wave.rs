use super::green::shear_factor;
use crate::error::{Error, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive, got {v}")))
    }
}

/// `exp(-num/den)` with the `den -> 0+` limit taken as the indicator of `num == 0`.
#[inline]
fn gauss_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (-num / den).exp()
    } else if num == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Kernel wave structure: the Gaussian factor of the Couette kernel with
/// diffusivities scaled by `(d1, d2, d3)`.
pub fn green_wave(
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    y0: f64,
    d: [f64; 3],
    shear: f64,
) -> Result<f64> {
    positive("t", t)?;
    for (i, v) in d.iter().enumerate() {
        positive(&format!("d{}", i + 1), *v)?;
    }
    Ok(green_wave_unchecked(x, y, z, t, y0, d, shear))
}

#[inline]
pub(crate) fn green_wave_unchecked(
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    y0: f64,
    d: [f64; 3],
    shear: f64,
) -> f64 {
    green_wave_xy_unchecked(x, y, t, y0, [d[0], d[1]], shear) * (-z * z / (4.0 * d[2] * t)).exp()
}

/// [`green_wave`] without the spanwise factor.
pub fn green_wave_xy(x: f64, y: f64, t: f64, y0: f64, d: [f64; 2], shear: f64) -> Result<f64> {
    positive("t", t)?;
    positive("d1", d[0])?;
    positive("d2", d[1])?;
    Ok(green_wave_xy_unchecked(x, y, t, y0, d, shear))
}

#[inline]
pub(crate) fn green_wave_xy_unchecked(
    x: f64,
    y: f64,
    t: f64,
    y0: f64,
    d: [f64; 2],
    shear: f64,
) -> f64 {
    let u = x - 0.5 * shear * t * (y + y0);
    let b = shear_factor(shear, t);
    let dy = y - y0;
    (-u * u / (4.0 * d[0] * t * b) - dy * dy / (4.0 * d[1] * t)).exp()
}

/// Streamwise wave pattern: a sheared Gaussian plus a sheared exponential tail.
pub fn wave_x(x: f64, y: f64, t: f64, d1: f64, d2: f64, shear: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    positive("D1", d1)?;
    positive("D2", d2)?;
    Ok(wave_x_unchecked(x, y, t, d1, d2, shear))
}

#[inline]
pub(crate) fn wave_x_unchecked(x: f64, y: f64, t: f64, d1: f64, d2: f64, shear: f64) -> f64 {
    let u = x - 0.5 * shear * t * y;
    let at = shear * t;
    gauss_ratio(u * u, d1 * t * (1.0 + at * at)) + (-u.abs() / (d2 * (1.0 + at))).exp()
}

/// Transverse wave pattern: a diffusive Gaussian plus a fixed exponential tail.
pub fn wave_o(u: f64, t: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    positive("D1", d1)?;
    positive("D2", d2)?;
    Ok(wave_o_unchecked(u, t, d1, d2))
}

#[inline]
pub(crate) fn wave_o_unchecked(u: f64, t: f64, d1: f64, d2: f64) -> f64 {
    gauss_ratio(u * u, d1 * t) + (-u.abs() / d2).exp()
}

/// Three-dimensional envelope `W^x(D1,D1) W^o(y;D2,D2) W^o(z;D3,D3)`.
pub fn wave_envelope(
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    d: [f64; 3],
    shear: f64,
) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    for (i, v) in d.iter().enumerate() {
        positive(&format!("D{}", i + 1), *v)?;
    }
    Ok(wave_envelope_unchecked(x, y, z, t, d, shear))
}

#[inline]
pub(crate) fn wave_envelope_unchecked(
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    d: [f64; 3],
    shear: f64,
) -> f64 {
    wave_x_unchecked(x, y, t, d[0], d[0], shear)
        * wave_o_unchecked(y, t, d[1], d[1])
        * wave_o_unchecked(z, t, d[2], d[2])
}

/// Two-dimensional envelope `W^x(D1,D1) W^o(y;D2,D2)`.
pub fn wave_envelope_2d(x: f64, y: f64, t: f64, d: [f64; 2], shear: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    positive("D1", d[0])?;
    positive("D2", d[1])?;
    Ok(wave_x_unchecked(x, y, t, d[0], d[0], shear) * wave_o_unchecked(y, t, d[1], d[1]))
}
