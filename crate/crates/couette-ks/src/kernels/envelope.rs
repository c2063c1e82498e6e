use super::params::EnvelopeParams;
use crate::error::{Error, Result};

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive, got {t}")))
    }
}

/// Which of the three time regimes `(0, A^-θ]`, `(A^-θ, 1]`, `(1, ∞)` holds `t`.
/// Ties go to the left regime.
pub(crate) fn regime(t: f64, shear: f64, theta: f64) -> usize {
    let early = shear.powf(-theta);
    if t <= early {
        0
    } else if t <= 1.0 {
        1
    } else {
        2
    }
}

/// Shared middle branch `t^{-1/4-γ/4} (1+A²t²)^{-1/4+γ/4}`.
fn middle(t: f64, shear: f64, gamma: f64) -> f64 {
    t.powf(-0.25 - 0.25 * gamma) * (1.0 + shear * shear * t * t).powf(-0.25 + 0.25 * gamma)
}

/// Three-regime time envelope of the density.
pub fn envelope_a(t: f64, p: &EnvelopeParams) -> Result<f64> {
    check_time(t)?;
    p.check_exponents()?;
    let (a, th, g) = (p.shear, p.theta, p.gamma);
    let pre = a.powf(-(1.0 - th) * g);
    Ok(match regime(t, a, th) {
        0 => 1.0,
        1 => pre * middle(t, a, g),
        _ => pre * (1.0 + t).powf(-1.5) * (1.0 + a * a * t * t).powf(-0.5 + 0.5 * g),
    })
}

/// Envelope produced by the earliest Duhamel window.
pub fn envelope_a1(t: f64, p: &EnvelopeParams) -> Result<f64> {
    check_time(t)?;
    p.check_exponents()?;
    let (a, th, g) = (p.shear, p.theta, p.gamma);
    Ok(match regime(t, a, th) {
        0 => t.sqrt(),
        1 => a.powf(-p.epsilon0()) * a.powf(-(1.0 - th) * g) * middle(t, a, g),
        _ => a.powf(1.0 - 2.0 * th) * (1.0 + t).powf(-2.0) / (1.0 + a * a * t * t).sqrt(),
    })
}

/// Envelope produced by the intermediate Duhamel window.
pub fn envelope_a2(t: f64, p: &EnvelopeParams) -> Result<f64> {
    check_time(t)?;
    p.check_exponents()?;
    let (a, th, g) = (p.shear, p.theta, p.gamma);
    Ok(match regime(t, a, th) {
        0 => 0.0,
        1 => middle(t, a, g),
        _ => a.powf(g) * (1.0 + t).powf(-2.0) / (1.0 + a * a * t * t).sqrt(),
    })
}

/// Envelope of the damped chemo-attractant Duhamel term, `alpha ∈ [3/2, 2]`.
pub fn envelope_a3(t: f64, alpha: f64, p: &EnvelopeParams) -> Result<f64> {
    check_time(t)?;
    p.check_exponents()?;
    if !(1.5..=2.0).contains(&alpha) {
        return Err(Error::param(format!("alpha must lie in [3/2, 2], got {alpha}")));
    }
    let (a, th, g) = (p.shear, p.theta, p.gamma);
    Ok(match regime(t, a, th) {
        0 => 0.0,
        1 => middle(t, a, g),
        _ => {
            a.powf(0.5 + 0.5 * g) * (-0.5 * t).exp() * (1.0 + t).powf(-alpha)
                / (1.0 + a * a * t * t).sqrt()
        }
    })
}

/// Late-time cut-off: 0 up to and including `t = 1`, 1 afterwards.
pub fn chi(t: f64) -> f64 {
    if t > 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Late-time exponent of `t` in the `L^p` bound (`p = ∞` allowed) when `A t >> 1`.
pub fn lp_decay_exponent(p: f64, gamma: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    -1.5 * (1.0 - inv) + 2.0 * (-0.5 + 0.5 * gamma + 0.5 * inv)
}
