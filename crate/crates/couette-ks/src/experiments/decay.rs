use std::path::Path;

use serde::{Deserialize, Serialize};

use super::compare::RunBundle;
use crate::error::{Error, Result};
use crate::fit::{least_squares, LineFit};
use crate::solver::{DiagnosticsRow, SimConfig};

/// Late-time exponent of `||A W||_p` in `t` for a `dims`-dimensional run.
///
/// The sup decays like `t^{-dims/2} (A t)^{-1+γ}` and the envelope's support
/// grows like `t^{3/2}` along the stream and `t^{1/2}` across it. Without
/// shear the heat rate `-(dims/2)(1 - 1/p)` applies.
pub fn envelope_lp_exponent(p: f64, gamma: f64, dims: usize, sheared: bool) -> f64 {
    let d = dims as f64;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if sheared {
        -0.5 * d - (1.0 - gamma) + (1.5 + 0.5 * (d - 1.0)) * inv_p
    } else {
        -0.5 * d * (1.0 - inv_p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub dims: usize,
    pub shear: f64,
    pub gamma: f64,
    pub t_range: (f64, f64),
    pub l2: LineFit,
    pub linf: LineFit,
    pub predicted_l2: f64,
    pub predicted_linf: f64,
    /// Allowed excess of the measured over the predicted exponent.
    pub margin: f64,
    pub l2_ok: bool,
    pub linf_ok: bool,
}

/// Fits `d ln ||n||_p / d ln t` on `[t_min, t_final]` for `p = 2, ∞` and
/// checks the measured exponents do not exceed the envelope prediction by
/// more than `margin`.
pub fn decay_fit(rows: &[DiagnosticsRow], config: &SimConfig, t_min: f64, margin: f64) -> Result<DecayReport> {
    if rows.iter().any(|r| r.blowup_flag != 0) {
        return Err(Error::param("decay fit needs a run without blow-up"));
    }
    let t_end = rows.last().map_or(0.0, |r| r.t);
    if t_end < 10.0 {
        return Err(Error::InsufficientData(format!("run ends at t = {t_end} < 10")));
    }
    let late: Vec<&DiagnosticsRow> = rows.iter().filter(|r| r.t >= t_min).collect();
    if late.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "{} samples with t >= {t_min}",
            late.len()
        )));
    }
    let pts = |f: fn(&DiagnosticsRow) -> f64| -> Vec<(f64, f64)> {
        late.iter().map(|r| (r.t.ln(), f(r).ln())).collect()
    };
    let l2 = least_squares(&pts(|r| r.l2))?;
    let linf = least_squares(&pts(|r| r.linf))?;
    let dims = config.domain.dims;
    let shear = config.model.shear;
    let gamma = config.envelope.gamma;
    let sheared = shear > 0.0;
    let predicted_l2 = envelope_lp_exponent(2.0, gamma, dims, sheared);
    let predicted_linf = envelope_lp_exponent(f64::INFINITY, gamma, dims, sheared);
    Ok(DecayReport {
        dims,
        shear,
        gamma,
        t_range: (t_min, t_end),
        l2_ok: l2.slope <= predicted_l2 + margin,
        linf_ok: linf.slope <= predicted_linf + margin,
        l2,
        linf,
        predicted_l2,
        predicted_linf,
        margin,
    })
}

/// [`decay_fit`] on a run directory, over `t >= 2` with margin 0.3.
pub fn decay_fit_dir(dir: &Path) -> Result<DecayReport> {
    let b = RunBundle::load(dir)?;
    decay_fit(&b.diagnostics, &b.metadata.config, 2.0, 0.3)
}
