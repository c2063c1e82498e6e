//! Duhamel interactions of the kernel with the density envelope over the
//! early, middle and late time windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{line_smoothed, streamwise, time_integral, transverse, PlaneKernel, Resolution};
use super::{CaseFrame, EvalPoint, InequalityCase, LemmaId, LemmaReport, ScalingFit};
use crate::error::{Error, Result};
use crate::fit::log_spaced;
use crate::kernels::{
    envelope_a1, envelope_a2, shear_factor, wave_envelope_unchecked, EnvelopeParams, Model, WaveParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionLemma {
    /// Window `[0, min(A^-θ, t)]`.
    Early,
    /// Window `[min(A^-θ, t), min(1, t)]` against the middle density envelope.
    Middle,
    /// Window `[1, t]` against the late density envelope, `t > 1`.
    Late,
}

impl InteractionLemma {
    pub fn id(self) -> LemmaId {
        match self {
            InteractionLemma::Early => LemmaId::EarlyInteraction,
            InteractionLemma::Middle => LemmaId::MiddleInteraction,
            InteractionLemma::Late => LemmaId::LateInteraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionParams {
    pub shear: Vec<f64>,
    pub times: Vec<f64>,
    pub points: Vec<EvalPoint>,
    pub theta: f64,
    pub gamma: f64,
    pub waves: WaveParams,
    pub resolution: Resolution,
}

impl InteractionParams {
    pub fn new(shear: Vec<f64>, times: Vec<f64>) -> Self {
        InteractionParams {
            shear,
            times,
            points: EvalPoint::default_set(),
            theta: 0.8,
            gamma: 0.4,
            waves: WaveParams::admissible(2.0),
            resolution: Resolution::default(),
        }
    }

    pub(crate) fn validate(&self, which: Option<InteractionLemma>) -> Result<()> {
        if !(self.theta > 2.0 / 3.0 && self.theta < 1.0) {
            return Err(Error::param(format!("theta must lie in (2/3, 1), got {}", self.theta)));
        }
        let gamma_max = if which == Some(InteractionLemma::Late) { 0.5 } else { 1.0 };
        if !(self.gamma > 0.0 && (self.gamma < 1.0) && self.gamma <= gamma_max) {
            return Err(Error::param(format!(
                "gamma must lie in (0, {gamma_max}{}, got {}",
                if gamma_max < 1.0 { "]" } else { ")" },
                self.gamma
            )));
        }
        self.waves.validate()?;
        if !self.waves.spanwise_requirement_holds() || self.waves.find_witnesses().is_none() {
            return Err(Error::param(format!(
                "wave widths C' = {}, C'' = {} violate the interaction constraints for C1 = {}",
                self.waves.c_prime, self.waves.c_dblprime, self.waves.c1
            )));
        }
        if self.shear.is_empty() || self.times.is_empty() || self.points.is_empty() {
            return Err(Error::param("empty shear, time or point grid"));
        }
        if self.shear.iter().any(|a| !(*a > 0.0 && a.is_finite())) || self.times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::param("shear and times must be positive"));
        }
        if which == Some(InteractionLemma::Late) && self.times.iter().any(|t| *t <= 1.0) {
            return Err(Error::param("the late window needs t > 1"));
        }
        self.resolution.validate()
    }

    pub(crate) fn envelope(&self, shear: f64) -> EnvelopeParams {
        EnvelopeParams::new(Model::ParabolicElliptic, shear, self.theta, self.gamma)
    }
}

/// Spatial interaction at source time `sigma`: the unnormalized kernel after
/// `t - sigma` against `W(x0, y0, z0, σ; C', C'', C'')`.
pub(crate) fn spatial_interaction(
    pos: [f64; 3],
    t: f64,
    sigma: f64,
    shear: f64,
    w: &WaveParams,
    res: &Resolution,
) -> Result<f64> {
    let tau = t - sigma;
    if !(tau > 0.0) {
        return Ok(0.0);
    }
    let [x, y, z] = pos;
    let plane = PlaneKernel::wave(x, y, tau, sigma, shear, w.c1);
    let xy = plane.integrate(
        &streamwise(w.c_prime, sigma, shear),
        &transverse(w.c_dblprime, sigma),
        res,
        1,
    )?;
    Ok(xy * line_smoothed(z, 4.0 * w.c1 * tau, &transverse(w.c_dblprime, sigma)))
}

fn kernel_weight(tau: f64, shear: f64) -> f64 {
    tau.powi(-2) / shear_factor(shear, tau).sqrt()
}

/// Left side of one interaction window at `(pos, t)`.
pub fn interaction_lhs(
    which: InteractionLemma,
    pos: [f64; 3],
    t: f64,
    shear: f64,
    p: &InteractionParams,
) -> Result<f64> {
    let early = shear.powf(-p.theta);
    let g = p.gamma;
    let (lo, hi) = match which {
        InteractionLemma::Early => (0.0, early.min(t)),
        InteractionLemma::Middle => (early.min(t), t.min(1.0)),
        InteractionLemma::Late => (1.0, t),
    };
    time_integral(
        |s| {
            let weight = match which {
                InteractionLemma::Early => 1.0,
                InteractionLemma::Middle => {
                    s.powf(-0.5 - 0.5 * g) * (1.0 + shear * shear * s * s).powf(-0.5 + 0.5 * g)
                }
                InteractionLemma::Late => (1.0 + s).powi(-3) * (1.0 + shear * shear * s * s).powf(-1.0 + g),
            };
            Ok(kernel_weight(t - s, shear)
                * weight
                * spatial_interaction(pos, t, s, shear, &p.waves, &p.resolution)?)
        },
        lo,
        hi,
        t,
        &p.resolution,
        "interaction time integral",
    )
}

/// Right side: the window's time envelope times the broadened wave pattern.
pub fn interaction_rhs(which: InteractionLemma, pos: [f64; 3], t: f64, shear: f64, p: &InteractionParams) -> Result<f64> {
    let env = p.envelope(shear);
    let time = match which {
        InteractionLemma::Early => envelope_a1(t, &env)?,
        InteractionLemma::Middle => envelope_a2(t, &env)?,
        InteractionLemma::Late => (1.0 + t).powi(-2) / (1.0 + shear * shear * t * t).sqrt(),
    };
    let w = &p.waves;
    Ok(time * wave_envelope_unchecked(pos[0], pos[1], pos[2], t, [1.5 * w.c_prime, 1.5 * w.c_dblprime, 1.5 * w.c_dblprime], shear))
}

/// Samples one window over the grid. The early window also fits the
/// small-time law at the origin for every shear; the late window fits the
/// shear scaling of the sup ratio when the shear grid spans a decade.
pub fn check_interaction_lemma(which: InteractionLemma, p: &InteractionParams) -> Result<LemmaReport> {
    p.validate(Some(which))?;
    let mut jobs = Vec::new();
    for &a in &p.shear {
        for &t in &p.times {
            for pt in &p.points {
                jobs.push((a, t, *pt));
            }
        }
    }
    let grid: Vec<InequalityCase> = jobs
        .par_iter()
        .map(|&(a, t, pt)| {
            let pos = pt.position(t, a);
            let lhs = interaction_lhs(which, pos, t, a, p)?;
            let rhs = interaction_rhs(which, pos, t, a, p)?;
            let frame = CaseFrame {
                lemma: which.id(),
                shear: a,
                theta: p.theta,
                gamma: Some(p.gamma),
                beta: None,
                alpha: None,
            };
            Ok(frame.case("window", None, t, pos, lhs, rhs))
        })
        .collect::<Result<_>>()?;

    let mut fits = Vec::new();
    match which {
        InteractionLemma::Early => {
            for &a in &p.shear {
                let top = 0.1 * a.powf(-p.theta).min(1.0);
                let ts = log_spaced(top / 100.0, top, 8);
                let lhs: Vec<f64> = ts
                    .par_iter()
                    .map(|&t| interaction_lhs(which, [0.0; 3], t, a, p))
                    .collect::<Result<_>>()?;
                fits.push(ScalingFit::new(&format!("small-t A={a}"), "t", 0.5, &ts, &lhs)?);
            }
        }
        InteractionLemma::Late => {
            let mut shears: Vec<f64> = p.shear.clone();
            shears.sort_by(f64::total_cmp);
            shears.dedup();
            if shears.len() >= 3 && shears[shears.len() - 1] >= 10.0 * shears[0] {
                let sups: Vec<f64> = shears
                    .iter()
                    .map(|a| {
                        grid.iter()
                            .filter(|c| c.shear == *a)
                            .map(|c| c.ratio)
                            .fold(0.0, f64::max)
                    })
                    .collect();
                fits.push(ScalingFit::new("shear scaling", "A", -(1.0 - 2.0 * p.gamma), &shears, &sups)?);
            }
        }
        InteractionLemma::Middle => {}
    }
    Ok(LemmaReport::build(which.id(), serde_json::to_value(p)?, grid, fits, Vec::new()))
}
