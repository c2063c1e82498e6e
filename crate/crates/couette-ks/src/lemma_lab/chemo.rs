//! Estimates feeding the chemo-attractant bounds: damped Duhamel windows of
//! the parabolic equation and the Yukawa-type convolution of the elliptic one.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::interaction::{spatial_interaction, InteractionParams};
use super::quadrature::{adaptive, line_smoothed, streamwise, time_integral, transverse, PlaneKernel, Resolution};
use super::{CaseFrame, EvalPoint, InequalityCase, LemmaId, LemmaReport};
use crate::error::{Error, Result};
use crate::kernels::{envelope_a3, wave_envelope_unchecked};
use crate::special::erfcx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChemoLemma {
    /// Damped parabolic windows, both `[min(1,t), t]` and `[min(A^-θ,t), min(1,t)]`.
    Damped,
    /// Elliptic convolution against the wave pattern.
    Elliptic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemoParams {
    /// Shared interaction grid; its wave widths play the role of `(C1', C1'')`.
    pub interaction: InteractionParams,
    /// Singularity order of the damped kernel, in `[3/2, 2]`.
    pub alpha: f64,
    /// Streamwise and transverse widths of the elliptic convolution.
    pub elliptic_widths: [f64; 2],
    /// Random `(x, y, z, t, A)` samples for the elliptic convolution.
    pub random_samples: usize,
    /// Times approaching zero at which the elliptic ratio is also sampled.
    pub small_times: Vec<f64>,
    pub seed: u64,
}

impl ChemoParams {
    pub fn new(interaction: InteractionParams) -> Self {
        ChemoParams {
            interaction,
            alpha: 2.0,
            elliptic_widths: [60.0, 60.0],
            random_samples: 30,
            small_times: vec![1e-1, 1e-2, 1e-3],
            seed: 7,
        }
    }
}

fn damped_weight(tau: f64, shear: f64, alpha: f64) -> f64 {
    (-tau).exp() * tau.powf(-alpha) / (1.0 + shear * shear * tau * tau).sqrt()
}

/// Left sides of the late (`late = true`) and middle damped windows.
pub fn damped_lhs(late: bool, pos: [f64; 3], t: f64, shear: f64, p: &ChemoParams) -> Result<f64> {
    let q = &p.interaction;
    let g = q.gamma;
    let early = shear.powf(-q.theta);
    let (lo, hi) = if late { (t.min(1.0), t) } else { (early.min(t), t.min(1.0)) };
    time_integral(
        |s| {
            let a2 = 1.0 + shear * shear * s * s;
            let weight = if late {
                (1.0 + s).powf(-1.5) * a2.powf(-0.5 + 0.5 * g)
            } else {
                s.powf(-0.25 - 0.25 * g) * a2.powf(-0.25 + 0.25 * g)
            };
            Ok(damped_weight(t - s, shear, p.alpha)
                * weight
                * spatial_interaction(pos, t, s, shear, &q.waves, &q.resolution)?)
        },
        lo,
        hi,
        t,
        &q.resolution,
        "damped time integral",
    )
}

pub fn damped_rhs(late: bool, pos: [f64; 3], t: f64, shear: f64, p: &ChemoParams) -> Result<f64> {
    let q = &p.interaction;
    let w = &q.waves;
    let time = if late {
        ((-0.5 * t).exp() * (1.0 + t).powf(1.0 - p.alpha) + (1.0 + t).powf(-1.5))
            * (1.0 + shear * shear * t * t).powf(-0.5 + 0.5 * q.gamma)
    } else {
        envelope_a3(t, p.alpha, &q.envelope(shear))?
    };
    Ok(time
        * wave_envelope_unchecked(
            pos[0],
            pos[1],
            pos[2],
            t,
            [1.5 * w.c_prime, 1.5 * w.c_dblprime, 1.5 * w.c_dblprime],
            shear,
        ))
}

/// Upper end of the mixture variable; the weight carries `exp(-v²/4)`.
const MIXTURE_CUTOFF: f64 = 16.0;

/// Weight of the Gaussian `exp(-r²/v²)` in the kernel `(1 + 1/r) e^{-r}/r`,
/// after the substitution `s = 1/v` in
/// `e^{-r}/r = (2/√π) ∫ e^{-r²s² - 1/(4s²)} ds` and
/// `e^{-r}/r² = 2 ∫ s erfc(1/(2s)) e^{-r²s²} ds`.
fn mixture_weight(v: f64) -> f64 {
    let h = 0.5 * v;
    (-h * h).exp() * (2.0 / PI.sqrt() + 2.0 / v * erfcx(h)) / (v * v)
}

/// `∭ (1 + 1/r) e^{-r}/r · W(x0, y0, z0, t; C1', C1'', C1'') d³x0` with
/// `r = |x - x0|`. The kernel is expanded as a Gaussian mixture, so every
/// mixture component is a shear-aligned Gaussian convolution with a
/// closed-form streamwise and spanwise part.
pub fn elliptic_lhs(pos: [f64; 3], t: f64, shear: f64, widths: [f64; 2], res: &Resolution) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    let [x, y, z] = pos;
    let [d1, d2] = widths;
    let px = streamwise(d1, t, shear);
    let py = transverse(d2, t);
    let mut failure: Option<Error> = None;
    let value = adaptive(
        |v| {
            let a = v * v;
            // Source profiles are taken in `x0 - (A t / 2) y0`.
            let plane = PlaneKernel {
                x,
                y,
                tau: 0.0,
                sigma: t,
                shear,
                ax: a,
                ay: a,
            };
            match plane.integrate(&px, &py, res, 1) {
                Ok(xy) => mixture_weight(v) * xy * line_smoothed(z, a, &py),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        MIXTURE_CUTOFF,
        &[0.1, 1.0, 3.0],
        res,
        0,
        "mixture integral",
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

pub fn elliptic_rhs(pos: [f64; 3], t: f64, shear: f64, widths: [f64; 2]) -> f64 {
    let [d1, d2] = widths;
    wave_envelope_unchecked(pos[0], pos[1], pos[2], t, [1.5 * d1, 1.5 * d2, 1.5 * d2], shear)
}

/// Random elliptic samples: `t ∈ [0.01, 10]` and `A ∈ [1, 100]` log-uniform,
/// points up to two envelope widths around the shear characteristic.
fn elliptic_samples(p: &ChemoParams) -> Vec<(f64, f64, [f64; 3])> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    (0..p.random_samples)
        .map(|_| {
            let t = 10f64.powf(rng.random_range(-2.0..1.0));
            let a = 10f64.powf(rng.random_range(0.0..2.0));
            let pt = EvalPoint::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
            (t, a, pt.position(t, a))
        })
        .collect()
}

/// Damped: both windows over the interaction grid. Elliptic: random
/// samples plus small-time samples at the grid points for every shear.
pub fn check_c_lemma(which: ChemoLemma, p: &ChemoParams) -> Result<LemmaReport> {
    let q = &p.interaction;
    match which {
        ChemoLemma::Damped => {
            q.validate(None)?;
            if !(1.5..=2.0).contains(&p.alpha) {
                return Err(Error::param(format!("alpha must lie in [3/2, 2], got {}", p.alpha)));
            }
            let mut jobs = Vec::new();
            for &a in &q.shear {
                for &t in &q.times {
                    for pt in &q.points {
                        for late in [true, false] {
                            jobs.push((a, t, *pt, late));
                        }
                    }
                }
            }
            let grid: Vec<InequalityCase> = jobs
                .par_iter()
                .map(|&(a, t, pt, late)| {
                    let pos = pt.position(t, a);
                    let lhs = damped_lhs(late, pos, t, a, p)?;
                    let rhs = damped_rhs(late, pos, t, a, p)?;
                    let frame = CaseFrame {
                        lemma: LemmaId::DampedAttractant,
                        shear: a,
                        theta: q.theta,
                        gamma: Some(q.gamma),
                        beta: None,
                        alpha: Some(p.alpha),
                    };
                    Ok(frame.case(if late { "late" } else { "middle" }, None, t, pos, lhs, rhs))
                })
                .collect::<Result<_>>()?;
            Ok(LemmaReport::build(LemmaId::DampedAttractant, serde_json::to_value(p)?, grid, Vec::new(), Vec::new()))
        }
        ChemoLemma::Elliptic => {
            if p.elliptic_widths.iter().any(|w| !(*w >= 60.0)) {
                return Err(Error::param(format!(
                    "elliptic widths must be at least 60, got {:?}",
                    p.elliptic_widths
                )));
            }
            q.resolution.validate()?;
            let mut jobs: Vec<(&str, f64, f64, [f64; 3])> = elliptic_samples(p)
                .into_iter()
                .map(|(t, a, pos)| ("random", t, a, pos))
                .collect();
            for &a in &q.shear {
                for &t in &p.small_times {
                    for pt in &q.points {
                        jobs.push(("small-t", t, a, pt.position(t, a)));
                    }
                }
            }
            let grid: Vec<InequalityCase> = jobs
                .par_iter()
                .map(|&(series, t, a, pos)| {
                    let lhs = elliptic_lhs(pos, t, a, p.elliptic_widths, &q.resolution)?;
                    let rhs = elliptic_rhs(pos, t, a, p.elliptic_widths);
                    let frame = CaseFrame {
                        lemma: LemmaId::EllipticAttractant,
                        shear: a,
                        theta: q.theta,
                        gamma: None,
                        beta: None,
                        alpha: None,
                    };
                    Ok(frame.case(series, None, t, pos, lhs, rhs))
                })
                .collect::<Result<_>>()?;
            Ok(LemmaReport::build(LemmaId::EllipticAttractant, serde_json::to_value(p)?, grid, Vec::new(), Vec::new()))
        }
    }
}
