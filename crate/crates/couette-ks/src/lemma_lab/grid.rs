//! Parameter-grid files for `verify-lemmas`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::appendix::{check_appendix_lemma, AppendixLemma, AppendixParams};
use super::chemo::{check_c_lemma, ChemoLemma, ChemoParams};
use super::initial::{check_initial_propagation, InitialParams};
use super::interaction::{check_interaction_lemma, InteractionLemma, InteractionParams};
use super::{EvalPoint, LemmaId, LemmaReport, Resolution};
use crate::error::{Error, Result};
use crate::fit::log_spaced;
use crate::kernels::WaveParams;

/// Sample times: an explicit list or a logarithmic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    List(Vec<f64>),
    Range { from: f64, to: f64, per_decade: usize },
}

impl TimeSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            TimeSpec::List(v) => Ok(v.clone()),
            TimeSpec::Range { from, to, per_decade } => {
                if !(*from > 0.0 && to > from && *per_decade > 0) {
                    return Err(Error::param(format!(
                        "time range needs 0 < from < to and per_decade > 0, got {from}..{to} at {per_decade}"
                    )));
                }
                Ok(log_spaced(*from, *to, *per_decade))
            }
        }
    }
}

/// Grid file. Unset fields take each estimate's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaGrid {
    pub shear: Vec<f64>,
    pub times: TimeSpec,
    #[serde(default)]
    pub points: Option<Vec<EvalPoint>>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub sigma_fractions: Option<Vec<f64>>,
    /// Kernel width `C1`; the wave widths are the smallest admissible ones.
    #[serde(default)]
    pub c1: Option<f64>,
    /// Data decay width of the initial propagation.
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default)]
    pub elliptic_widths: Option<[f64; 2]>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub small_times: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub resolution: Option<Resolution>,
}

impl LemmaGrid {
    pub fn new(shear: Vec<f64>, times: TimeSpec) -> Self {
        LemmaGrid {
            shear,
            times,
            points: None,
            theta: None,
            gamma: None,
            beta: None,
            alpha: None,
            sigma_fractions: None,
            c1: None,
            c_star: None,
            elliptic_widths: None,
            samples: None,
            small_times: None,
            seed: None,
            resolution: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    fn waves(&self) -> WaveParams {
        WaveParams::admissible(self.c1.unwrap_or(2.0))
    }

    fn interaction(&self) -> Result<InteractionParams> {
        let mut p = InteractionParams::new(self.shear.clone(), self.times.values()?);
        p.waves = self.waves();
        if let Some(v) = &self.points {
            p.points = v.clone();
        }
        if let Some(v) = self.theta {
            p.theta = v;
        }
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(v) = self.resolution {
            p.resolution = v;
        }
        Ok(p)
    }
}

/// Runs one estimate over a grid.
pub fn run_lemma(id: LemmaId, grid: &LemmaGrid) -> Result<LemmaReport> {
    match id {
        LemmaId::InitialPropagation => {
            let beta = grid
                .beta
                .ok_or_else(|| Error::param("the initial propagation grid needs beta"))?;
            let mut p = InitialParams::new(beta, grid.shear.clone(), grid.times.values()?);
            if let Some(v) = &grid.points {
                p.points = v.clone();
            }
            if let Some(v) = grid.theta {
                p.theta = v;
            }
            if let Some(v) = grid.c_star {
                p.c_star = v;
            }
            if let Some(v) = grid.c1 {
                p.c1 = v;
            }
            if let Some(v) = grid.resolution {
                p.resolution = v;
            }
            check_initial_propagation(&p)
        }
        LemmaId::EarlyInteraction => check_interaction_lemma(InteractionLemma::Early, &grid.interaction()?),
        LemmaId::MiddleInteraction => check_interaction_lemma(InteractionLemma::Middle, &grid.interaction()?),
        LemmaId::LateInteraction => check_interaction_lemma(InteractionLemma::Late, &grid.interaction()?),
        LemmaId::DampedAttractant | LemmaId::EllipticAttractant => {
            let mut p = ChemoParams::new(grid.interaction()?);
            if let Some(v) = grid.alpha {
                p.alpha = v;
            }
            if let Some(v) = grid.elliptic_widths {
                p.elliptic_widths = v;
            }
            if let Some(v) = grid.samples {
                p.random_samples = v;
            }
            if let Some(v) = &grid.small_times {
                p.small_times = v.clone();
            }
            if let Some(v) = grid.seed {
                p.seed = v;
            }
            let which = if id == LemmaId::DampedAttractant {
                ChemoLemma::Damped
            } else {
                ChemoLemma::Elliptic
            };
            check_c_lemma(which, &p)
        }
        _ => {
            let which = AppendixLemma::from_id(id).expect("remaining ids are appendix estimates");
            let mut p = AppendixParams::new(grid.shear.clone(), grid.times.values()?);
            p.waves = grid.waves();
            if let Some(v) = &grid.points {
                p.points = v.clone();
            }
            if let Some(v) = &grid.sigma_fractions {
                p.sigma_fractions = v.clone();
            }
            if let Some(v) = grid.theta {
                p.theta = v;
            }
            if let Some(v) = grid.resolution {
                p.resolution = v;
            }
            check_appendix_lemma(which, &p)
        }
    }
}
