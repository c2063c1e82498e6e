//! Simulation configuration (TOML schema) and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{EnvelopeParams, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitOrder {
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Gaussian,
    Exponential,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Sheared,
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// 0: elliptic chemo-attractant, 1: parabolic chemo-attractant.
    pub epsilon: u8,
    pub shear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub dims: usize,
    pub lengths: Vec<f64>,
    pub resolution: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_split")]
    pub split: SplitOrder,
    /// Chemotactic CFL number for the nonlinear substeps.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_split() -> SplitOrder {
    SplitOrder::Strang
}
fn default_cfl() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_true")]
    pub dealias: bool,
    /// Shearing-box remap by integer relabelling of transverse modes.
    #[serde(default)]
    pub remap: bool,
    /// Box doubling once a field reaches the outer half of an axis.
    #[serde(default = "default_true")]
    pub regrid: bool,
    /// Switches the chemotactic coupling off for purely linear runs.
    #[serde(default = "default_true")]
    pub chemotaxis: bool,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            dealias: true,
            remap: false,
            regrid: true,
            chemotaxis: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub shape: Shape,
    /// Decay width `C*`.
    pub width: f64,
    /// Peak value `C0`; ignored when `mass` is given.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// Target discrete mass.
    #[serde(default)]
    pub mass: Option<f64>,
    /// Target maximal gradient magnitude (chemo-attractant only).
    #[serde(default)]
    pub grad_scale: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Relative amplitude of a seeded smooth random perturbation.
    #[serde(default)]
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(flatten)]
    pub density: ProfileSpec,
    #[serde(default)]
    pub c0: Option<ProfileSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default)]
    pub c1_prime: Option<f64>,
    #[serde(default)]
    pub c1_dblprime: Option<f64>,
}

fn default_theta() -> f64 {
    0.8
}
fn default_gamma() -> f64 {
    0.5
}
fn default_c1() -> f64 {
    2.0
}

impl Default for EnvelopeSection {
    fn default() -> Self {
        EnvelopeSection {
            theta: default_theta(),
            gamma: default_gamma(),
            c1: default_c1(),
            c1_prime: None,
            c1_dblprime: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Time between diagnostics rows.
    pub every: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_frames")]
    pub snapshot_frames: Vec<Frame>,
}

fn default_frames() -> Vec<Frame> {
    vec![Frame::Sheared, Frame::Lab]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSection {
    #[serde(default = "default_sup_factor")]
    pub sup_factor: f64,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
}

fn default_sup_factor() -> f64 {
    50.0
}
fn default_tail() -> f64 {
    0.1
}

impl Default for BlowupSection {
    fn default() -> Self {
        BlowupSection {
            sup_factor: default_sup_factor(),
            tail_fraction: default_tail(),
        }
    }
}

/// Full description of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: ModelSection,
    pub domain: DomainSection,
    pub time: TimeSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub blowup: BlowupSection,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse {
            path: "<inline>".into(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&s).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn model(&self) -> Result<Model> {
        Model::from_epsilon(self.model.epsilon)
    }

    pub fn grid(&self) -> Result<Grid> {
        let d = &self.domain;
        if d.lengths.len() != d.dims || d.resolution.len() != d.dims {
            return Err(Error::InvalidConfig(format!(
                "domain.dims = {} but {} lengths and {} resolutions given",
                d.dims,
                d.lengths.len(),
                d.resolution.len()
            )));
        }
        Grid::centered(&d.resolution, &d.lengths)
    }

    /// Envelope constants implied by the configuration; `C*` is the density
    /// decay width and `C0` its amplitude when given.
    pub fn envelope_params(&self) -> Result<EnvelopeParams> {
        let model = self.model()?;
        let e = &self.envelope;
        let c_star = self.initial.density.width;
        let w = EnvelopeParams::min_width(e.c1, c_star);
        Ok(EnvelopeParams {
            model,
            shear: self.model.shear,
            theta: e.theta,
            gamma: e.gamma,
            c0: self.initial.density.amplitude.unwrap_or(1.0),
            c_star,
            c0_star: self
                .initial
                .c0
                .as_ref()
                .and_then(|c| c.grad_scale)
                .unwrap_or(0.0),
            c1: e.c1,
            c1_prime: e.c1_prime.unwrap_or(w),
            c1_dblprime: e.c1_dblprime.unwrap_or(w),
        })
    }

    /// Checks hard invariants; returns advisory warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let model = self.model()?;
        let grid = self.grid()?;
        let shear = self.model.shear;
        if !(shear >= 0.0) || !shear.is_finite() {
            return Err(Error::InvalidConfig(format!("shear must be >= 0, got {shear}")));
        }
        let t = &self.time;
        if !(t.dt > 0.0) || !(t.t_final > 0.0) || !(t.cfl > 0.0) {
            return Err(Error::InvalidConfig("dt, t_final and cfl must be positive".into()));
        }
        if !(self.diagnostics.every > 0.0) {
            return Err(Error::InvalidConfig("diagnostics.every must be positive".into()));
        }
        let dens = &self.initial.density;
        if dens.shape == Shape::Zero {
            // Zero data are allowed for smoke runs.
        } else if !(dens.width > 0.0) {
            return Err(Error::InvalidConfig("initial width must be positive".into()));
        }
        if dens.amplitude.is_some() && dens.mass.is_some() {
            return Err(Error::InvalidConfig("give either amplitude or mass, not both".into()));
        }
        let c_star = dens.width.max(0.0);
        for a in 0..grid.dims {
            if grid.lengths[a] < 20.0 * c_star {
                return Err(Error::InvalidConfig(format!(
                    "box length {} on axis {a} is below 20 C* = {}",
                    grid.lengths[a],
                    20.0 * c_star
                )));
            }
        }
        let streamwise_ok = grid.lengths[0] >= 2.0 * shear * t.t_final * grid.lengths[1];
        if !streamwise_ok {
            if self.numerics.regrid {
                warnings.push(format!(
                    "initial streamwise box {} < 2 A t_final L_y = {}; relying on box doubling",
                    grid.lengths[0],
                    2.0 * shear * t.t_final * grid.lengths[1]
                ));
            } else {
                return Err(Error::InvalidConfig(format!(
                    "streamwise box {} < 2 A t_final L_y = {} with regrid disabled",
                    grid.lengths[0],
                    2.0 * shear * t.t_final * grid.lengths[1]
                )));
            }
        }
        if model == Model::ParabolicParabolic {
            match &self.initial.c0 {
                None => {
                    return Err(Error::InvalidConfig(
                        "epsilon = 1 requires an initial chemo-attractant [initial.c0]".into(),
                    ))
                }
                Some(c) => {
                    let c0_star = c.grad_scale.unwrap_or(0.0);
                    let c0 = dens.amplitude.unwrap_or(1.0);
                    if shear * c0_star >= c0 {
                        warnings.push(format!(
                            "shear window violated: A*C0* = {} >= C0 = {c0}",
                            shear * c0_star
                        ));
                    }
                }
            }
        }
        let e = &self.envelope;
        if !(e.theta > 2.0 / 3.0 && e.theta < 1.0) {
            return Err(Error::InvalidConfig(format!("theta {} outside (2/3, 1)", e.theta)));
        }
        let gamma_ok = match model {
            Model::ParabolicParabolic => e.gamma > 1.0 / 3.0 && e.gamma <= 0.5,
            Model::ParabolicElliptic => e.gamma > 0.0 && e.gamma <= 0.5,
        };
        if !gamma_ok {
            return Err(Error::InvalidConfig(format!(
                "gamma {} outside the admissible range for epsilon = {}",
                e.gamma, self.model.epsilon
            )));
        }
        for tt in &self.diagnostics.snapshot_times {
            if !(*tt >= 0.0 && *tt <= t.t_final) {
                return Err(Error::InvalidConfig(format!("snapshot time {tt} outside run")));
            }
        }
        Ok(warnings)
    }
}
