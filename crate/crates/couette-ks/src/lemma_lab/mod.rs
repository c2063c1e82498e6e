//! Numerical verification of the pointwise convolution estimates.
//!
//! Each estimate is sampled on a parameter grid as a set of
//! [`InequalityCase`]s (left side by quadrature, right side in closed form)
//! and summarized in a [`LemmaReport`]: empirical sup of the ratio, its sups
//! over the three time regimes, and log-log fits of the scaling laws the
//! estimate predicts.

mod appendix;
mod bootstrap;
mod chemo;
mod grid;
mod initial;
mod interaction;
pub(crate) mod quadrature;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{log_log_fit, LineFit};

pub use appendix::{
    appendix_branches, appendix_envelope, appendix_lhs, check_appendix_lemma, AppendixLemma, AppendixParams,
};
pub use bootstrap::{estimate_bootstrap_constants, BootstrapConfig, BootstrapReport, BootstrapSample};
pub use chemo::{check_c_lemma, damped_lhs, damped_rhs, elliptic_lhs, elliptic_rhs, ChemoLemma, ChemoParams};
pub use grid::{run_lemma, LemmaGrid, TimeSpec};
pub use initial::{
    check_initial_propagation, initial_envelope, initial_lhs, Convolution, InitialParams, WidthSet,
};
pub use interaction::{
    check_interaction_lemma, interaction_lhs, interaction_rhs, InteractionLemma, InteractionParams,
};
pub use quadrature::Resolution;

/// Largest admissible spread between per-regime sup ratios.
pub const REGIME_BAND: f64 = 8.0;
/// Allowance added to the 95% interval of a fitted exponent.
pub const EXPONENT_MARGIN: f64 = 0.15;
/// Minimum density of fit samples.
pub const SAMPLES_PER_DECADE: f64 = 8.0;
/// Series named with this prefix are reported but do not enter the verdict.
pub const INFO_PREFIX: &str = "branch:";

/// Which estimate a case or report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "L2.1")]
    InitialPropagation,
    #[serde(rename = "L2.3")]
    EarlyInteraction,
    #[serde(rename = "L2.4")]
    MiddleInteraction,
    #[serde(rename = "L2.5")]
    LateInteraction,
    #[serde(rename = "L2.6")]
    DampedAttractant,
    #[serde(rename = "L2.7")]
    EllipticAttractant,
    #[serde(rename = "A.1")]
    SpanwiseInteraction,
    #[serde(rename = "A.2a")]
    GaussGauss,
    #[serde(rename = "A.2b")]
    ExpExp,
    #[serde(rename = "A.2c")]
    GaussExp,
    #[serde(rename = "A.2d")]
    ExpGauss,
}

impl LemmaId {
    pub const ALL: [LemmaId; 11] = [
        LemmaId::InitialPropagation,
        LemmaId::EarlyInteraction,
        LemmaId::MiddleInteraction,
        LemmaId::LateInteraction,
        LemmaId::DampedAttractant,
        LemmaId::EllipticAttractant,
        LemmaId::SpanwiseInteraction,
        LemmaId::GaussGauss,
        LemmaId::ExpExp,
        LemmaId::GaussExp,
        LemmaId::ExpGauss,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LemmaId::InitialPropagation => "L2.1",
            LemmaId::EarlyInteraction => "L2.3",
            LemmaId::MiddleInteraction => "L2.4",
            LemmaId::LateInteraction => "L2.5",
            LemmaId::DampedAttractant => "L2.6",
            LemmaId::EllipticAttractant => "L2.7",
            LemmaId::SpanwiseInteraction => "A.1",
            LemmaId::GaussGauss => "A.2a",
            LemmaId::ExpExp => "A.2b",
            LemmaId::GaussExp => "A.2c",
            LemmaId::ExpGauss => "A.2d",
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<&str> = LemmaId::ALL.iter().map(|i| i.as_str()).collect();
                Error::param(format!("unknown lemma id {s:?}; expected one of {known:?}"))
            })
    }
}

/// Evaluation point relative to the shear characteristic `x = (A t / 2) y`:
/// `x = (A t / 2) y + off_core · sqrt(t (1 + A² t²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalPoint {
    pub y: f64,
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub off_core: f64,
}

impl EvalPoint {
    pub const ORIGIN: EvalPoint = EvalPoint {
        y: 0.0,
        z: 0.0,
        off_core: 0.0,
    };

    pub fn new(y: f64, z: f64, off_core: f64) -> Self {
        EvalPoint { y, z, off_core }
    }

    pub fn position(&self, t: f64, shear: f64) -> [f64; 3] {
        let at = shear * t;
        let x = 0.5 * at * self.y + self.off_core * (t * (1.0 + at * at)).sqrt();
        [x, self.y, self.z]
    }

    /// Origin, two core points and two points 2 and 4 widths off the core.
    pub fn default_set() -> Vec<EvalPoint> {
        vec![
            EvalPoint::ORIGIN,
            EvalPoint::new(1.0, 0.0, 0.0),
            EvalPoint::new(3.0, 1.0, 0.0),
            EvalPoint::new(1.0, 0.5, 2.0),
            EvalPoint::new(0.0, 0.0, 4.0),
        ]
    }
}

/// One sampled inequality `lhs ≤ C · rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCase {
    pub lemma: LemmaId,
    /// Component of the estimate (convolution, window or min-branch).
    pub series: String,
    /// Time regime, 1 to 3.
    pub regime: u8,
    pub shear: f64,
    pub theta: f64,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `lhs / rhs`; an exact zero left side gives 0 whatever the right side, and
/// a positive left side over a vanishing right side is recorded as infinite.
pub fn case_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    }
}

/// Common parameter point shared by a batch of cases.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CaseFrame {
    pub lemma: LemmaId,
    pub shear: f64,
    pub theta: f64,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
}

impl CaseFrame {
    pub fn case(
        &self,
        series: &str,
        sigma: Option<f64>,
        t: f64,
        pos: [f64; 3],
        lhs: f64,
        rhs: f64,
    ) -> InequalityCase {
        InequalityCase {
            lemma: self.lemma,
            series: series.to_owned(),
            regime: crate::kernels::regime(t, self.shear, self.theta) as u8 + 1,
            shear: self.shear,
            theta: self.theta,
            gamma: self.gamma,
            beta: self.beta,
            alpha: self.alpha,
            sigma,
            t,
            x: pos[0],
            y: pos[1],
            z: pos[2],
            lhs,
            rhs,
            ratio: case_ratio(lhs, rhs),
        }
    }
}

/// Ratio statistics of one component of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub cases: usize,
    pub sup_ratio: f64,
    /// Sup ratio per time regime over cases with a nonzero left side;
    /// `None` when the regime holds no such case.
    pub regime_sups: [Option<f64>; 3],
    /// Largest over smallest nonzero regime sup.
    pub band: f64,
    pub band_ok: bool,
    /// Cases on a branch whose right side vanishes identically.
    pub zero_branch_cases: usize,
    pub zero_branch_exact: bool,
}

impl SeriesSummary {
    fn from_cases(name: &str, cases: &[&InequalityCase]) -> Self {
        let sup_ratio = cases.iter().map(|c| c.ratio).fold(0.0, nan_max);
        let mut regime_sups = [None; 3];
        for c in cases.iter().filter(|c| c.lhs > 0.0) {
            let r = &mut regime_sups[(c.regime - 1) as usize];
            *r = Some(r.map_or(c.ratio, |v: f64| nan_max(v, c.ratio)));
        }
        let positive: Vec<f64> = regime_sups.iter().flatten().copied().filter(|v| *v > 0.0).collect();
        let band = if positive.is_empty() {
            1.0
        } else {
            let hi = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        };
        let zero: Vec<&&InequalityCase> = cases.iter().filter(|c| c.rhs == 0.0).collect();
        SeriesSummary {
            name: name.to_owned(),
            cases: cases.len(),
            sup_ratio,
            regime_sups,
            band,
            band_ok: band.is_finite() && band <= REGIME_BAND,
            zero_branch_cases: zero.len(),
            zero_branch_exact: zero.iter().all(|c| c.lhs == 0.0),
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Fitted power law of some quantity against one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub label: String,
    /// Name of the abscissa (`t`, `A`, `sigma`, ...).
    pub variable: String,
    pub predicted: f64,
    pub fit: LineFit,
    pub samples_per_decade: f64,
    pub admitted: bool,
}

impl ScalingFit {
    /// Log-log fit of `ys` against `xs`, judged against `predicted`.
    pub fn new(label: &str, variable: &str, predicted: f64, xs: &[f64], ys: &[f64]) -> Result<Self> {
        let fit = log_log_fit(xs, ys)?;
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(0.0, f64::max);
        let decades = (hi / lo).log10();
        let samples_per_decade = if decades > 0.0 {
            (xs.len() as f64 - 1.0) / decades
        } else {
            0.0
        };
        Ok(ScalingFit {
            label: label.to_owned(),
            variable: variable.to_owned(),
            predicted,
            admitted: samples_per_decade >= SAMPLES_PER_DECADE && fit.admits(predicted, EXPONENT_MARGIN),
            fit,
            samples_per_decade,
        })
    }
}

/// Outcome of one estimate over its parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    /// Parameters the grid was generated from.
    pub parameters: serde_json::Value,
    pub cases: usize,
    pub sup_ratio: f64,
    /// Per-regime sup over all series.
    pub regime_sups: [Option<f64>; 3],
    pub series: Vec<SeriesSummary>,
    pub fits: Vec<ScalingFit>,
    pub flags: Vec<String>,
    pub pass: bool,
    #[serde(skip)]
    pub grid: Vec<InequalityCase>,
}

impl LemmaReport {
    /// Summarizes cases in their given order. Passing needs finite ratios,
    /// every judged series within the regime band, exact zero branches and
    /// every fit admitted; `branch:` series are informational.
    pub fn build(
        lemma: LemmaId,
        parameters: serde_json::Value,
        grid: Vec<InequalityCase>,
        fits: Vec<ScalingFit>,
        flags: Vec<String>,
    ) -> Self {
        let mut names: Vec<&str> = Vec::new();
        for c in &grid {
            if !names.contains(&c.series.as_str()) {
                names.push(&c.series);
            }
        }
        let series: Vec<SeriesSummary> = names
            .iter()
            .map(|n| {
                let cs: Vec<&InequalityCase> = grid.iter().filter(|c| c.series == *n).collect();
                SeriesSummary::from_cases(n, &cs)
            })
            .collect();
        let judged = || series.iter().filter(|s| !s.name.starts_with(INFO_PREFIX));
        let sup_ratio = judged().map(|s| s.sup_ratio).fold(0.0, nan_max);
        let mut regime_sups = [None; 3];
        for s in judged() {
            for (k, v) in s.regime_sups.iter().enumerate() {
                if let Some(v) = v {
                    regime_sups[k] = Some(regime_sups[k].map_or(*v, |w: f64| nan_max(w, *v)));
                }
            }
        }
        let pass = !grid.is_empty()
            && sup_ratio.is_finite()
            && judged().all(|s| s.band_ok && s.zero_branch_exact)
            && fits.iter().all(|f| f.admitted);
        LemmaReport {
            lemma,
            parameters,
            cases: grid.len(),
            sup_ratio,
            regime_sups,
            series,
            fits,
            flags,
            pass,
            grid,
        }
    }

    pub fn series(&self, name: &str) -> Option<&SeriesSummary> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn fit(&self, label: &str) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.label == label)
    }

    /// Writes the case grid as CSV.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })?;
        for c in &self.grid {
            w.serialize(c)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Writes the summary (everything but the case grid) as JSON.
    pub fn write_summary(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

pub fn read_cases(path: &Path) -> Result<Vec<InequalityCase>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })?;
    r.deserialize().map(|c| c.map_err(Error::from)).collect()
}
