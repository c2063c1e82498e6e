use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{chi, envelope_a, Model};
use crate::solver::{read_diagnostics, ChemoRow, DiagnosticsRow, RunMetadata};

/// Files persisted by one run.
#[derive(Debug, Clone)]
pub struct RunBundle {
    pub metadata: RunMetadata,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub chemo: Vec<ChemoRow>,
}

impl RunBundle {
    pub fn load(dir: &Path) -> Result<Self> {
        let mpath = dir.join("run.json");
        let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let metadata: RunMetadata = serde_json::from_str(&text)?;
        let diagnostics = read_diagnostics(&dir.join("diagnostics.csv"))?;
        let cpath = dir.join("chemoattractant.csv");
        let mut r = csv::Reader::from_path(&cpath).map_err(|e| Error::Parse {
            path: cpath.clone(),
            message: e.to_string(),
        })?;
        let chemo = r
            .deserialize()
            .map(|row| row.map_err(Error::from))
            .collect::<Result<Vec<ChemoRow>>>()?;
        Ok(RunBundle {
            metadata,
            diagnostics,
            chemo,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub n_sup_pp: f64,
    pub n_sup_pe: f64,
    pub c_sup_pp: f64,
    pub c_sup_pe: f64,
    /// `sup |c| / (A(t) * allowance)` with allowance `max(1, A^{1/2-γ/2} χ(t))`
    /// for the parabolic attractant and 1 for the elliptic one.
    pub c_ratio_pp: f64,
    pub c_ratio_pe: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// Largest `|n_sup_pp - n_sup_pe|` over the common samples.
    pub max_n_sup_difference: f64,
    pub late_allowance: f64,
    pub warnings_pp: Vec<String>,
    pub window_violated: bool,
}

fn same_setup(pp: &RunMetadata, pe: &RunMetadata) -> Result<()> {
    let (a, b) = (&pp.config, &pe.config);
    if a.domain != b.domain {
        return Err(Error::GridMismatch("runs use different domains".into()));
    }
    if a.model.shear != b.model.shear || a.initial.density != b.initial.density {
        return Err(Error::InvalidConfig("runs differ in shear or initial density".into()));
    }
    if a.model.epsilon != 1 || b.model.epsilon != 0 {
        return Err(Error::InvalidConfig("expected a parabolic (epsilon = 1) and an elliptic (epsilon = 0) run".into()));
    }
    Ok(())
}

/// Side-by-side sup-norm trajectories of matched parabolic and elliptic runs.
pub fn pp_vs_pe(pp: &RunBundle, pe: &RunBundle) -> Result<Comparison> {
    same_setup(&pp.metadata, &pe.metadata)?;
    let cfg = &pp.metadata.config;
    let mut params = cfg.envelope_params()?;
    params.model = Model::ParabolicParabolic;
    let a = cfg.model.shear;
    let late_allowance = a.powf(0.5 - 0.5 * params.gamma);
    let mut rows = Vec::new();
    let mut max_diff: f64 = 0.0;
    let n = pp.diagnostics.len().min(pe.diagnostics.len());
    for i in 0..n {
        let (dp, de) = (&pp.diagnostics[i], &pe.diagnostics[i]);
        if (dp.t - de.t).abs() > 1e-9 * dp.t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("sample times differ: {} vs {}", dp.t, de.t)));
        }
        max_diff = max_diff.max((dp.linf - de.linf).abs());
        if dp.t <= 0.0 || a <= 0.0 {
            continue;
        }
        let env = envelope_a(dp.t, &params)?;
        let allow = (late_allowance * chi(dp.t)).max(1.0);
        let (cp, ce) = (pp.chemo[i].c_linf, pe.chemo[i].c_linf);
        rows.push(ComparisonRow {
            t: dp.t,
            n_sup_pp: dp.linf,
            n_sup_pe: de.linf,
            c_sup_pp: cp,
            c_sup_pe: ce,
            c_ratio_pp: cp / (env * allow),
            c_ratio_pe: ce / env,
        });
    }
    let window_violated = pp
        .metadata
        .warnings
        .iter()
        .any(|w| w.contains("shear window"));
    Ok(Comparison {
        rows,
        max_n_sup_difference: max_diff,
        late_allowance,
        warnings_pp: pp.metadata.warnings.clone(),
        window_violated,
    })
}

pub fn pp_vs_pe_dirs(pp: &Path, pe: &Path) -> Result<Comparison> {
    pp_vs_pe(&RunBundle::load(pp)?, &RunBundle::load(pe)?)
}
