//! Empirical constants of the a-priori envelope for a finished solver run.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::kernels::{envelope_a, wave_envelope, wave_envelope_2d, EnvelopeParams};
use crate::solver::{read_snapshot, to_lab, RunMetadata, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    /// Output directory of a solver run (`run.json` plus lab-frame snapshots).
    pub run_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSample {
    pub t: f64,
    /// `sup |n| / (A(t) W)` of the stored density.
    pub realized: f64,
    /// Same for the linear evolution of the initial density, divided by `C0`.
    pub linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub run_dir: PathBuf,
    pub shear: f64,
    pub dims: usize,
    /// Exponent used in the time envelope.
    pub gamma: f64,
    /// Initial sup `C0`.
    pub c0: f64,
    /// Linear constant `N0`.
    pub n0: f64,
    /// Realized constant over all snapshots.
    pub realized: f64,
    /// `2 N0 C0`.
    pub closure_bound: f64,
    pub closure_holds: bool,
    pub samples: Vec<BootstrapSample>,
}

/// `sup |n| / (A(t) W)` for a density in laboratory coordinates.
fn envelope_sup(n: &Field, t: f64, p: &EnvelopeParams) -> Result<f64> {
    let g = &n.grid;
    let xs = g.coords(0);
    let ys = g.coords(1);
    let zs = if g.dims == 3 { g.coords(2) } else { vec![0.0] };
    let a = envelope_a(t, p)?;
    let d = [p.c1_prime, p.c1_dblprime];
    let worst = n
        .values
        .par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, j, l) = g.unravel(idx);
            let w = if g.dims == 3 {
                wave_envelope(xs[i], ys[j], zs[l], t, [d[0], d[1], d[1]], p.shear)
            } else {
                wave_envelope_2d(xs[i], ys[j], t, d, p.shear)
            }?;
            Ok::<f64, Error>(v.abs() / w)
        })
        .try_reduce(|| 0.0, |x, y| Ok(f64::max(x, y)))?;
    Ok(worst / a)
}

fn lab_snapshots(dir: &Path, meta: &RunMetadata) -> Vec<PathBuf> {
    meta.snapshots
        .iter()
        .filter(|s| s.starts_with("n_t") && s.ends_with("_lab.bin"))
        .map(|s| dir.join("snapshots").join(s))
        .collect()
}

/// Realized envelope constant of the run against the linear constant `N0`
/// of its initial density, evolved again without chemotaxis to the same
/// snapshot times. In two dimensions the time envelope is taken at
/// `γ = 1/2`, for which the planar decay matches it.
pub fn estimate_bootstrap_constants(config: &BootstrapConfig) -> Result<BootstrapReport> {
    let dir = &config.run_dir;
    let mpath = dir.join("run.json");
    let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let meta: RunMetadata = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: mpath.clone(),
        message: e.to_string(),
    })?;
    let cfg = &meta.config;
    let mut params = cfg.envelope_params()?;
    let dims = cfg.domain.dims;
    if dims == 2 {
        params.gamma = 0.5;
    }
    let mut snaps = Vec::new();
    for path in lab_snapshots(dir, &meta) {
        let (field, _) = read_snapshot(&path)?;
        if field.time > 0.0 {
            snaps.push(field);
        }
    }
    if snaps.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} lists no lab-frame density snapshot at t > 0",
            mpath.display()
        )));
    }
    snaps.sort_by(|a, b| a.time.total_cmp(&b.time));
    let c0 = meta.initial_sup;
    if !(c0 > 0.0) {
        return Err(Error::InsufficientData("run has a vanishing initial density".into()));
    }

    let mut linear_cfg = cfg.clone();
    linear_cfg.numerics.chemotaxis = false;
    let mut sim = Simulation::new(linear_cfg)?;
    let mut samples = Vec::with_capacity(snaps.len());
    for n in &snaps {
        let t = n.time;
        sim.advance_to(t)?;
        let linear = envelope_sup(&to_lab(&sim.density()), t, &params)? / c0;
        samples.push(BootstrapSample {
            t,
            realized: envelope_sup(n, t, &params)?,
            linear,
        });
    }
    let n0 = samples.iter().map(|s| s.linear).fold(0.0, f64::max);
    let realized = samples.iter().map(|s| s.realized).fold(0.0, f64::max);
    let closure_bound = 2.0 * n0 * c0;
    Ok(BootstrapReport {
        run_dir: dir.clone(),
        shear: cfg.model.shear,
        dims,
        gamma: params.gamma,
        c0,
        n0,
        realized,
        closure_bound,
        closure_holds: realized <= closure_bound,
        samples,
    })
}
