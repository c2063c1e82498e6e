use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::solver::{run, DiagnosticsRow, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweptParameter {
    /// The shear amplitude `A`.
    Shear,
    /// The initial density mass.
    Mass,
}

/// Criterion deciding whether a member run counts as a success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    NoBlowup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub values: Vec<f64>,
    #[serde(default = "default_predicate")]
    pub predicate: Predicate,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub base: SimConfig,
}

fn default_predicate() -> Predicate {
    Predicate::NoBlowup
}

impl SweepSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: SweepSpec = toml::from_str(s).map_err(|e| Error::Parse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec; a relative `output` is resolved against the spec's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: SweepSpec = toml::from_str(&s).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })?;
        if let (Some(o), Some(parent)) = (&spec.output, path.parent()) {
            if o.is_relative() {
                spec.output = Some(parent.join(o));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep value list is empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("sweep values must be strictly increasing".into()));
        }
        for v in &self.values {
            self.member(*v)?.validate()?;
        }
        Ok(())
    }

    /// Configuration of the member run at `value`.
    pub fn member(&self, value: f64) -> Result<SimConfig> {
        let mut c = self.base.clone();
        match self.parameter {
            SweptParameter::Shear => c.model.shear = value,
            SweptParameter::Mass => {
                c.initial.density.mass = Some(value);
                c.initial.density.amplitude = None;
            }
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub blowup: bool,
    pub trigger_time: Option<f64>,
    pub final_time: f64,
    pub final_sup: f64,
    pub max_sup: f64,
    /// Late-time slope of `ln ||n||_2` against `ln t` over `t >= 2`.
    pub l2_decay_exponent: Option<f64>,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub parameter: SweptParameter,
    pub rows: Vec<SweepRow>,
    /// Smallest value from which every larger tested value succeeds.
    pub threshold: Option<f64>,
    /// Trigger times (no trigger counting as infinite) are nondecreasing in
    /// the swept value.
    pub trigger_times_nondecreasing: bool,
}

/// Row for one member run, computed from its diagnostics alone.
pub fn summarize_rows(value: f64, rows: &[DiagnosticsRow], predicate: Predicate) -> SweepRow {
    let trigger = rows.iter().find(|r| r.blowup_flag != 0).map(|r| r.t);
    let last = rows.last();
    let late: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= 2.0 && r.l2 > 0.0)
        .map(|r| (r.t.ln(), r.l2.ln()))
        .collect();
    let l2_decay_exponent = if trigger.is_none() {
        least_squares(&late).ok().map(|f| f.slope)
    } else {
        None
    };
    let success = match predicate {
        Predicate::NoBlowup => trigger.is_none(),
    };
    SweepRow {
        value,
        blowup: trigger.is_some(),
        trigger_time: trigger,
        final_time: last.map_or(0.0, |r| r.t),
        final_sup: last.map_or(0.0, |r| r.linf),
        max_sup: rows.iter().map(|r| r.linf).fold(0.0, f64::max),
        l2_decay_exponent,
        success,
    }
}

/// Aggregates member rows (sorted by value) into a summary.
pub fn summarize(parameter: SweptParameter, mut rows: Vec<SweepRow>) -> SweepSummary {
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut threshold = None;
    for r in rows.iter().rev() {
        if r.success {
            threshold = Some(r.value);
        } else {
            break;
        }
    }
    let times: Vec<f64> = rows
        .iter()
        .map(|r| r.trigger_time.unwrap_or(f64::INFINITY))
        .collect();
    SweepSummary {
        parameter,
        trigger_times_nondecreasing: times.windows(2).all(|w| w[1] >= w[0]),
        rows,
        threshold,
    }
}

fn value_tag(v: f64) -> String {
    format!("value_{v}")
}

/// Runs every member (in parallel) and summarizes. With an output directory,
/// each member writes its run bundle under `value_<v>/` and the summary goes
/// to `summary.csv` and `summary.json`.
pub fn suppression_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    spec.validate()?;
    let out = spec.output.as_deref();
    let rows: Vec<SweepRow> = spec
        .values
        .par_iter()
        .map(|v| {
            let cfg = spec.member(*v)?;
            let dir = out.map(|o| o.join(value_tag(*v)));
            let res = run(&cfg, dir.as_deref())?;
            Ok(summarize_rows(*v, &res.diagnostics, spec.predicate))
        })
        .collect::<Result<_>>()?;
    let summary = summarize(spec.parameter, rows);
    if let Some(o) = out {
        write_summary(o, &summary)?;
    }
    Ok(summary)
}

fn write_summary(dir: &Path, s: &SweepSummary) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    w.write_record([
        "value",
        "blowup",
        "trigger_time",
        "final_time",
        "final_sup",
        "max_sup",
        "l2_decay_exponent",
        "success",
    ])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in &s.rows {
        w.write_record([
            r.value.to_string(),
            r.blowup.to_string(),
            opt(r.trigger_time),
            r.final_time.to_string(),
            r.final_sup.to_string(),
            r.max_sup.to_string(),
            opt(r.l2_decay_exponent),
            r.success.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let js = dir.join("summary.json");
    std::fs::write(&js, serde_json::to_string_pretty(s)?).map_err(|e| Error::io(&js, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalMass {
    /// Largest tested mass without blow-up before `t_final`.
    pub below: f64,
    /// Smallest tested mass with blow-up before `t_final`.
    pub above: f64,
    pub runs: usize,
}

impl CriticalMass {
    pub fn estimate(&self) -> f64 {
        0.5 * (self.below + self.above)
    }
}

/// Bisects the initial mass for blow-up before the base configuration's
/// `t_final` on its grid. `lo` must not blow up and `hi` must.
pub fn locate_critical_mass(base: &SimConfig, lo: f64, hi: f64, iterations: usize) -> Result<CriticalMass> {
    let blows = |m: f64| -> Result<bool> {
        let mut c = base.clone();
        c.initial.density.mass = Some(m);
        c.initial.density.amplitude = None;
        Ok(run(&c, None)?.metadata.blowup.is_some())
    };
    if blows(lo)? {
        return Err(Error::param(format!("mass {lo} already blows up")));
    }
    if !blows(hi)? {
        return Err(Error::param(format!("mass {hi} does not blow up")));
    }
    let (mut below, mut above) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (below + above);
        if blows(mid)? {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(CriticalMass {
        below,
        above,
        runs: iterations + 2,
    })
}
