use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIAGNOSTICS_HEADER: &str = "t,mass,l2,l4,linf,min_n,envelope_ratio,tail_frac,blowup_flag";

/// One sample of the density's norms and blow-up indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub min_n: f64,
    /// `sup |n| / W` over the grid, with `W` the wave envelope.
    pub envelope_ratio: f64,
    /// Spectral energy fraction in the top octave.
    pub tail_frac: f64,
    pub blowup_flag: u8,
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(DIAGNOSTICS_HEADER.split(','))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.into(),
        message: e.to_string(),
    })?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != DIAGNOSTICS_HEADER {
        return Err(Error::Parse {
            path: path.into(),
            message: format!("unexpected header {}", header.join(",")),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
