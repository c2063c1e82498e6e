use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Frame;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// JSON sidecar describing a raw little-endian `f64` snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub field: String,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub time: f64,
    #[serde(rename = "A")]
    pub shear: f64,
    pub epsilon: u8,
    pub frame: Frame,
    /// Stored-coordinate tilt `X = x - tilt y` (0 in the lab frame).
    pub tilt: f64,
}

fn sidecar(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `<stem>.bin` and `<stem>.json`; returns the binary's path.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    field: &Field,
    name: &str,
    frame: Frame,
    shear: f64,
    epsilon: u8,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bin = dir.join(format!("{stem}.bin"));
    let g = &field.grid;
    let d = g.dims;
    let meta = SnapshotMeta {
        field: name.to_owned(),
        shape: g.shape[..d].to_vec(),
        spacing: (0..d).map(|a| g.spacing(a)).collect(),
        origin: g.origin[..d].to_vec(),
        time: field.time,
        shear,
        epsilon,
        frame,
        tilt: field.tilt,
    };
    let mut bytes = Vec::with_capacity(8 * field.values.len());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(&bin).map_err(|e| Error::io(&bin, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(&bin, e))?;
    let js = sidecar(&bin);
    std::fs::write(&js, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::io(&js, e))?;
    Ok(bin)
}

pub fn read_snapshot(bin: &Path) -> Result<(Field, SnapshotMeta)> {
    let js = sidecar(bin);
    let text = std::fs::read_to_string(&js).map_err(|e| Error::io(&js, e))?;
    let meta: SnapshotMeta = serde_json::from_str(&text)?;
    let bytes = std::fs::read(bin).map_err(|e| Error::io(bin, e))?;
    let count: usize = meta.shape.iter().product();
    if bytes.len() != 8 * count {
        return Err(Error::Parse {
            path: bin.into(),
            message: format!("{} bytes for {count} values", bytes.len()),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let lengths: Vec<f64> = meta
        .shape
        .iter()
        .zip(&meta.spacing)
        .map(|(n, h)| *n as f64 * h)
        .collect();
    let grid = Grid::new(&meta.shape, &lengths, &meta.origin)?;
    Ok((
        Field {
            grid,
            values,
            time: meta.time,
            tilt: meta.tilt,
        },
        meta,
    ))
}
