//! Pseudo-spectral solver in coordinates moving with the shear.
//!
//! The linear part (Couette transport plus diffusion, and the `-c` reaction of
//! the parabolic chemo-attractant) is applied by its exact Fourier
//! multiplier; chemotaxis is split off and advanced by explicit midpoint
//! substeps.

mod config;
mod diagnostics;
mod sim;
mod snapshot;
mod spectral;

pub use config::{
    BlowupSection, DiagnosticsSection, DomainSection, EnvelopeSection, Frame, InitialSection,
    ModelSection, NumericsSection, ProfileSpec, Shape, SimConfig, SplitOrder, TimeSection,
};
pub use diagnostics::{read_diagnostics, write_diagnostics, DiagnosticsRow, DIAGNOSTICS_HEADER};
pub use sim::{initial_fields, run, BlowupEvent, ChemoRow, RegridEvent, RunMetadata, RunOutput, Simulation};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotMeta};
pub use spectral::{dissipation_exponent, Damping, ShearSpectral};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

fn check_same(a: &Field, b: &Field) -> Result<()> {
    if !a.grid.same_sampling(&b.grid) {
        return Err(Error::GridMismatch(format!(
            "shapes {:?} vs {:?}",
            a.grid.shape, b.grid.shape
        )));
    }
    if (a.tilt - b.tilt).abs() > 1e-12 * a.tilt.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "fields stored at different tilts {} and {}",
            a.tilt, b.tilt
        )));
    }
    Ok(())
}

/// Exact linear flow over `dt`; the result's tilt advances by `shear * dt`.
pub fn linear_step(field: &Field, dt: f64, shear: f64, damping: Damping) -> Result<Field> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param(format!("dt must be positive, got {dt}")));
    }
    if !field.is_finite() {
        return Err(Error::domain("field contains non-finite values"));
    }
    let ops = ShearSpectral::new(&field.grid, false);
    let mut spec = ops.to_spectral(&field.values);
    ops.propagate(&mut spec, field.tilt, dt, shear, damping);
    Ok(Field {
        grid: field.grid.clone(),
        values: ops.to_physical(&spec),
        time: field.time + dt,
        tilt: field.tilt + shear * dt,
    })
}

/// Chemo-attractant of the elliptic model, `c = (1 - Δ)^{-1} n`.
pub fn elliptic_solve_c(n: &Field) -> Result<Field> {
    if !n.is_finite() {
        return Err(Error::domain("density contains non-finite values"));
    }
    let ops = ShearSpectral::new(&n.grid, false);
    let c_hat = ops.screened_poisson(&ops.to_spectral(&n.values), n.tilt);
    Ok(Field {
        values: ops.to_physical(&c_hat),
        ..n.clone()
    })
}

/// Chemotactic term `-∇·(n ∇c)` with physical gradients at the fields' tilt.
pub fn nonlinear_rhs(n: &Field, c: &Field, dealias: bool) -> Result<Field> {
    check_same(n, c)?;
    let ops = ShearSpectral::new(&n.grid, dealias);
    let (rhs, _) = ops.chemotaxis(&ops.to_spectral(&n.values), &ops.to_spectral(&c.values), n.tilt);
    Ok(Field {
        values: ops.to_physical(&rhs),
        ..n.clone()
    })
}

/// Maps a stored field to laboratory coordinates (`tilt = 0`).
pub fn to_lab(field: &Field) -> Field {
    let ops = ShearSpectral::new(&field.grid, false);
    Field {
        values: ops.retilt(&field.values, field.tilt, 0.0),
        tilt: 0.0,
        ..field.clone()
    }
}

/// Re-expresses a field at another tilt.
pub fn retilt(field: &Field, tilt: f64) -> Field {
    let ops = ShearSpectral::new(&field.grid, false);
    Field {
        values: ops.retilt(&field.values, field.tilt, tilt),
        tilt,
        ..field.clone()
    }
}

/// Doubles the extent of `axis` keeping the point count, by taking every
/// second sample of the central half and zero-filling the new outer half.
/// Lossless when the field is band-limited to a quarter of the resolution
/// and negligible outside the central half.
pub fn coarsen_axis(values: &[f64], grid: &Grid, axis: usize) -> Result<(Vec<f64>, Grid)> {
    if axis >= grid.dims {
        return Err(Error::param(format!("axis {axis} outside a {}-D grid", grid.dims)));
    }
    let s = grid.shape;
    let n = s[axis];
    let mut lengths = grid.lengths;
    let mut origin = grid.origin;
    let center = grid.origin[axis] + 0.5 * grid.lengths[axis];
    lengths[axis] *= 2.0;
    origin[axis] = center - lengths[axis] * 0.5;
    let new_grid = Grid::new(&s[..grid.dims], &lengths[..grid.dims], &origin[..grid.dims])?;
    let mut out = vec![0.0; values.len()];
    for (idx, v) in out.iter_mut().enumerate() {
        let (i, j, l) = grid.unravel(idx);
        let mut src = [i, j, l];
        let m = src[axis];
        if 4 * m < n || 4 * m >= 3 * n {
            continue;
        }
        src[axis] = 2 * m - n / 2;
        *v = values[grid.index(src[0], src[1], src[2])];
    }
    Ok((out, new_grid))
}
