//! Python bindings. Structured results cross the boundary as JSON and come
//! back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use couette_ks::experiments::{decay_fit_dir, pp_vs_pe_dirs, suppression_sweep, SweepSpec};
use couette_ks::kernels::{
    envelope_a, grad_green_couette, green_couette_2d, green_couette_3d, wave_envelope, yukawa, EnvelopeParams,
    KernelQuery, Model,
};
use couette_ks::lemma_lab::{estimate_bootstrap_constants, run_lemma, BootstrapConfig, LemmaGrid, LemmaId};
use couette_ks::solver::{read_diagnostics, read_snapshot, run, SimConfig};

create_exception!(couette_ks, CouetteError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    CouetteError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn query(x: f64, y: f64, z: f64, t: f64, y0: f64, shear: f64) -> KernelQuery {
    KernelQuery::new(x, y, z, t, y0, shear)
}

/// Three-dimensional Couette heat kernel.
#[pyfunction]
#[pyo3(signature = (x, y, z, t, y0=0.0, shear=0.0))]
fn green_3d(x: f64, y: f64, z: f64, t: f64, y0: f64, shear: f64) -> PyResult<f64> {
    green_couette_3d(&query(x, y, z, t, y0, shear)).map_err(err)
}

/// Planar Couette heat kernel.
#[pyfunction]
#[pyo3(signature = (x, y, t, y0=0.0, shear=0.0))]
fn green_2d(x: f64, y: f64, t: f64, y0: f64, shear: f64) -> PyResult<f64> {
    green_couette_2d(&query(x, y, 0.0, t, y0, shear)).map_err(err)
}

/// `(d/dx, d/dy0, d/dz)` of the three-dimensional kernel.
#[pyfunction]
#[pyo3(signature = (x, y, z, t, y0=0.0, shear=0.0))]
fn green_gradient(x: f64, y: f64, z: f64, t: f64, y0: f64, shear: f64) -> PyResult<(f64, f64, f64)> {
    let g = grad_green_couette(&query(x, y, z, t, y0, shear)).map_err(err)?;
    Ok((g.dx, g.dy0, g.dz))
}

#[pyfunction]
#[pyo3(name = "yukawa")]
fn yukawa_py(r: f64) -> PyResult<f64> {
    yukawa(r).map_err(err)
}

#[pyfunction]
#[pyo3(name = "wave_envelope", signature = (x, y, z, t, widths, shear=0.0))]
fn wave_envelope_py(x: f64, y: f64, z: f64, t: f64, widths: [f64; 3], shear: f64) -> PyResult<f64> {
    wave_envelope(x, y, z, t, widths, shear).map_err(err)
}

/// Time envelope at the smallest admissible widths.
#[pyfunction]
#[pyo3(name = "envelope_a", signature = (t, shear, theta=0.8, gamma=0.4, epsilon=0))]
fn envelope_a_py(t: f64, shear: f64, theta: f64, gamma: f64, epsilon: u8) -> PyResult<f64> {
    let p = EnvelopeParams::new(Model::from_epsilon(epsilon).map_err(err)?, shear, theta, gamma);
    p.validate().map_err(err)?;
    envelope_a(t, &p).map_err(err)
}

/// Runs a simulation from a TOML config file; returns the run metadata.
#[pyfunction]
#[pyo3(signature = (config, out=None))]
fn simulate<'py>(py: Python<'py>, config: PathBuf, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SimConfig::from_file(&config).map_err(err)?;
    let res = py.detach(|| run(&cfg, out.as_deref())).map_err(err)?;
    to_py(py, &res.metadata)
}

/// Checks one estimate over a TOML grid; writes the case CSV and summary
/// JSON when `out` is given and returns the summary.
#[pyfunction]
#[pyo3(signature = (lemma, grid, out=None))]
fn verify_lemma<'py>(py: Python<'py>, lemma: &str, grid: PathBuf, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let id: LemmaId = lemma.parse().map_err(err)?;
    let grid = LemmaGrid::from_file(&grid).map_err(err)?;
    let report = py.detach(|| run_lemma(id, &grid)).map_err(err)?;
    if let Some(path) = out {
        report.write_csv(&path).map_err(err)?;
        report.write_summary(&path.with_extension("json")).map_err(err)?;
    }
    to_py(py, &report)
}

#[pyfunction]
fn sweep<'py>(py: Python<'py>, spec: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let spec = SweepSpec::from_file(&spec).map_err(err)?;
    let summary = py.detach(|| suppression_sweep(&spec)).map_err(err)?;
    to_py(py, &summary)
}

/// Late-time decay exponents of a finished run directory.
#[pyfunction]
fn fit<'py>(py: Python<'py>, run: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &decay_fit_dir(&run).map_err(err)?)
}

#[pyfunction]
fn compare<'py>(py: Python<'py>, pp: PathBuf, pe: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pp_vs_pe_dirs(&pp, &pe).map_err(err)?)
}

#[pyfunction]
fn bootstrap<'py>(py: Python<'py>, run: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg = BootstrapConfig { run_dir: run };
    let report = py.detach(|| estimate_bootstrap_constants(&cfg)).map_err(err)?;
    to_py(py, &report)
}

/// Diagnostics rows as a list of dicts.
#[pyfunction]
#[pyo3(name = "read_diagnostics")]
fn read_diagnostics_py<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &read_diagnostics(&path).map_err(err)?)
}

/// Snapshot values (flat, C order) and its sidecar metadata.
#[pyfunction]
#[pyo3(name = "read_snapshot")]
fn read_snapshot_py<'py>(py: Python<'py>, path: PathBuf) -> PyResult<(Vec<f64>, Bound<'py, PyAny>)> {
    let (field, meta) = read_snapshot(&path).map_err(err)?;
    Ok((field.values, to_py(py, &meta)?))
}

#[pymodule]
#[pyo3(name = "couette_ks")]
fn couette_ks_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CouetteError", m.py().get_type::<CouetteError>())?;
    m.add_function(wrap_pyfunction!(green_3d, m)?)?;
    m.add_function(wrap_pyfunction!(green_2d, m)?)?;
    m.add_function(wrap_pyfunction!(green_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(yukawa_py, m)?)?;
    m.add_function(wrap_pyfunction!(wave_envelope_py, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_a_py, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap, m)?)?;
    m.add_function(wrap_pyfunction!(read_diagnostics_py, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot_py, m)?)?;
    Ok(())
}
