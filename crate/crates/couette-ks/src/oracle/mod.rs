//! Slow reference solutions from the mild (Duhamel) formulation, evaluated by
//! direct quadrature. Two-dimensional only.
//!
//! Fields are carried as half-transforms `(kx, y)`. Across the shear every
//! source ordinate `y0` is summed explicitly against the kernel, so the
//! kernel's dependence on `y0` (not just `y - y0`) is honored. Derivatives
//! of the aggregation flux are taken on the data, which keeps the time
//! integrand bounded as `σ → t`; the last panel is still graded.

mod line;

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::kernels::wave_envelope_2d;
use crate::quad::gauss_legendre;
use crate::solver::{
    initial_fields, write_diagnostics, write_snapshot, DiagnosticsRow, Frame, ShearSpectral, SimConfig,
};
use line::{heat_rule_error, HeatLine, Plane};

/// Largest grid the oracle accepts, in points.
pub const MAX_POINTS: usize = 96 * 96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per time panel.
    pub gauss_points: usize,
    pub panels_per_unit_time: f64,
    /// Exponent of the `(t - σ) ∝ s^grading` map on the panel ending at `t`.
    pub grading: f64,
    pub max_iterations: usize,
    /// Picard stop: successive sup-differences relative to the sup.
    pub tolerance: f64,
    /// Largest estimated relative error accepted from the linear quadrature.
    pub max_error: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            gauss_points: 4,
            panels_per_unit_time: 100.0,
            grading: 3.0,
            max_iterations: 40,
            tolerance: 1e-10,
            max_error: 1e-3,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.panels_per_unit_time >= 4.0) {
            return Err(Error::param(format!(
                "need at least 4 panels per unit time, got {}",
                self.panels_per_unit_time
            )));
        }
        if !(self.tolerance > 0.0) || !(self.max_error > 0.0) {
            return Err(Error::param("tolerances must be positive"));
        }
        if !(2..=16).contains(&self.gauss_points) {
            return Err(Error::param("gauss_points must lie in 2..=16"));
        }
        if !(self.grading >= 1.0) || self.max_iterations == 0 {
            return Err(Error::param("grading must be >= 1 and max_iterations positive"));
        }
        Ok(())
    }
}

fn check_field(f: &Field) -> Result<()> {
    if f.grid.dims != 2 {
        return Err(Error::InvalidConfig("the oracle is two-dimensional".into()));
    }
    if f.grid.len() > MAX_POINTS {
        return Err(Error::InvalidConfig(format!(
            "oracle grid {:?} exceeds {MAX_POINTS} points",
            &f.grid.shape[..2]
        )));
    }
    if f.tilt != 0.0 {
        return Err(Error::InvalidConfig("oracle input must be a laboratory-frame field".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearOutput {
    pub field: Field,
    /// Estimated sup error of the quadrature.
    pub error_estimate: f64,
}

/// Kernel convolution of `n0` at time `t` under shear `shear`.
pub fn propagate_linear(n0: &Field, t: f64, shear: f64, spec: &QuadratureSpec) -> Result<LinearOutput> {
    spec.validate()?;
    check_field(n0)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    if !(shear >= 0.0) {
        return Err(Error::domain("shear must be nonnegative"));
    }
    let plane = Plane::new(&n0.grid);
    let sup = n0.max_abs();
    let edge = plane.y_edge(&n0.values);
    let line = HeatLine::new(t, plane.hy, plane.ny);
    let err = edge + heat_rule_error(t, plane.hy, line.variance, plane.dyy_sup(&n0.values), sup);
    if err > spec.max_error * sup {
        return Err(Error::Quadrature(format!(
            "estimated error {err:.3e} exceeds {:.1e} of the data sup (edge amplitude {edge:.3e})",
            spec.max_error
        )));
    }
    let out = plane.inverse(&plane.heat(&plane.forward(&n0.values), t, shear, false));
    // Mass carried past the cross-stream edges is lost to the output.
    let err = err + plane.y_edge(&out);
    Ok(LinearOutput {
        field: Field {
            grid: n0.grid.clone(),
            values: out,
            time: n0.time + t,
            tilt: 0.0,
        },
        error_estimate: err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardModel {
    pub epsilon: u8,
    pub shear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardOutput {
    pub times: Vec<f64>,
    pub density: Vec<Field>,
    pub chemo: Vec<Field>,
    pub iterations: usize,
    /// Relative sup change produced by each iteration.
    pub increments: Vec<f64>,
    /// Largest `|mass(t_k) - mass(0)|` over the mesh, per iteration.
    pub mass_drift: Vec<f64>,
    pub error_estimate: f64,
}

struct Mesh {
    dt: f64,
    panels: usize,
    xi: Vec<f64>,
    w: Vec<f64>,
    grading: f64,
}

impl Mesh {
    fn new(t_final: f64, spec: &QuadratureSpec, order: usize) -> Self {
        let panels = ((spec.panels_per_unit_time * t_final).ceil() as usize).max(1);
        let (x, w) = gauss_legendre(order);
        Mesh {
            dt: t_final / panels as f64,
            panels,
            xi: x.iter().map(|v| 0.5 * (v + 1.0)).collect(),
            w: w.iter().map(|v| 0.5 * v).collect(),
            grading: spec.grading,
        }
    }

    fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Ungraded node `q` of panel `j`.
    fn node(&self, j: usize, q: usize) -> f64 {
        self.time(j) + self.dt * self.xi[q]
    }

    /// Graded nodes of the panel ending at `t_k`: `(σ, weight)`.
    fn graded(&self, k: usize) -> Vec<(f64, f64)> {
        let g = self.grading;
        self.xi
            .iter()
            .zip(&self.w)
            .map(|(s, w)| (self.time(k) - self.dt * s.powf(g), self.dt * g * s.powf(g - 1.0) * w))
            .collect()
    }
}

type Hat = Vec<Complex64>;

/// Cubic Lagrange interpolation of a mesh trajectory.
fn interpolate(traj: &[Hat], mesh: &Mesh, t: f64) -> Hat {
    let n = traj.len();
    let m = n.min(4);
    let centre = (t / mesh.dt).floor() as isize - 1;
    let start = centre.clamp(0, (n - m) as isize) as usize;
    let nodes: Vec<usize> = (start..start + m).collect();
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&a| {
            nodes
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (t - mesh.time(b)) / (mesh.time(a) - mesh.time(b)))
                .product()
        })
        .collect();
    let mut out = vec![Complex64::default(); traj[0].len()];
    for (a, w) in nodes.iter().zip(&weights) {
        if *w == 0.0 {
            continue;
        }
        out.iter_mut().zip(&traj[*a]).for_each(|(o, v)| *o += v * *w);
    }
    out
}

fn axpy(acc: &mut [Complex64], a: f64, x: &[Complex64]) {
    acc.iter_mut().zip(x).for_each(|(o, v)| *o += v * a);
}

struct Solver<'a> {
    plane: &'a Plane,
    mesh: Mesh,
    shear: f64,
}

impl Solver<'_> {
    /// `∫_0^{t_k} S(t_k - σ) src(σ) dσ`, with `src` known at the ungraded
    /// nodes of every panel (`std_vals[j * Q + q]`) and at the graded nodes
    /// of the last panel.
    fn duhamel(&self, k: usize, std_vals: &[Hat], graded: &[(f64, f64)], graded_vals: &[Hat], damped: bool) -> Hat {
        let len = self.plane.nx * self.plane.ny;
        let q_n = self.mesh.xi.len();
        let tk = self.mesh.time(k);
        if k == 0 {
            return vec![Complex64::default(); len];
        }
        let mut terms: Vec<(f64, f64, &Hat)> = Vec::new();
        for j in 0..k - 1 {
            for q in 0..q_n {
                terms.push((tk - self.mesh.node(j, q), self.mesh.dt * self.mesh.w[q], &std_vals[j * q_n + q]));
            }
        }
        for ((s, w), v) in graded.iter().zip(graded_vals) {
            terms.push((tk - s, *w, v));
        }
        terms
            .par_iter()
            .map(|(tau, w, v)| {
                let mut h = self.plane.heat(v, *tau, self.shear, damped);
                h.iter_mut().for_each(|c| *c *= *w);
                h
            })
            .reduce(
                || vec![Complex64::default(); len],
                |mut a, b| {
                    axpy(&mut a, 1.0, &b);
                    a
                },
            )
    }
}

fn sup_of(plane: &Plane, h: &Hat) -> f64 {
    plane.inverse(h).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn mass_of(plane: &Plane, h: &Hat) -> f64 {
    h[..plane.ny].iter().map(|c| c.re).sum::<f64>() * plane.grid.cell_volume()
}

/// Fixed-point iteration of the mild formulation on `[0, t_final]`.
///
/// The first iterate is the linear flow of the data. Each iteration
/// recomputes the attractant from the current density (elliptic solve or
/// damped Duhamel integral) and then the density's Duhamel integral.
pub fn picard_solve(
    n0: &Field,
    c0: Option<&Field>,
    model: PicardModel,
    t_final: f64,
    spec: &QuadratureSpec,
) -> Result<PicardOutput> {
    spec.validate()?;
    check_field(n0)?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::domain(format!("final time must be positive, got {t_final}")));
    }
    let c0 = match (model.epsilon, c0) {
        (0, _) => None,
        (1, Some(c)) => {
            check_field(c)?;
            if !c.grid.same_sampling(&n0.grid) {
                return Err(Error::GridMismatch("n0 and c0 differ in sampling".into()));
            }
            Some(c)
        }
        (1, None) => return Err(Error::InvalidConfig("epsilon = 1 requires c0".into())),
        (e, _) => return Err(Error::param(format!("epsilon must be 0 or 1, got {e}"))),
    };
    let plane = Plane::new(&n0.grid);
    let solver = Solver {
        plane: &plane,
        mesh: Mesh::new(t_final, spec, spec.gauss_points),
        shear: model.shear,
    };
    let mesh = &solver.mesh;
    let kk = mesh.panels;
    let n0_hat = plane.forward(&n0.values);
    let c0_hat = c0.map(|c| plane.forward(&c.values));
    let m0 = mass_of(&plane, &n0_hat);
    let linear: Vec<Hat> = (0..=kk)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                n0_hat.clone()
            } else {
                plane.heat(&n0_hat, mesh.time(k), model.shear, false)
            }
        })
        .collect();
    let c_linear: Option<Vec<Hat>> = c0_hat.as_ref().map(|c| {
        (0..=kk)
            .into_par_iter()
            .map(|k| {
                if k == 0 {
                    c.clone()
                } else {
                    plane.heat(c, mesh.time(k), model.shear, true)
                }
            })
            .collect()
    });
    let mut n_traj = linear.clone();
    let mut increments = Vec::new();
    let mut mass_drift = Vec::new();
    let mut c_traj;
    loop {
        c_traj = attractant(&solver, &n_traj, c_linear.as_deref());
        let next = density_step(&solver, &linear, &n_traj, &c_traj, model.epsilon, true, mesh);
        let mut diff: f64 = 0.0;
        let mut sup: f64 = 0.0;
        let mut drift: f64 = 0.0;
        for (a, b) in next.iter().zip(&n_traj) {
            let d: Hat = a.iter().zip(b).map(|(x, y)| x - y).collect();
            diff = diff.max(sup_of(&plane, &d));
            sup = sup.max(sup_of(&plane, a));
            drift = drift.max((mass_of(&plane, a) - m0).abs());
        }
        if !diff.is_finite() || !sup.is_finite() {
            return Err(Error::NonContraction("iterate became non-finite".into()));
        }
        let rel = if sup > 0.0 { diff / sup } else { 0.0 };
        increments.push(rel);
        mass_drift.push(drift);
        n_traj = next;
        let it = increments.len();
        if rel <= spec.tolerance {
            break;
        }
        if it >= 3 && increments[it - 1] > increments[it - 2] && increments[it - 2] > increments[it - 3] {
            return Err(Error::NonContraction(format!(
                "increments grew twice in a row: {:?}",
                &increments[it - 3..]
            )));
        }
        if it >= spec.max_iterations {
            return Err(Error::NonContraction(format!(
                "no convergence in {it} iterations, last increment {rel:.3e}"
            )));
        }
    }
    c_traj = attractant(&solver, &n_traj, c_linear.as_deref());

    // Error model: remaining Picard tail, an embedded lower-order time rule
    // and a lower-order flux difference at the final time, the data term's
    // lattice error and the cross-stream edge amplitude.
    let fin = n_traj[kk].clone();
    let sup_fin = sup_of(&plane, &fin);
    let it = increments.len();
    let tail = if it >= 2 && increments[it - 2] > 0.0 {
        let q = (increments[it - 1] / increments[it - 2]).min(0.9);
        increments[it - 1] * q / (1.0 - q)
    } else {
        increments[it - 1]
    } * sup_fin;
    let lower = Solver {
        plane: &plane,
        mesh: Mesh::new(t_final, spec, spec.gauss_points - 1),
        shear: model.shear,
    };
    let time_err = {
        let c_low = attractant(&lower, &n_traj, c_linear.as_deref());
        let alt = final_density(&lower, &linear[kk], &n_traj, &c_low, model.epsilon, true);
        sup_diff(&plane, &alt, &fin)
    };
    let space_err = {
        let alt = final_density(&solver, &linear[kk], &n_traj, &c_traj, model.epsilon, false);
        sup_diff(&plane, &alt, &fin)
    };
    let data_err = {
        let line = HeatLine::new(t_final, plane.hy, plane.ny);
        heat_rule_error(t_final, plane.hy, line.variance, plane.dyy_sup(&n0.values), n0.max_abs())
    };
    let fin_phys = plane.inverse(&fin);
    let error_estimate = tail + time_err + space_err + data_err + plane.y_edge(&fin_phys);

    let to_field = |h: &Hat, k: usize| Field {
        grid: n0.grid.clone(),
        values: plane.inverse(h),
        time: n0.time + mesh.time(k),
        tilt: 0.0,
    };
    Ok(PicardOutput {
        times: (0..=kk).map(|k| n0.time + mesh.time(k)).collect(),
        density: n_traj.iter().enumerate().map(|(k, h)| to_field(h, k)).collect(),
        chemo: c_traj.iter().enumerate().map(|(k, h)| to_field(h, k)).collect(),
        iterations: increments.len(),
        increments,
        mass_drift,
        error_estimate,
    })
}

fn sup_diff(plane: &Plane, a: &Hat, b: &Hat) -> f64 {
    let d: Hat = a.iter().zip(b).map(|(x, y)| x - y).collect();
    sup_of(plane, &d)
}

/// Attractant along the mesh for a given density trajectory.
fn attractant(s: &Solver, n_traj: &[Hat], c_linear: Option<&[Hat]>) -> Vec<Hat> {
    let plane = s.plane;
    let Some(c_lin) = c_linear else {
        return n_traj.par_iter().map(|n| plane.yukawa(n)).collect();
    };
    let mesh = &s.mesh;
    let q_n = mesh.xi.len();
    let std_vals: Vec<Hat> = (0..mesh.panels * q_n)
        .into_par_iter()
        .map(|i| interpolate(n_traj, mesh, mesh.node(i / q_n, i % q_n)))
        .collect();
    (0..=mesh.panels)
        .map(|k| {
            let graded = if k > 0 { mesh.graded(k) } else { Vec::new() };
            let gv: Vec<Hat> = graded.iter().map(|(t, _)| interpolate(n_traj, mesh, *t)).collect();
            let mut c = s.duhamel(k, &std_vals, &graded, &gv, true);
            axpy(&mut c, 1.0, &c_lin[k]);
            c
        })
        .collect()
}

/// Aggregation flux divergence at time `t` from the current trajectories.
/// With the elliptic attractant `c` is recomputed from the interpolated
/// density, so both variants share one code path.
fn flux(s: &Solver, n_traj: &[Hat], c_traj: &[Hat], epsilon: u8, t: f64, sixth: bool) -> Hat {
    let n = interpolate(n_traj, &s.mesh, t);
    let c = if epsilon == 0 {
        s.plane.yukawa(&n)
    } else {
        interpolate(c_traj, &s.mesh, t)
    };
    s.plane.aggregation(&n, &c, sixth)
}

fn std_fluxes(s: &Solver, n_traj: &[Hat], c_traj: &[Hat], epsilon: u8, sixth: bool) -> Vec<Hat> {
    let q_n = s.mesh.xi.len();
    (0..s.mesh.panels * q_n)
        .into_par_iter()
        .map(|i| flux(s, n_traj, c_traj, epsilon, s.mesh.node(i / q_n, i % q_n), sixth))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn density_at(s: &Solver, k: usize, lin: &Hat, std_vals: &[Hat], n_traj: &[Hat], c_traj: &[Hat], epsilon: u8, sixth: bool) -> Hat {
    let graded = if k > 0 { s.mesh.graded(k) } else { Vec::new() };
    let gv: Vec<Hat> = graded
        .iter()
        .map(|(t, _)| flux(s, n_traj, c_traj, epsilon, *t, sixth))
        .collect();
    let mut out = lin.clone();
    axpy(&mut out, -1.0, &s.duhamel(k, std_vals, &graded, &gv, false));
    out
}

/// One Picard map of the density: `S(t) n0 - ∫ S(t-σ) ∇·(n ∇c)(σ) dσ`.
fn density_step(s: &Solver, linear: &[Hat], n_traj: &[Hat], c_traj: &[Hat], epsilon: u8, sixth: bool, mesh: &Mesh) -> Vec<Hat> {
    let std_vals = std_fluxes(s, n_traj, c_traj, epsilon, sixth);
    (0..=mesh.panels)
        .map(|k| density_at(s, k, &linear[k], &std_vals, n_traj, c_traj, epsilon, sixth))
        .collect()
}

fn final_density(s: &Solver, lin: &Hat, n_traj: &[Hat], c_traj: &[Hat], epsilon: u8, sixth: bool) -> Hat {
    let std_vals = std_fluxes(s, n_traj, c_traj, epsilon, sixth);
    density_at(s, s.mesh.panels, lin, &std_vals, n_traj, c_traj, epsilon, sixth)
}

/// Applies the Duhamel map once to a given density trajectory (sampled at
/// the mesh times of `spec` on `[0, t_final]`) with the elliptic attractant
/// substituted. At a converged Picard trajectory this reproduces it.
pub fn elliptic_duhamel_map(
    n0: &Field,
    trajectory: &[Field],
    shear: f64,
    t_final: f64,
    spec: &QuadratureSpec,
) -> Result<Vec<Field>> {
    spec.validate()?;
    check_field(n0)?;
    let plane = Plane::new(&n0.grid);
    let solver = Solver {
        plane: &plane,
        mesh: Mesh::new(t_final, spec, spec.gauss_points),
        shear,
    };
    if trajectory.len() != solver.mesh.panels + 1 {
        return Err(Error::GridMismatch(format!(
            "trajectory has {} samples, mesh needs {}",
            trajectory.len(),
            solver.mesh.panels + 1
        )));
    }
    let n_traj: Vec<Hat> = trajectory.iter().map(|f| plane.forward(&f.values)).collect();
    let n0_hat = plane.forward(&n0.values);
    let linear: Vec<Hat> = (0..=solver.mesh.panels)
        .map(|k| {
            if k == 0 {
                n0_hat.clone()
            } else {
                plane.heat(&n0_hat, solver.mesh.time(k), shear, false)
            }
        })
        .collect();
    let c_traj: Vec<Hat> = n_traj.iter().map(|n| plane.yukawa(n)).collect();
    let out = density_step(&solver, &linear, &n_traj, &c_traj, 0, true, &solver.mesh);
    Ok(out
        .iter()
        .zip(trajectory)
        .map(|(h, f)| Field {
            grid: n0.grid.clone(),
            values: plane.inverse(h),
            time: f.time,
            tilt: 0.0,
        })
        .collect())
}

/// `(1 - Δ)^{-1} n` by the oracle's line quadrature.
pub fn elliptic_attractant(n: &Field) -> Result<Field> {
    check_field(n)?;
    let plane = Plane::new(&n.grid);
    Ok(Field {
        values: plane.inverse(&plane.yukawa(&plane.forward(&n.values))),
        ..n.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Linear,
    Picard,
}

/// Oracle input file: a simulation configuration plus quadrature settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub simulation: SimConfig,
}

impl OracleConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&s).map_err(|e| Error::Parse {
            path: path.into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub mode: OracleMode,
    pub iterations: usize,
    pub error_estimate: f64,
    pub final_time: f64,
    pub final_sup: f64,
    pub mass_drift: f64,
}

fn oracle_row(f: &Field, cfg: &SimConfig, ops: &ShearSpectral) -> DiagnosticsRow {
    let t = f.time;
    let ratio = cfg
        .envelope_params()
        .ok()
        .filter(|_| t > 0.0)
        .map(|p| {
            let g = &f.grid;
            let (xs, ys) = (g.coords(0), g.coords(1));
            f.values
                .iter()
                .enumerate()
                .map(|(idx, v)| {
                    let (i, j, _) = g.unravel(idx);
                    let w = wave_envelope_2d(xs[i], ys[j], t, [p.c1_prime, p.c1_dblprime], cfg.model.shear)
                        .unwrap_or(f64::NAN);
                    v.abs() / w
                })
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::NAN);
    DiagnosticsRow {
        t,
        mass: f.mass(),
        l2: f.lp_norm(2.0),
        l4: f.lp_norm(4.0),
        linf: f.max_abs(),
        min_n: f.min(),
        envelope_ratio: ratio,
        tail_frac: ops.top_octave_fraction(&ops.to_spectral(&f.values)),
        blowup_flag: 0,
    }
}

/// Runs the oracle on a configuration and, with `out`, writes
/// `diagnostics.csv`, lab-frame snapshots of the final fields and
/// `oracle.json`.
pub fn run_oracle(cfg: &OracleConfig, mode: OracleMode, out: Option<&Path>) -> Result<OracleSummary> {
    let sim = &cfg.simulation;
    sim.validate()?;
    let (n0, c0) = initial_fields(sim)?;
    let shear = sim.model.shear;
    let t = sim.time.t_final;
    let (fields, chemo, iterations, err, drift) = match mode {
        OracleMode::Linear => {
            let lin = propagate_linear(&n0, t, shear, &cfg.quadrature)?;
            let drift = (lin.field.mass() - n0.mass()).abs();
            (vec![n0.clone(), lin.field], None, 0, lin.error_estimate, drift)
        }
        OracleMode::Picard => {
            let model = PicardModel {
                epsilon: sim.model.epsilon,
                shear,
            };
            let p = picard_solve(&n0, c0.as_ref(), model, t, &cfg.quadrature)?;
            let drift = p.mass_drift.last().copied().unwrap_or(0.0);
            (p.density, Some(p.chemo), p.iterations, p.error_estimate, drift)
        }
    };
    let last = fields.last().expect("at least the initial field");
    let summary = OracleSummary {
        mode,
        iterations,
        error_estimate: err,
        final_time: last.time,
        final_sup: last.max_abs(),
        mass_drift: drift,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let ops = ShearSpectral::new(&n0.grid, false);
        let rows: Vec<DiagnosticsRow> = fields.iter().map(|f| oracle_row(f, sim, &ops)).collect();
        write_diagnostics(&dir.join("diagnostics.csv"), &rows)?;
        let stem = format!("n_t{:.6}_lab", last.time);
        write_snapshot(dir, &stem, last, "n", Frame::Lab, shear, sim.model.epsilon)?;
        if let Some(c) = chemo.as_ref().and_then(|c| c.last()) {
            let stem = format!("c_t{:.6}_lab", c.time);
            write_snapshot(dir, &stem, c, "c", Frame::Lab, shear, sim.model.epsilon)?;
        }
        let js = dir.join("oracle.json");
        std::fs::write(&js, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::io(&js, e))?;
    }
    Ok(summary)
}
