use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Frame, ProfileSpec, Shape, SimConfig, SplitOrder};
use super::diagnostics::{write_diagnostics, DiagnosticsRow};
use super::snapshot::write_snapshot;
use super::spectral::{Damping, ShearSpectral};
use super::{coarsen_axis, retilt};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::kernels::{wave_envelope, wave_envelope_2d, EnvelopeParams, Model};

/// Relative amplitude in the outer half of an axis that triggers box doubling.
const REGRID_EDGE: f64 = 1e-9;
/// Largest relative spectral amplitude above a quarter of the resolution for
/// which subsampling by two is considered lossless.
const REGRID_SPECTRAL: f64 = 1e-10;
/// Steps below this size are treated as collapse of the chemotactic CFL bound.
const MIN_DT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupEvent {
    pub time: f64,
    pub sup: f64,
    pub tail_frac: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegridEvent {
    pub time: f64,
    pub axis: usize,
    pub new_length: f64,
}

/// Provenance and whole-space emulation record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub code_version: String,
    pub config: SimConfig,
    pub warnings: Vec<String>,
    pub blowup: Option<BlowupEvent>,
    pub regrids: Vec<RegridEvent>,
    pub remaps: usize,
    pub steps: usize,
    pub final_time: f64,
    pub final_lengths: Vec<f64>,
    /// Largest relative amplitude seen in an outer half that could not be
    /// resolved by doubling; nonzero values signal possible periodic wrap.
    pub unresolved_edge: f64,
    pub initial_mass: f64,
    pub initial_sup: f64,
    pub c0_grad_sup: f64,
    pub snapshots: Vec<String>,
}

/// Norms of the chemo-attractant at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemoRow {
    pub t: f64,
    pub c_linf: f64,
    pub c_l2: f64,
    pub c_mass: f64,
    pub grad_c_linf: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub diagnostics: Vec<DiagnosticsRow>,
    pub chemo: Vec<ChemoRow>,
    pub metadata: RunMetadata,
    pub final_density: Field,
}

/// Time-stepping state of one simulation.
#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    model: Model,
    shear: f64,
    envelope: EnvelopeParams,
    ops: ShearSpectral,
    n_hat: Vec<Complex64>,
    /// Evolved chemo-attractant (parabolic model only).
    c_hat: Option<Vec<Complex64>>,
    time: f64,
    tilt: f64,
    sup0: f64,
    mass0: f64,
    last_grad: f64,
    steps: usize,
    blowup: Option<BlowupEvent>,
    regrids: Vec<RegridEvent>,
    remaps: usize,
    unresolved_edge: f64,
    warnings: Vec<String>,
    c0_grad_sup: f64,
}

fn profile_value(p: &ProfileSpec, center: &[f64; 3], x: f64, y: f64, z: f64) -> f64 {
    let (dx, dy, dz) = (x - center[0], y - center[1], z - center[2]);
    match p.shape {
        Shape::Gaussian => (-(dx * dx + dy * dy + dz * dz) / (p.width * p.width)).exp(),
        Shape::Exponential => (-(dx.abs() + dy.abs() + dz.abs()) / p.width).exp(),
        Shape::Zero => 0.0,
    }
}

/// Samples an initial profile, applying the seeded perturbation; the
/// amplitude is fixed afterwards by the caller.
fn sample_profile(grid: &Grid, p: &ProfileSpec, seed: u64) -> Result<Field> {
    let mut center = [0.0; 3];
    if let Some(c) = &p.center {
        if c.len() != grid.dims {
            return Err(Error::InvalidConfig(format!(
                "center has {} entries for a {}-D grid",
                c.len(),
                grid.dims
            )));
        }
        center[..c.len()].copy_from_slice(c);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<([f64; 3], f64, f64)> = (0..4)
        .map(|_| {
            let mut k = [0.0; 3];
            for (a, ka) in k.iter_mut().enumerate().take(grid.dims) {
                let m = rng.random_range(-3i32..=3) as f64;
                *ka = 2.0 * std::f64::consts::PI * m / (grid.lengths[a] / 4.0);
            }
            (k, rng.random_range(-0.25..0.25), rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let pert = p.perturbation;
    Ok(Field::from_fn(grid.clone(), |x, y, z| {
        let base = profile_value(p, &center, x, y, z);
        if pert == 0.0 {
            return base;
        }
        let s: f64 = waves
            .iter()
            .map(|(k, a, ph)| a * (k[0] * x + k[1] * y + k[2] * z + ph).cos())
            .sum();
        base * (1.0 + pert * s)
    }))
}

fn scale_field(f: &mut Field, factor: f64) {
    f.values.iter_mut().for_each(|v| *v *= factor);
}

/// Builds the initial density from the configuration.
pub(crate) fn initial_density(config: &SimConfig, grid: &Grid) -> Result<Field> {
    let p = &config.initial.density;
    let mut f = sample_profile(grid, p, config.seed)?;
    if let Some(m) = p.mass {
        let m0 = f.mass();
        if m0 != 0.0 {
            scale_field(&mut f, m / m0);
        }
    } else {
        let peak = f.max_abs();
        let amp = p.amplitude.unwrap_or(1.0);
        if peak > 0.0 {
            scale_field(&mut f, amp / peak);
        }
    }
    Ok(f)
}

fn max_gradient(ops: &ShearSpectral, spec: &[Complex64], tilt: f64) -> f64 {
    let dims = ops.grid().dims;
    let comps: Vec<Vec<f64>> = (0..dims)
        .map(|a| ops.to_physical(&ops.gradient(spec, tilt, a)))
        .collect();
    (0..comps[0].len())
        .into_par_iter()
        .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .reduce(|| 0.0, f64::max)
}

/// Builds the initial chemo-attractant of the parabolic model.
pub(crate) fn initial_chemo(config: &SimConfig, grid: &Grid) -> Result<Option<Field>> {
    let Some(p) = &config.initial.c0 else {
        return Ok(None);
    };
    let mut f = sample_profile(grid, p, config.seed.wrapping_add(1))?;
    let ops = ShearSpectral::new(grid, false);
    if let Some(g) = p.grad_scale {
        let g0 = max_gradient(&ops, &ops.to_spectral(&f.values), 0.0);
        if g0 > 0.0 {
            scale_field(&mut f, g / g0);
        }
    } else if let Some(m) = p.mass {
        let m0 = f.mass();
        if m0 != 0.0 {
            scale_field(&mut f, m / m0);
        }
    } else {
        let peak = f.max_abs();
        if peak > 0.0 {
            scale_field(&mut f, p.amplitude.unwrap_or(1.0) / peak);
        }
    }
    Ok(Some(f))
}

/// Initial density and (for the parabolic model) chemo-attractant sampled on
/// the configured grid.
pub fn initial_fields(config: &SimConfig) -> Result<(Field, Option<Field>)> {
    let grid = config.grid()?;
    Ok((initial_density(config, &grid)?, initial_chemo(config, &grid)?))
}

/// Relative amplitude in the outer half of `axis`.
fn outer_half_amplitude(values: &[f64], grid: &Grid, axis: usize) -> f64 {
    let n = grid.shape[axis];
    let (outer, all) = values
        .par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, j, l) = grid.unravel(idx);
            let m = [i, j, l][axis];
            let a = v.abs();
            let out = 4 * m < n || 4 * m >= 3 * n;
            (if out { a } else { 0.0 }, a)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    if all > 0.0 {
        outer / all
    } else {
        0.0
    }
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let grid = config.grid()?;
        let n0 = initial_density(&config, &grid)?;
        let c0 = initial_chemo(&config, &grid)?;
        Self::with_initial(config, n0, c0)
    }

    /// Starts from explicit laboratory-frame fields on the configured grid.
    pub fn with_initial(config: SimConfig, n0: Field, c0: Option<Field>) -> Result<Self> {
        let mut warnings = config.validate()?;
        let model = config.model()?;
        let grid = config.grid()?;
        if !n0.grid.same_sampling(&grid) {
            return Err(Error::GridMismatch("initial density does not match the configured grid".into()));
        }
        if !n0.is_finite() {
            return Err(Error::domain("initial density is not finite"));
        }
        let envelope = config.envelope_params()?;
        match envelope.validate() {
            Ok(w) => warnings.extend(w),
            Err(e) => warnings.push(format!("envelope constants outside admissible ranges: {e}")),
        }
        let ops = ShearSpectral::new(&grid, config.numerics.dealias);
        let mut n_hat = ops.to_spectral(&n0.values);
        ops.propagate(&mut n_hat, 0.0, 0.0, 0.0, Damping::None);
        let c_hat = match model {
            Model::ParabolicElliptic => None,
            Model::ParabolicParabolic => {
                let c0 = c0.ok_or_else(|| {
                    Error::InvalidConfig("epsilon = 1 requires an initial chemo-attractant".into())
                })?;
                if !c0.grid.same_sampling(&grid) {
                    return Err(Error::GridMismatch("initial chemo-attractant grid".into()));
                }
                let mut c = ops.to_spectral(&c0.values);
                ops.propagate(&mut c, 0.0, 0.0, 0.0, Damping::None);
                Some(c)
            }
        };
        let c0_grad_sup = c_hat
            .as_ref()
            .map(|c| max_gradient(&ops, c, 0.0))
            .unwrap_or(0.0);
        let mut sim = Simulation {
            shear: config.model.shear,
            config,
            model,
            envelope,
            ops,
            n_hat,
            c_hat,
            time: 0.0,
            tilt: 0.0,
            sup0: n0.max_abs(),
            mass0: n0.mass(),
            last_grad: 0.0,
            steps: 0,
            blowup: None,
            regrids: Vec::new(),
            remaps: 0,
            unresolved_edge: 0.0,
            warnings,
            c0_grad_sup,
        };
        if sim.config.numerics.chemotaxis {
            let c = sim.c_spectrum(&sim.n_hat);
            sim.last_grad = max_gradient(&sim.ops, &c, 0.0);
        }
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn grid(&self) -> &Grid {
        self.ops.grid()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn blowup(&self) -> Option<&BlowupEvent> {
        self.blowup.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn regrids(&self) -> &[RegridEvent] {
        &self.regrids
    }

    pub fn initial_mass(&self) -> f64 {
        self.mass0
    }

    fn c_spectrum(&self, n_hat: &[Complex64]) -> Vec<Complex64> {
        match &self.c_hat {
            Some(c) => c.clone(),
            None => self.ops.screened_poisson(n_hat, self.tilt),
        }
    }

    fn field(&self, values: Vec<f64>) -> Field {
        Field {
            grid: self.ops.grid().clone(),
            values,
            time: self.time,
            tilt: self.tilt,
        }
    }

    /// Density in stored (sheared) coordinates.
    pub fn density(&self) -> Field {
        self.field(self.ops.to_physical(&self.n_hat))
    }

    /// Chemo-attractant in stored coordinates.
    pub fn chemoattractant(&self) -> Field {
        let c = self.c_spectrum(&self.n_hat);
        self.field(self.ops.to_physical(&c))
    }

    /// Chemotactic CFL bound `cfl * min dx / max |∇c|`.
    pub fn stable_dt(&self) -> f64 {
        if !self.config.numerics.chemotaxis || self.last_grad <= 0.0 {
            return f64::INFINITY;
        }
        let g = self.ops.grid();
        let dx = (0..g.dims).map(|a| g.spacing(a)).fold(f64::INFINITY, f64::min);
        self.config.time.cfl * dx / self.last_grad
    }

    /// Explicit midpoint update of the chemotaxis subproblem over `h`.
    fn nonlinear_stage(&mut self, h: f64) {
        let ops = &self.ops;
        let tilt = self.tilt;
        let c = self.c_spectrum(&self.n_hat);
        let (r1, g) = ops.chemotaxis(&self.n_hat, &c, tilt);
        self.last_grad = g;
        let n_mid: Vec<Complex64> = self
            .n_hat
            .iter()
            .zip(&r1)
            .map(|(n, r)| n + r * (0.5 * h))
            .collect();
        let c_mid: Vec<Complex64> = match &self.c_hat {
            Some(c) => c.iter().zip(&self.n_hat).map(|(c, n)| c + n * (0.5 * h)).collect(),
            None => ops.screened_poisson(&n_mid, tilt),
        };
        let (r2, _) = ops.chemotaxis(&n_mid, &c_mid, tilt);
        if let Some(c) = &mut self.c_hat {
            c.iter_mut().zip(&n_mid).for_each(|(c, n)| *c += n * h);
        }
        self.n_hat.iter_mut().zip(&r2).for_each(|(n, r)| *n += r * h);
    }

    fn linear_stage(&mut self, dt: f64) {
        self.ops
            .propagate(&mut self.n_hat, self.tilt, dt, self.shear, Damping::None);
        if let Some(c) = &mut self.c_hat {
            self.ops
                .propagate(c, self.tilt, dt, self.shear, Damping::ExpMinusT);
        }
        self.tilt += self.shear * dt;
    }

    /// Advances by one split step of size `dt`. After a blow-up has been
    /// flagged the state is frozen and further calls are no-ops.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param(format!("dt must be positive, got {dt}")));
        }
        if self.blowup.is_some() {
            return Ok(());
        }
        if self.config.numerics.chemotaxis {
            match self.config.time.split {
                SplitOrder::Strang => {
                    self.nonlinear_stage(0.5 * dt);
                    self.linear_stage(dt);
                    self.nonlinear_stage(0.5 * dt);
                }
                SplitOrder::Lie => {
                    self.nonlinear_stage(dt);
                    self.linear_stage(dt);
                }
            }
        } else {
            self.linear_stage(dt);
        }
        self.time += dt;
        self.steps += 1;
        self.maybe_remap();
        let values = self.ops.to_physical(&self.n_hat);
        self.check_blowup(&values);
        if self.blowup.is_none() && self.config.numerics.regrid {
            self.maybe_regrid(values)?;
        }
        Ok(())
    }

    fn maybe_remap(&mut self) {
        if !self.config.numerics.remap {
            return;
        }
        let g = self.ops.grid();
        let period = g.lengths[0] / g.lengths[1];
        while self.tilt >= period {
            self.n_hat = self.ops.remap(&self.n_hat);
            if let Some(c) = &self.c_hat {
                self.c_hat = Some(self.ops.remap(c));
            }
            self.tilt -= period;
            self.remaps += 1;
        }
    }

    fn check_blowup(&mut self, values: &[f64]) {
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = self.ops.top_octave_fraction(&self.n_hat);
        let b = &self.config.blowup;
        let reason = if !sup.is_finite() {
            Some("non-finite density")
        } else if sup > b.sup_factor * self.sup0 && tail > b.tail_fraction {
            Some("sup-norm and spectral-tail thresholds crossed")
        } else {
            None
        };
        if let Some(r) = reason {
            self.blowup = Some(BlowupEvent {
                time: self.time,
                sup,
                tail_frac: tail,
                reason: r.to_owned(),
            });
        }
    }

    fn maybe_regrid(&mut self, n_values: Vec<f64>) -> Result<()> {
        let mut n_values = n_values;
        let mut c_values = self.c_hat.as_ref().map(|c| self.ops.to_physical(c));
        let mut changed = false;
        for axis in 0..self.ops.grid().dims {
            let grid = self.ops.grid().clone();
            let mut edge = outer_half_amplitude(&n_values, &grid, axis);
            if let Some(c) = &c_values {
                edge = edge.max(outer_half_amplitude(c, &grid, axis));
            }
            if edge <= REGRID_EDGE {
                continue;
            }
            let mut spectral = self.ops.upper_half_amplitude(&self.n_hat, axis);
            if let Some(c) = &self.c_hat {
                spectral = spectral.max(self.ops.upper_half_amplitude(c, axis));
            }
            if spectral > REGRID_SPECTRAL {
                self.unresolved_edge = self.unresolved_edge.max(edge);
                continue;
            }
            let (nv, new_grid) = coarsen_axis(&n_values, &grid, axis)?;
            n_values = nv;
            if let Some(c) = &mut c_values {
                *c = coarsen_axis(c, &grid, axis)?.0;
            }
            self.regrids.push(RegridEvent {
                time: self.time,
                axis,
                new_length: new_grid.lengths[axis],
            });
            self.ops = ShearSpectral::new(&new_grid, self.config.numerics.dealias);
            self.n_hat = self.ops.to_spectral(&n_values);
            if let Some(c) = &c_values {
                self.c_hat = Some(self.ops.to_spectral(c));
            }
            changed = true;
        }
        if changed && self.config.numerics.chemotaxis {
            let c = self.c_spectrum(&self.n_hat);
            self.last_grad = max_gradient(&self.ops, &c, self.tilt);
        }
        Ok(())
    }

    /// Steps until `target`, honouring the configured maximal step and the
    /// chemotactic CFL bound; stops early on blow-up.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let tol = 1e-12 * target.abs().max(1.0);
        while self.time < target - tol && self.blowup.is_none() {
            let dt = self
                .config
                .time
                .dt
                .min(self.stable_dt())
                .min(target - self.time);
            if dt < MIN_DT && target - self.time > MIN_DT {
                self.blowup = Some(BlowupEvent {
                    time: self.time,
                    sup: self.density().max_abs(),
                    tail_frac: self.ops.top_octave_fraction(&self.n_hat),
                    reason: "chemotactic time step collapsed".into(),
                });
                break;
            }
            self.step(dt)?;
        }
        // Summed steps land within rounding of the target; report the target.
        if self.blowup.is_none() && (self.time - target).abs() <= tol {
            self.time = target;
        }
        Ok(())
    }

    /// Sup of `|n|` over the wave envelope, evaluated in lab
    /// coordinates `x = X + tilt y`.
    pub fn envelope_ratio(&self, n: &Field) -> f64 {
        let g = &n.grid;
        let xs = g.coords(0);
        let ys = g.coords(1);
        let zs = if g.dims == 3 { g.coords(2) } else { vec![0.0] };
        let p = &self.envelope;
        let (d1, d2) = (p.c1_prime, p.c1_dblprime);
        let t = self.time;
        let a = self.shear;
        let wrap = self.remaps > 0;
        let (x0, lx) = (g.origin[0], g.lengths[0]);
        let dims = g.dims;
        n.values
            .par_iter()
            .enumerate()
            .map(|(idx, v)| {
                let (i, j, l) = g.unravel(idx);
                let mut x = xs[i] + n.tilt * ys[j];
                if wrap {
                    x = x0 + (x - x0).rem_euclid(lx);
                }
                let w = if dims == 3 {
                    wave_envelope(x, ys[j], zs[l], t, [d1, d2, d2], a)
                } else {
                    wave_envelope_2d(x, ys[j], t, [d1, d2], a)
                }
                .unwrap_or(f64::NAN);
                v.abs() / w
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn diagnostics_row(&self) -> DiagnosticsRow {
        let n = self.density();
        DiagnosticsRow {
            t: self.time,
            mass: n.mass(),
            l2: n.lp_norm(2.0),
            l4: n.lp_norm(4.0),
            linf: n.max_abs(),
            min_n: n.min(),
            envelope_ratio: self.envelope_ratio(&n),
            tail_frac: self.ops.top_octave_fraction(&self.n_hat),
            blowup_flag: u8::from(self.blowup.is_some()),
        }
    }

    pub fn chemo_row(&self) -> ChemoRow {
        let c_hat = self.c_spectrum(&self.n_hat);
        let c = self.field(self.ops.to_physical(&c_hat));
        ChemoRow {
            t: self.time,
            c_linf: c.max_abs(),
            c_l2: c.lp_norm(2.0),
            c_mass: c.mass(),
            grad_c_linf: max_gradient(&self.ops, &c_hat, self.tilt),
        }
    }

    pub fn metadata(&self, snapshots: Vec<String>) -> RunMetadata {
        let g = self.ops.grid();
        RunMetadata {
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            config: self.config.clone(),
            warnings: self.warnings.clone(),
            blowup: self.blowup.clone(),
            regrids: self.regrids.clone(),
            remaps: self.remaps,
            steps: self.steps,
            final_time: self.time,
            final_lengths: g.lengths[..g.dims].to_vec(),
            unresolved_edge: self.unresolved_edge,
            initial_mass: self.mass0,
            initial_sup: self.sup0,
            c0_grad_sup: self.c0_grad_sup,
            snapshots,
        }
    }

    fn write_snapshots(&self, dir: &Path, names: &mut Vec<String>) -> Result<()> {
        let eps = self.model.epsilon();
        let n = self.density();
        let c = self.chemoattractant();
        for frame in &self.config.diagnostics.snapshot_frames {
            for (name, f) in [("n", &n), ("c", &c)] {
                let f = match frame {
                    Frame::Sheared => f.clone(),
                    Frame::Lab => retilt(f, 0.0),
                };
                let tag = match frame {
                    Frame::Sheared => "sheared",
                    Frame::Lab => "lab",
                };
                let stem = format!("{name}_t{:.6}_{tag}", self.time);
                write_snapshot(dir, &stem, &f, name, *frame, self.shear, eps)?;
                names.push(format!("{stem}.bin"));
            }
        }
        Ok(())
    }
}

/// Integrates a configuration to `t_final` or blow-up. With `out` set, writes
/// `diagnostics.csv`, `chemoattractant.csv`, `run.json`, `config.toml` and
/// the requested snapshots.
pub fn run(config: &SimConfig, out: Option<&Path>) -> Result<RunOutput> {
    let mut sim = Simulation::new(config.clone())?;
    let t_final = config.time.t_final;
    let every = config.diagnostics.every;
    let mut events: Vec<(f64, bool, bool)> = Vec::new();
    let samples = (t_final / every + 1e-9).floor() as usize;
    for k in 0..=samples {
        events.push(((k as f64 * every).min(t_final), true, false));
    }
    events.push((t_final, true, false));
    for &s in &config.diagnostics.snapshot_times {
        events.push((s, false, true));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Merge coincident events.
    let mut merged: Vec<(f64, bool, bool)> = Vec::new();
    for e in events {
        match merged.last_mut() {
            Some(last) if (e.0 - last.0).abs() <= 1e-12 * e.0.abs().max(1.0) => {
                last.1 |= e.1;
                last.2 |= e.2;
            }
            _ => merged.push(e),
        }
    }
    let snap_dir = out.map(|o| o.join("snapshots"));
    let mut rows = Vec::new();
    let mut chemo = Vec::new();
    let mut names = Vec::new();
    for (t, diag, snap) in merged {
        sim.advance_to(t)?;
        if sim.blowup().is_some() {
            rows.push(sim.diagnostics_row());
            chemo.push(sim.chemo_row());
            break;
        }
        if diag {
            rows.push(sim.diagnostics_row());
            chemo.push(sim.chemo_row());
        }
        if snap {
            if let Some(d) = &snap_dir {
                sim.write_snapshots(d, &mut names)?;
            }
        }
    }
    let metadata = sim.metadata(names);
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_diagnostics(&dir.join("diagnostics.csv"), &rows)?;
        let cpath = dir.join("chemoattractant.csv");
        let mut w = csv::Writer::from_path(&cpath).map_err(|e| Error::Parse {
            path: cpath.clone(),
            message: e.to_string(),
        })?;
        for r in &chemo {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(&cpath, e))?;
        let mpath = dir.join("run.json");
        std::fs::write(&mpath, serde_json::to_string_pretty(&metadata)?)
            .map_err(|e| Error::io(&mpath, e))?;
        let tpath = dir.join("config.toml");
        std::fs::write(&tpath, config.to_toml_string()).map_err(|e| Error::io(&tpath, e))?;
    }
    Ok(RunOutput {
        diagnostics: rows,
        chemo,
        metadata,
        final_density: sim.density(),
    })
}
