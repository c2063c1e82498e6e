use std::f64::consts::PI;

use couette_ks::grid::{Field, Grid, Spectral};
use couette_ks::kernels::yukawa;
use couette_ks::quad::{composite_rule, integrate, Tolerance};
use couette_ks::solver::{
    coarsen_axis, elliptic_solve_c, linear_step, nonlinear_rhs, read_diagnostics, read_snapshot,
    retilt, run, to_lab, Damping, ShearSpectral, SimConfig, Simulation, DIAGNOSTICS_HEADER,
};
use couette_ks::special::gauss_gauss;

fn rel_sup(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / scale
}

fn gaussian(grid: &Grid, w: f64) -> Field {
    Field::from_fn(grid.clone(), |x, y, z| (-(x * x + y * y + z * z) / (w * w)).exp())
}

fn config(text: &str) -> SimConfig {
    SimConfig::from_toml_str(text).expect("test config parses")
}

fn base_config(extra: &str) -> String {
    format!(
        r#"
seed = 7
[model]
epsilon = 0
shear = 5.0
[domain]
dims = 2
lengths = [24.0, 24.0]
resolution = [64, 64]
[time]
dt = 0.01
t_final = 0.2
cfl = 100.0
[numerics]
regrid = true
[initial]
shape = "gaussian"
width = 1.0
amplitude = 3.0
[diagnostics]
every = 0.05
{extra}
"#
    )
}

#[test]
fn fft_round_trip() {
    let g = Grid::centered(&[16, 8, 4], &[3.0, 2.0, 5.0]).unwrap();
    let f = Field::from_fn(g.clone(), |x, y, z| (x * 1.3).sin() + y * y * 0.1 + (z - 0.2).cos());
    let s = Spectral::new(&g);
    let back = s.inverse_real(&s.forward(&f.values));
    assert!(rel_sup(&back, &f.values) < 1e-14);
}

#[test]
fn zero_field_stays_zero() {
    let g = Grid::centered(&[32, 32], &[10.0, 10.0]).unwrap();
    let out = linear_step(&Field::zeros(g), 0.7, 30.0, Damping::None).unwrap();
    assert!(out.values.iter().all(|v| *v == 0.0));
}

#[test]
fn linear_step_rejects_bad_dt() {
    let g = Grid::centered(&[8, 8], &[1.0, 1.0]).unwrap();
    assert!(linear_step(&Field::zeros(g.clone()), 0.0, 1.0, Damping::None).is_err());
    assert!(linear_step(&Field::zeros(g), -1.0, 1.0, Damping::None).is_err());
}

#[test]
fn unsheared_multiplier_is_heat_semigroup() {
    let g = Grid::centered(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    let f = Field::from_fn(g.clone(), |x, y, _| (2.0 * x + 3.0 * y).cos());
    let out = linear_step(&f, 0.05, 0.0, Damping::None).unwrap();
    let expect: Vec<f64> = f.values.iter().map(|v| v * (-13.0f64 * 0.05).exp()).collect();
    assert!(rel_sup(&out.values, &expect) < 1e-13);
    let damped = linear_step(&f, 0.05, 0.0, Damping::ExpMinusT).unwrap();
    let expect: Vec<f64> = f.values.iter().map(|v| v * (-14.0f64 * 0.05).exp()).collect();
    assert!(rel_sup(&damped.values, &expect) < 1e-13);
}

#[test]
fn linear_steps_compose_exactly() {
    let g = Grid::centered(&[64, 64], &[30.0, 20.0]).unwrap();
    let f = gaussian(&g, 1.0);
    let whole = linear_step(&f, 0.9, 7.0, Damping::None).unwrap();
    let mut parts = f.clone();
    for dt in [0.1, 0.25, 0.05, 0.3, 0.2] {
        parts = linear_step(&parts, dt, 7.0, Damping::None).unwrap();
    }
    assert!((parts.tilt - whole.tilt).abs() < 1e-12);
    assert!(rel_sup(&parts.values, &whole.values) < 1e-12, "{}", rel_sup(&parts.values, &whole.values));
}

/// Lab-frame kernel convolution of `exp(-(x0²+y0²)/w²)` at `(x, y)`.
fn kernel_convolution(x: f64, y: f64, t: f64, shear: f64, w: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let b = 1.0 + shear * shear * t * t / 12.0;
    let pre = 1.0 / (4.0 * PI * t * b.sqrt());
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(y0, wt)| {
            let mu = x - 0.5 * shear * t * (y + y0);
            let gy = (-(y - y0) * (y - y0) / (4.0 * t) - y0 * y0 / (w * w)).exp();
            wt * pre * gy * gauss_gauss(mu, 4.0 * t * b, w * w)
        })
        .sum()
}

#[test]
fn propagator_matches_kernel_convolution() {
    let (shear, dt, w) = (10.0, 0.3, 0.5);
    let g = Grid::centered(&[256, 128], &[64.0, 32.0]).unwrap();
    let f = gaussian(&g, w);
    let out = to_lab(&linear_step(&f, dt, shear, Damping::None).unwrap());
    let rule = composite_rule(-10.0 * w, 10.0 * w, 40, 20);
    let xs = g.coords(0);
    let ys = g.coords(1);
    let mut num = Vec::new();
    let mut exact = Vec::new();
    for i in (0..256).step_by(2) {
        for j in (0..128).step_by(2) {
            num.push(out.values[g.index(i, j, 0)]);
            exact.push(kernel_convolution(xs[i], ys[j], dt, shear, w, &rule));
        }
    }
    let err = rel_sup(&num, &exact);
    assert!(err < 1e-6, "relative sup error {err:e}");
}

#[test]
fn retilt_round_trip() {
    let g = Grid::centered(&[128, 64], &[60.0, 20.0]).unwrap();
    let mut f = gaussian(&g, 1.5);
    f.tilt = 0.0;
    let there = retilt(&f, 1.7);
    let back = retilt(&there, 0.0);
    assert!(rel_sup(&back.values, &f.values) < 1e-12);
}

#[test]
fn remap_preserves_physical_field() {
    // Band-limited field on a box where Lx/Ly = 1, stored at tilt 1.25.
    let g = Grid::centered(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    let mut f = Field::from_fn(g.clone(), |x, y, _| {
        1.0 + (x + 2.0 * y).cos() + 0.5 * (2.0 * x - y).sin() + 0.3 * (3.0 * y).cos()
    });
    f.tilt = 1.25;
    let ops = ShearSpectral::new(&g, false);
    let spec = ops.to_spectral(&f.values);
    let remapped = Field {
        values: ops.to_physical(&ops.remap(&spec)),
        tilt: 0.25,
        ..f.clone()
    };
    let a = to_lab(&f);
    let b = to_lab(&remapped);
    assert!(rel_sup(&b.values, &a.values) < 1e-12);
}

#[test]
fn coarsening_is_lossless_for_localized_band_limited_fields() {
    let g = Grid::centered(&[128, 64], &[40.0, 20.0]).unwrap();
    let f = gaussian(&g, 2.0);
    let (v, g2) = coarsen_axis(&f.values, &g, 0).unwrap();
    assert_eq!(g2.lengths[0], 80.0);
    assert_eq!(g2.shape, g.shape);
    let direct = gaussian(&g2, 2.0);
    assert!(rel_sup(&v, &direct.values) < 1e-12);
    assert!(coarsen_axis(&f.values, &g, 2).is_err());
}

#[test]
fn elliptic_symbol_on_single_mode() {
    let g = Grid::centered(&[32, 32], &[2.0 * PI, 2.0 * PI / 2f64.sqrt()]).unwrap();
    // |k|² = 1 + 2 = 3.
    let n = Field::from_fn(g.clone(), |x, y, _| 0.7 * (x + 2f64.sqrt() * y).cos());
    let c = elliptic_solve_c(&n).unwrap();
    let expect: Vec<f64> = n.values.iter().map(|v| v / 4.0).collect();
    assert!(rel_sup(&c.values, &expect) < 1e-13);

    // Per-mode identity at a nonzero tilt uses physical wavenumbers.
    let g = Grid::centered(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    let mut n = Field::from_fn(g.clone(), |x, y, _| (2.0 * x + 3.0 * y).sin());
    n.tilt = 0.5;
    let c = elliptic_solve_c(&n).unwrap();
    let k2 = 4.0 + (3.0f64 - 0.5 * 2.0).powi(2);
    let expect: Vec<f64> = n.values.iter().map(|v| v / (1.0 + k2)).collect();
    assert!(rel_sup(&c.values, &expect) < 1e-13);
}

/// Spherical mean of the Yukawa kernel convolved with a radial density.
fn yukawa_radial(r: f64, w: f64) -> f64 {
    let f = |rho: f64| {
        let n = (-rho * rho / (w * w)).exp();
        4.0 * PI * rho * rho * n * ((-(r - rho).abs()).exp() - (-(r + rho)).exp()) / (8.0 * PI * r * rho)
    };
    integrate(f, 1e-12, 12.0 * w + r, &[r], Tolerance::rel(1e-12)).value
}

#[test]
fn elliptic_matches_yukawa_convolution() {
    let w = 1.0;
    let g = Grid::centered(&[64, 64, 64], &[24.0, 24.0, 24.0]).unwrap();
    let n = gaussian(&g, w);
    let c = elliptic_solve_c(&n).unwrap();
    assert!((c.mass() - n.mass()).abs() < 1e-12 * n.mass());
    let xs = g.coords(0);
    let mut worst: f64 = 0.0;
    for (i, j, k) in [(40, 32, 32), (44, 32, 32), (36, 36, 36), (48, 40, 32), (32, 52, 32), (20, 32, 44)] {
        let r = (xs[i] * xs[i] + xs[j] * xs[j] + xs[k] * xs[k]).sqrt();
        let exact = yukawa_radial(r, w);
        let got = c.values[g.index(i, j, k)];
        worst = worst.max((got - exact).abs() / exact);
    }
    assert!(worst < 1e-3, "relative error {worst:e}");
    // The oracle itself is sane: far from the core it approaches mass * Yukawa.
    let far = yukawa_radial(9.0, w) / (n.mass() * yukawa(9.0).unwrap());
    assert!((far - 1.0).abs() < 0.3);
}

#[test]
fn chemotaxis_vanishes_for_constant_attractant() {
    let g = Grid::centered(&[32, 32], &[10.0, 10.0]).unwrap();
    let n = gaussian(&g, 1.0);
    let c = Field::from_fn(g, |_, _, _| 2.5);
    let r = nonlinear_rhs(&n, &c, true).unwrap();
    assert!(r.max_abs() < 1e-13);
}

#[test]
fn chemotaxis_with_constant_density_is_minus_n_laplacian() {
    let g = Grid::centered(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
    let n = Field::from_fn(g.clone(), |_, _, _| 1.5);
    let c = Field::from_fn(g, |x, y, _| (x - 2.0 * y).cos());
    let r = nonlinear_rhs(&n, &c, true).unwrap();
    // -n Δc = 1.5 * 5 * c.
    let expect: Vec<f64> = c.values.iter().map(|v| 7.5 * v).collect();
    assert!(rel_sup(&r.values, &expect) < 1e-12);
}

fn smooth(x: f64, y: f64, a: [f64; 4]) -> f64 {
    1.0 + a[0] * (x + a[1]).sin() * (2.0 * y).cos() + a[2] * (3.0 * x - y + a[3]).cos()
}

#[test]
fn chemotaxis_matches_fourth_order_differences() {
    let n_grid = 128;
    let g = Grid::centered(&[n_grid, n_grid], &[2.0 * PI, 2.0 * PI]).unwrap();
    let h = g.spacing(0);
    let fa = [0.4, 0.3, 0.2, 1.1];
    let fb = [0.7, -0.5, 0.3, 0.2];
    for tilt in [0.0, 0.5] {
        // Stored coordinates: physical derivative along y is ∂Y - tilt ∂X.
        let mut n = Field::from_fn(g.clone(), |x, y, _| smooth(x, y, fa));
        let mut c = Field::from_fn(g.clone(), |x, y, _| smooth(x, y, fb));
        n.tilt = tilt;
        c.tilt = tilt;
        let r = nonlinear_rhs(&n, &c, true).unwrap();
        let at = |f: &Field, i: i64, j: i64| {
            let m = n_grid as i64;
            f.values[g.index(i.rem_euclid(m) as usize, j.rem_euclid(m) as usize, 0)]
        };
        let d = |f: &dyn Fn(i64, i64) -> f64, i: i64, j: i64, ax: usize| {
            let s = |k: i64| if ax == 0 { f(i + k, j) } else { f(i, j + k) };
            (8.0 * (s(1) - s(-1)) - (s(2) - s(-2))) / (12.0 * h)
        };
        let cx = |i: i64, j: i64| d(&|a, b| at(&c, a, b), i, j, 0);
        let cy = |i: i64, j: i64| d(&|a, b| at(&c, a, b), i, j, 1) - tilt * cx(i, j);
        let fx = |i: i64, j: i64| at(&n, i, j) * cx(i, j);
        let fy = |i: i64, j: i64| at(&n, i, j) * cy(i, j);
        let mut fd = Vec::new();
        let mut sp = Vec::new();
        for i in (0..n_grid as i64).step_by(3) {
            for j in (0..n_grid as i64).step_by(3) {
                let div = d(&fx, i, j, 0) + d(&fy, i, j, 1) - tilt * d(&fy, i, j, 0);
                fd.push(-div);
                sp.push(r.values[g.index(i as usize, j as usize, 0)]);
            }
        }
        let err = rel_sup(&sp, &fd);
        assert!(err < 1e-3, "tilt {tilt}: {err:e}");
        let mean: f64 = r.values.iter().sum::<f64>() / r.values.len() as f64;
        assert!(mean.abs() <= 1e-13 * r.max_abs());
    }
}

#[test]
fn nonlinear_rhs_rejects_mismatched_fields() {
    let g = Grid::centered(&[16, 16], &[1.0, 1.0]).unwrap();
    let h = Grid::centered(&[16, 32], &[1.0, 1.0]).unwrap();
    assert!(nonlinear_rhs(&Field::zeros(g.clone()), &Field::zeros(h), true).is_err());
    let mut tilted = Field::zeros(g.clone());
    tilted.tilt = 0.3;
    assert!(nonlinear_rhs(&Field::zeros(g), &tilted, true).is_err());
}

#[test]
fn zero_data_stay_zero_and_mass_is_conserved_per_step() {
    let cfg = config(&base_config("").replace("shape = \"gaussian\"", "shape = \"zero\""));
    let mut sim = Simulation::new(cfg).unwrap();
    for _ in 0..5 {
        sim.step(0.01).unwrap();
    }
    assert_eq!(sim.density().max_abs(), 0.0);

    let mut sim = Simulation::new(config(&base_config(""))).unwrap();
    let m0 = sim.density().mass();
    for _ in 0..20 {
        let before = sim.density().mass();
        sim.step(0.01).unwrap();
        let after = sim.density().mass();
        assert!((after - before).abs() <= 1e-12 * before.abs());
    }
    assert!((sim.density().mass() - m0).abs() <= 1e-12 * m0);
}

#[test]
fn parabolic_model_requires_initial_attractant() {
    let text = base_config("").replace("epsilon = 0", "epsilon = 1");
    assert!(Simulation::new(config(&text)).is_err());
}

fn final_density(text: &str, dt: f64) -> Field {
    let text = text.replace("dt = 0.01", &format!("dt = {dt}"));
    let mut sim = Simulation::new(config(&text)).unwrap();
    sim.advance_to(0.2).unwrap();
    to_lab(&sim.density())
}

#[test]
fn strang_splitting_is_second_order() {
    for eps in ["0", "1"] {
        let mut text = base_config("").replace("amplitude = 3.0", "amplitude = 6.0");
        if eps == "1" {
            text = text.replace("epsilon = 0", "epsilon = 1");
            text.push_str("[initial.c0]\nshape = \"gaussian\"\nwidth = 1.5\namplitude = 1.0\n");
        }
        let reference = final_density(&text, 0.004 / 32.0);
        let errs: Vec<f64> = [0.004, 0.002, 0.001]
            .iter()
            .map(|dt| rel_sup(&final_density(&text, *dt).values, &reference.values))
            .collect();
        let slope = (errs[0] / errs[2]).ln() / 4f64.ln();
        assert!((slope - 2.0).abs() <= 0.2, "epsilon {eps}: errors {errs:?}, slope {slope}");
    }
}

#[test]
fn small_data_follow_the_linear_flow() {
    let c0 = 1e-3;
    let text = base_config("")
        .replace("amplitude = 3.0", &format!("amplitude = {c0}"))
        .replace("t_final = 0.2", "t_final = 1.0")
        .replace("lengths = [24.0, 24.0]", "lengths = [64.0, 32.0]")
        .replace("resolution = [64, 64]", "resolution = [128, 64]");
    let cfg = config(&text);
    let mut sim = Simulation::new(cfg.clone()).unwrap();
    sim.advance_to(1.0).unwrap();
    // The linear reference runs through the same box doublings.
    let lin_text = text.replace("[numerics]", "[numerics]\nchemotaxis = false");
    let mut lin = Simulation::new(config(&lin_text)).unwrap();
    lin.advance_to(1.0).unwrap();
    assert_eq!(lin.grid(), sim.grid());
    assert_eq!(lin.density().tilt, sim.density().tilt);
    let diff = sim
        .density()
        .values
        .iter()
        .zip(&lin.density().values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 10.0 * c0 * c0, "difference {diff:e}");
    assert!(diff > 0.0);
}

#[test]
fn run_writes_documented_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = base_config("snapshot_times = [0.1]\n");
    let out = run(&config(&text), Some(dir.path())).unwrap();
    assert_eq!(out.diagnostics.len(), 5);
    let header = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), DIAGNOSTICS_HEADER);
    let rows = read_diagnostics(&dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(rows, out.diagnostics);
    let m0 = rows[0].mass;
    assert!(rows.iter().all(|r| (r.mass - m0).abs() <= 1e-8 * m0));
    assert!(rows.iter().all(|r| r.blowup_flag == 0));
    for frame in ["sheared", "lab"] {
        let bin = dir.path().join(format!("snapshots/n_t0.100000_{frame}.bin"));
        let (f, meta) = read_snapshot(&bin).unwrap();
        assert_eq!(meta.shape, vec![64, 64]);
        assert_eq!(meta.spacing, vec![0.375, 0.375]);
        assert_eq!(meta.epsilon, 0);
        assert!((meta.time - 0.1).abs() < 1e-12);
        assert!((meta.shear - 5.0).abs() < 1e-15);
        assert_eq!(f.values.len(), 64 * 64);
        assert!((f.mass() - m0).abs() < 1e-8 * m0);
        let js: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(bin.with_extension("json")).unwrap()).unwrap();
        assert_eq!(js["frame"], frame);
        assert!(js.get("origin").is_some() && js.get("A").is_some());
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert!(meta["code_version"].is_string());
    // Deterministic given the configuration.
    let again = run(&config(&text), None).unwrap();
    assert_eq!(again.diagnostics, out.diagnostics);
}

#[test]
fn heat_decay_rate_without_shear() {
    let text = r#"
[model]
epsilon = 0
shear = 0.0
[domain]
dims = 2
lengths = [32.0, 32.0]
resolution = [64, 64]
[time]
dt = 0.05
t_final = 20.0
[initial]
shape = "gaussian"
width = 1.0
mass = 1e-3
[diagnostics]
every = 0.5
"#;
    let out = run(&config(text), None).unwrap();
    let pts: Vec<(f64, f64)> = out
        .diagnostics
        .iter()
        .filter(|r| r.t >= 5.0 && r.t <= 20.0)
        .map(|r| (r.t.ln(), r.l2.ln()))
        .collect();
    let slope = couette_ks::fit::least_squares(&pts).unwrap().slope;
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
    assert!(!out.metadata.regrids.is_empty());
    let m0 = out.diagnostics[0].mass;
    assert!(out.diagnostics.iter().all(|r| (r.mass - m0).abs() <= 1e-8 * m0));
}

#[test]
fn validator_rules() {
    // Box shorter than 20 C*.
    let bad = base_config("").replace("width = 1.0", "width = 2.0");
    assert!(config(&bad).validate().is_err());
    // Streamwise box too short with doubling disabled is an error...
    let short = base_config("").replace("regrid = true", "regrid = false");
    assert!(config(&short).validate().is_err());
    // ...and a warning when doubling is on.
    assert!(!config(&base_config("")).validate().unwrap().is_empty());
    // Parabolic window violation is only a warning.
    let pp = base_config("[initial.c0]\nshape = \"gaussian\"\nwidth = 1.0\ngrad_scale = 1.0\n")
        .replace("epsilon = 0", "epsilon = 1");
    let w = config(&pp).validate().unwrap();
    assert!(w.iter().any(|m| m.contains("window")));
    assert!(SimConfig::from_toml_str("[model]\nepsilon = 2").is_err());
}

#[test]
fn run_reports_its_final_time_exactly() {
    // A thousand summed steps of 0.01 fall short of 10 by rounding.
    let text = base_config("")
        .replace("resolution = [64, 64]", "resolution = [16, 16]")
        .replace("t_final = 0.2", "t_final = 10.0")
        .replace("every = 0.05", "every = 0.5");
    let out = run(&config(&text), None).unwrap();
    assert_eq!(out.metadata.final_time, 10.0);
    assert_eq!(out.diagnostics.last().unwrap().t, 10.0);
}
