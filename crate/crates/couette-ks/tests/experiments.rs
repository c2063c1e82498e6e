use couette_ks::experiments::{
    decay_fit, envelope_lp_exponent, pp_vs_pe_dirs, suppression_sweep, summarize, Predicate, RunBundle, SweepSpec,
    SweptParameter,
};
use couette_ks::kernels::lp_decay_exponent;
use couette_ks::solver::{run, SimConfig};

fn sim_toml(shear: f64, eps: u8, initial: &str, extra: &str, t_final: f64, n: usize) -> String {
    format!(
        r#"
seed = 3
[model]
epsilon = {eps}
shear = {shear}
[domain]
dims = 2
lengths = [20.0, 20.0]
resolution = [{n}, {n}]
[time]
dt = 0.01
t_final = {t_final}
cfl = 0.5
[numerics]
regrid = true
{extra}
[initial]
{initial}
[diagnostics]
every = 0.05
"#
    )
}

fn sweep_toml(values: &str, base: &str) -> String {
    // Re-nest the flat base config under [base].
    let mut nested = String::new();
    for line in base.lines() {
        let l = line.trim();
        if let Some(h) = l.strip_prefix('[') {
            nested.push_str(&format!("[base.{h}\n"));
        } else if !l.is_empty() {
            nested.push_str(l);
            nested.push('\n');
        }
    }
    let (top, rest): (Vec<&str>, Vec<&str>) = {
        let idx = nested.find("[base.").unwrap_or(nested.len());
        (vec![&nested[..idx]], vec![&nested[idx..]])
    };
    format!(
        "parameter = \"shear\"\nvalues = {values}\npredicate = \"no_blowup\"\n[base]\n{}{}",
        top[0], rest[0]
    )
}

#[test]
fn exponent_matches_three_dimensional_rate() {
    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        for g in [0.35, 0.5] {
            let a = envelope_lp_exponent(p, g, 3, true);
            assert!((a - lp_decay_exponent(p, g)).abs() < 1e-14);
        }
    }
    assert_eq!(envelope_lp_exponent(2.0, 0.5, 2, false), -0.5);
    assert_eq!(envelope_lp_exponent(f64::INFINITY, 0.5, 3, false), -1.5);
}

#[test]
fn sweep_spec_rejects_unsorted_values() {
    let base = sim_toml(0.0, 0, "shape = \"zero\"\nwidth = 1.0", "", 0.1, 32);
    assert!(SweepSpec::from_toml_str(&sweep_toml("[0.0, 10.0]", &base)).is_ok());
    assert!(SweepSpec::from_toml_str(&sweep_toml("[10.0, 0.0]", &base)).is_err());
    assert!(SweepSpec::from_toml_str(&sweep_toml("[]", &base)).is_err());
}

#[test]
fn empty_data_sweep_never_blows_up() {
    let base = sim_toml(0.0, 0, "shape = \"zero\"\nwidth = 1.0", "", 0.2, 32);
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SweepSpec::from_toml_str(&sweep_toml("[0.0, 5.0, 10.0]", &base)).unwrap();
    spec.output = Some(dir.path().to_path_buf());
    let s = suppression_sweep(&spec).unwrap();
    assert_eq!(s.rows.len(), 3);
    for r in &s.rows {
        assert!(!r.blowup && r.success);
        assert_eq!(r.final_sup, 0.0);
    }
    assert_eq!(s.threshold, Some(0.0));
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("value_5/diagnostics.csv").exists());
}

#[test]
fn supercritical_baseline_blows_up() {
    let base = sim_toml(0.0, 0, "shape = \"gaussian\"\nwidth = 1.0\nmass = 100.0", "", 0.5, 64);
    let spec = SweepSpec::from_toml_str(&sweep_toml("[0.0]", &base)).unwrap();
    let s = suppression_sweep(&spec).unwrap();
    let r = &s.rows[0];
    assert!(r.blowup, "{r:?}");
    assert!(r.trigger_time.unwrap() < 0.5);
    assert_eq!(s.threshold, None);
}

#[test]
fn summary_is_a_pure_function_of_rows() {
    let base = sim_toml(0.0, 0, "shape = \"gaussian\"\nwidth = 1.0\nmass = 100.0", "", 0.3, 64);
    let spec = SweepSpec::from_toml_str(&sweep_toml("[0.0, 30.0]", &base)).unwrap();
    let a = suppression_sweep(&spec).unwrap();
    let b = summarize(SweptParameter::Shear, a.rows.iter().rev().cloned().collect());
    assert_eq!(a, b);
    assert_eq!(spec.predicate, Predicate::NoBlowup);
}

#[test]
fn heat_control_decays_at_diffusive_rate() {
    let cfg = SimConfig::from_toml_str(&sim_toml(
        0.0,
        0,
        "shape = \"gaussian\"\nwidth = 0.5\namplitude = 1e-3",
        "",
        12.0,
        64,
    ))
    .unwrap();
    let out = run(&cfg, None).unwrap();
    let rep = decay_fit(&out.diagnostics, &cfg, 2.0, 0.3).unwrap();
    assert!((rep.l2.slope + 0.5).abs() <= 0.1, "{:?}", rep.l2);
    assert!((rep.linf.slope + 1.0).abs() <= 0.1, "{:?}", rep.linf);
    assert!(rep.l2_ok && rep.linf_ok);
}

#[test]
fn linear_sheared_run_decays_at_least_as_fast_as_envelope() {
    let cfg = SimConfig::from_toml_str(&sim_toml(
        50.0,
        0,
        "shape = \"gaussian\"\nwidth = 1.0\namplitude = 1.0",
        "chemotaxis = false",
        12.0,
        64,
    ))
    .unwrap();
    let out = run(&cfg, None).unwrap();
    let rep = decay_fit(&out.diagnostics, &cfg, 2.0, 0.1).unwrap();
    assert!(rep.l2_ok && rep.linf_ok, "{rep:?}");
}

#[test]
fn decay_fit_needs_long_runs() {
    let cfg = SimConfig::from_toml_str(&sim_toml(0.0, 0, "shape = \"zero\"\nwidth = 1.0", "", 1.0, 32)).unwrap();
    let out = run(&cfg, None).unwrap();
    assert!(decay_fit(&out.diagnostics, &cfg, 2.0, 0.3).is_err());
}

fn pair(dir: &std::path::Path, amp: f64, c0_scale: f64, shear: f64) -> (std::path::PathBuf, std::path::PathBuf) {
    let init = format!("shape = \"gaussian\"\nwidth = 1.0\namplitude = {amp}");
    let c0 = format!(
        "[initial.c0]\nshape = \"gaussian\"\nwidth = 1.0\namplitude = {c0_scale}\ngrad_scale = {c0_scale}"
    );
    let pe = SimConfig::from_toml_str(&sim_toml(shear, 0, &init, "", 0.3, 64)).unwrap();
    let pp = SimConfig::from_toml_str(&format!("{}\n{c0}", sim_toml(shear, 1, &init, "", 0.3, 64))).unwrap();
    let (a, b) = (dir.join("pp"), dir.join("pe"));
    run(&pp, Some(&a)).unwrap();
    run(&pe, Some(&b)).unwrap();
    (a, b)
}

#[test]
fn tiny_data_variants_agree_to_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let c0 = 1e-3;
    let (a, b) = pair(dir.path(), c0, c0 / 100.0, 5.0);
    let cmp = pp_vs_pe_dirs(&a, &b).unwrap();
    assert!(cmp.max_n_sup_difference <= 10.0 * c0 * c0, "{}", cmp.max_n_sup_difference);
    assert!(!cmp.rows.is_empty());
    for r in &cmp.rows {
        assert!(r.c_ratio_pp.is_finite() && r.c_ratio_pe.is_finite());
    }
    assert!(!cmp.window_violated);
    // Mismatched order is rejected.
    assert!(pp_vs_pe_dirs(&b, &a).is_err());
    assert_eq!(RunBundle::load(&a).unwrap().diagnostics.len(), cmp.rows.len() + 1);
}

#[test]
fn violated_window_is_a_recorded_warning() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = pair(dir.path(), 1.0, 0.5, 5.0);
    let cmp = pp_vs_pe_dirs(&a, &b).unwrap();
    assert!(cmp.window_violated, "{:?}", cmp.warnings_pp);
}
