use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use couette_ks::experiments::{decay_fit_dir, pp_vs_pe_dirs, suppression_sweep, SweepSpec};
use couette_ks::kernels::{
    envelope_a, envelope_a1, envelope_a2, envelope_a3, green_c_parabolic, green_couette_2d, green_couette_3d,
    grad_green_couette, wave_envelope, yukawa, yukawa_gradient_bound, EnvelopeParams, KernelQuery, Model,
};
use couette_ks::lemma_lab::{estimate_bootstrap_constants, run_lemma, BootstrapConfig, LemmaGrid, LemmaId};
use couette_ks::oracle::{run_oracle, OracleConfig, OracleMode};
use couette_ks::solver::{run, SimConfig};

#[derive(Parser)]
#[command(name = "couette-ks", version, about = "Keller-Segel chemotaxis in Couette shear")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form kernels and envelopes.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Run the spectral solver.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Quadrature reference solution (linear propagation or Picard iteration).
    Oracle {
        #[arg(long, value_enum)]
        mode: OracleArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample one convolution estimate over a parameter grid.
    VerifyLemmas {
        /// Estimate id, e.g. L2.3 or A.2b.
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        grid: PathBuf,
        /// Per-case CSV; the summary JSON goes next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Suppression sweep over shear or mass.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Late-time decay exponents of a finished run.
    Fit {
        #[arg(long)]
        run: PathBuf,
    },
    /// Parabolic-parabolic against parabolic-elliptic run.
    Compare {
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        pe: PathBuf,
    },
    /// Realized against linear envelope constant of a finished run.
    Bootstrap {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Subcommand)]
enum KernelAction {
    Eval(EvalArgs),
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    z: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y0: f64,
    #[arg(long = "A", default_value_t = 0.0)]
    shear: f64,
    #[arg(long, value_enum)]
    which: Which,
    /// Envelope exponent theta.
    #[arg(long, default_value_t = 0.8)]
    theta: f64,
    /// Envelope exponent gamma.
    #[arg(long, default_value_t = 0.4)]
    gamma: f64,
    /// 0 for the elliptic attractant, 1 for the parabolic one.
    #[arg(long, default_value_t = 0)]
    epsilon: u8,
    /// Singularity order of the damped window envelope.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Wave widths (D1, D2, D3) for `wave`.
    #[arg(long, num_args = 3, default_values_t = [60.0, 60.0, 60.0])]
    widths: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    G3,
    G2,
    Grad,
    Gc1,
    Yukawa,
    YukawaGrad,
    #[value(name = "envA")]
    EnvA,
    #[value(name = "envA1")]
    EnvA1,
    #[value(name = "envA2")]
    EnvA2,
    #[value(name = "envA3")]
    EnvA3,
    Wave,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Linear,
    Picard,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn kernel_eval(a: &EvalArgs) -> Result<Vec<f64>> {
    let q = KernelQuery::new(a.x, a.y, a.z, a.t, a.y0, a.shear);
    let env = || -> Result<EnvelopeParams> {
        let p = EnvelopeParams::new(Model::from_epsilon(a.epsilon)?, a.shear, a.theta, a.gamma);
        p.validate()?;
        Ok(p)
    };
    let r = (a.x * a.x + a.y * a.y + a.z * a.z).sqrt();
    let v = match a.which {
        Which::G3 => vec![green_couette_3d(&q)?],
        Which::G2 => vec![green_couette_2d(&q)?],
        Which::Grad => {
            let g = grad_green_couette(&q)?;
            vec![g.dx, g.dy0, g.dz]
        }
        Which::Gc1 => vec![green_c_parabolic(&q)?],
        Which::Yukawa => vec![yukawa(r)?],
        Which::YukawaGrad => vec![yukawa_gradient_bound(r)?],
        Which::EnvA => vec![envelope_a(a.t, &env()?)?],
        Which::EnvA1 => vec![envelope_a1(a.t, &env()?)?],
        Which::EnvA2 => vec![envelope_a2(a.t, &env()?)?],
        Which::EnvA3 => vec![envelope_a3(a.t, a.alpha, &env()?)?],
        Which::Wave => {
            let [d1, d2, d3] = a.widths[..] else { bail!("--widths takes three values") };
            vec![wave_envelope(a.x, a.y, a.z, a.t, [d1, d2, d3], a.shear)?]
        }
    };
    Ok(v)
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Kernel { action: KernelAction::Eval(args) } => {
            let vals = kernel_eval(&args)?;
            let text: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
            println!("{}", text.join(" "));
        }
        Command::Simulate { config, out } => {
            let cfg = SimConfig::from_file(&config)?;
            let res = run(&cfg, Some(&out)).context("simulation failed")?;
            for w in &res.metadata.warnings {
                eprintln!("warning: {w}");
            }
            match &res.metadata.blowup {
                Some(b) => println!("blow-up at t = {} ({})", b.time, b.reason),
                None => println!("completed to t = {}", res.metadata.final_time),
            }
        }
        Command::Oracle { mode, config, out } => {
            let cfg = OracleConfig::from_file(&config)?;
            let mode = match mode {
                OracleArg::Linear => OracleMode::Linear,
                OracleArg::Picard => OracleMode::Picard,
            };
            let summary = run_oracle(&cfg, mode, out.as_deref()).context("oracle failed")?;
            print_json(&summary)?;
        }
        Command::VerifyLemmas { lemma, grid, out } => {
            let id: LemmaId = lemma.parse()?;
            let grid = LemmaGrid::from_file(&grid)?;
            let report = run_lemma(id, &grid).with_context(|| format!("checking {id}"))?;
            report.write_csv(&out)?;
            let summary = summary_path(&out);
            report.write_summary(&summary)?;
            println!(
                "{id}: {} cases, sup ratio {:.6e}, {}",
                report.cases,
                report.sup_ratio,
                if report.pass { "pass" } else { "FAIL" }
            );
            println!("summary written to {}", summary.display());
        }
        Command::Sweep { spec } => {
            let spec = SweepSpec::from_file(&spec)?;
            let summary = suppression_sweep(&spec).context("sweep failed")?;
            print_json(&summary)?;
        }
        Command::Fit { run } => print_json(&decay_fit_dir(&run)?)?,
        Command::Compare { pp, pe } => print_json(&pp_vs_pe_dirs(&pp, &pe)?)?,
        Command::Bootstrap { run } => {
            print_json(&estimate_bootstrap_constants(&BootstrapConfig { run_dir: run })?)?
        }
    }
    Ok(())
}
