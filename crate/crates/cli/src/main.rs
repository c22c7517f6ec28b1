use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conformal_ms::experiments::{
    run_convergence, run_plane_wave, run_soliton, run_two_form_audit, write_audit_csv, write_convergence_csv,
    write_plane_wave_csv, write_soliton_csv, Experiment, ExperimentConfig,
};
use conformal_ms::Error;

#[derive(Parser)]
#[command(name = "conformal-ms", version, about = "Conformal multi-symplectic experiments for the damped stochastic NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spatially constant plane wave under scalar noise.
    PlaneWave(Overrides),
    /// Soliton charge and energy, conformal scheme next to Crank–Nicolson.
    Soliton(Overrides),
    /// Strong convergence order in time.
    Convergence(Overrides),
    /// Discrete 2-form audit with random tangent pairs.
    TwoFormAudit(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    dx: Option<String>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<String>,
    /// Number of trajectories.
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// cms, ms or cn.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    /// Spectral truncation M.
    #[arg(long = "noise-modes")]
    noise_modes: Option<String>,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Overrides {
    fn build(&self, experiment: Experiment) -> conformal_ms::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                ExperimentConfig::parse(&text, experiment)?
            }
            None => ExperimentConfig::defaults(experiment),
        };
        if cfg.experiment != experiment {
            return Err(Error::Config(format!(
                "config file is for '{}' but the subcommand is '{experiment}'",
                cfg.experiment
            )));
        }
        let flags = [
            ("alpha", &self.alpha),
            ("epsilon", &self.eps),
            ("dt", &self.dt),
            ("dx", &self.dx),
            ("t_final", &self.t_final),
            ("n_trajectories", &self.paths),
            ("seed", &self.seed),
            ("scheme", &self.scheme),
            ("theta", &self.theta),
            ("truncation_m", &self.noise_modes),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(command: &Command) -> conformal_ms::Result<()> {
    let (experiment, o) = match command {
        Command::PlaneWave(o) => (Experiment::PlaneWave, o),
        Command::Soliton(o) => (Experiment::SolitonChargeEnergy, o),
        Command::Convergence(o) => (Experiment::Convergence, o),
        Command::TwoFormAudit(o) => (Experiment::TwoFormAudit, o),
    };
    let cfg = o.build(experiment)?;
    let out = o.out.as_path();
    match experiment {
        Experiment::PlaneWave => {
            let r = run_plane_wave(&cfg)?;
            write_plane_wave_csv(out, &r)?;
            let last = r.times.len() - 1;
            println!(
                "plane-wave: {} paths, T = {}, mean |amp err| = {:e}, mean |phase err| = {:e}",
                r.trajectories_used, r.times[last], r.amp_err[last], r.phase_err[last]
            );
        }
        Experiment::SolitonChargeEnergy => {
            let r = run_soliton(&cfg)?;
            write_soliton_csv(out, &r)?;
            let max = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            println!(
                "soliton: {} paths, max |r| cms = {:e}, cn = {:e}",
                r.trajectories_used,
                max(&r.cms.charge_residual),
                max(&r.cn.charge_residual)
            );
        }
        Experiment::Convergence => {
            let r = run_convergence(&cfg)?;
            write_convergence_csv(out, &r, cfg.truncation_m)?;
            match &r.per_m {
                Some(curves) => {
                    for c in curves {
                        println!("convergence: M = {}, slope = {:.4}", c.m, c.slope);
                    }
                }
                None => println!("convergence: deterministic slope = {:.4}", r.slope),
            }
        }
        Experiment::TwoFormAudit => {
            let r = run_two_form_audit(&cfg)?;
            write_audit_csv(out, &r)?;
            println!("two-form-audit: {} paths, max defect = {:e}", r.trajectories_used, r.max_defect);
        }
    }
    println!("wrote CSV files to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::NonDyadic(_) => 2,
                Error::FailureThreshold { .. } => 3,
                _ => 1,
            })
        }
    }
}
