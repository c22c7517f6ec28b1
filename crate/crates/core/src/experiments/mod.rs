//! Monte Carlo experiment drivers and their configuration.
//!
//! Trajectories are independent work items: each one derives its noise from
//! `(seed, trajectory index)` alone, runs on whichever rayon worker picks it
//! up, and the results are merged in index order with compensated sums, so
//! the output does not depend on scheduling.

mod audit;
mod convergence;
mod output;
mod plane_wave;
mod soliton;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::diagnostics::neumaier_sum;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::NlsParameters;
use crate::integrators::{cms_step_nls, cn_step, ms_step_transformed, Closure, ComplexGridState, StepConfig};
use crate::noise::{NoiseKind, NoiseModel};

pub use audit::{kdv_initial_state, run_two_form_audit, AuditReport};
pub use convergence::{fit_slope, run_convergence, ConvergenceCurve, ConvergenceReport};
pub use output::{write_audit_csv, write_convergence_csv, write_plane_wave_csv, write_soliton_csv};
pub use plane_wave::{run_plane_wave, PlaneWaveReport};
pub use soliton::{run_soliton, SolitonReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PlaneWave,
    SolitonChargeEnergy,
    Convergence,
    TwoFormAudit,
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "plane-wave" | "planewave" => Ok(Self::PlaneWave),
            "soliton" | "soliton-charge-energy" | "solitonchargeenergy" => Ok(Self::SolitonChargeEnergy),
            "convergence" => Ok(Self::Convergence),
            "two-form-audit" | "twoformaudit" | "audit" => Ok(Self::TwoFormAudit),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PlaneWave => "plane-wave",
            Self::SolitonChargeEnergy => "soliton",
            Self::Convergence => "convergence",
            Self::TwoFormAudit => "two-form-audit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cms,
    /// Transformed multi-symplectic scheme, evaluated at `t_n + θΔt`.
    Ms,
    Cn,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cms" => Ok(Self::Cms),
            "ms" => Ok(Self::Ms),
            "cn" => Ok(Self::Cn),
            other => Err(Error::Config(format!("invalid scheme '{other}'"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cms => "cms",
            Self::Ms => "ms",
            Self::Cn => "cn",
        })
    }
}

/// Structure used by the 2-form audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditSystem {
    Nls,
    Kdv,
}

/// Flat experiment description. Every field can be set from a config file
/// line `name = value` using the field name as key.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub noise: NoiseKind,
    pub truncation_m: usize,
    pub n_trajectories: usize,
    pub scheme: Scheme,
    pub theta: f64,
    pub reference_level: i32,
    pub coarse_levels: Vec<i32>,
    /// Truncations for the per-M convergence table; empty means only
    /// `truncation_m`.
    pub per_m: Vec<usize>,
    pub seed: u64,
    /// Plane-wave amplitude `A` (real).
    pub amplitude: f64,
    pub system: AuditSystem,
    /// KdV noise strength.
    pub gamma: f64,
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
}

const KEYS: &[&str] = &[
    "experiment",
    "x_left",
    "x_right",
    "dx",
    "dt",
    "t_final",
    "alpha",
    "epsilon",
    "noise",
    "truncation_m",
    "n_trajectories",
    "scheme",
    "theta",
    "reference_level",
    "coarse_levels",
    "per_m",
    "seed",
    "amplitude",
    "system",
    "gamma",
    "fixed_point_tol",
    "max_iterations",
];

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        let base = Self {
            experiment,
            x_left: -25.0,
            x_right: 25.0,
            dx: 0.1,
            dt: 0.01,
            t_final: 10.0,
            alpha: 0.1,
            epsilon: 0.5,
            noise: NoiseKind::SpectralTruncated,
            truncation_m: 8,
            n_trajectories: 100,
            scheme: Scheme::Cms,
            theta: 1.0,
            reference_level: 12,
            coarse_levels: vec![11, 10, 9, 8, 7, 6, 5],
            per_m: Vec::new(),
            seed: 20_240_601,
            amplitude: 0.5,
            system: AuditSystem::Nls,
            gamma: 0.3,
            fixed_point_tol: 1e-13,
            max_iterations: 200,
        };
        match experiment {
            Experiment::PlaneWave => Self {
                x_left: 0.0,
                x_right: two_pi,
                dx: two_pi / 32.0,
                t_final: 5.0,
                epsilon: 2f64.sqrt(),
                noise: NoiseKind::Scalar,
                truncation_m: 1,
                n_trajectories: 200,
                ..base
            },
            Experiment::SolitonChargeEnergy => base,
            Experiment::Convergence => Self {
                x_left: -1.0,
                x_right: 1.0,
                dx: 1.0 / 256.0,
                dt: 1.0 / 4096.0,
                t_final: 0.25,
                alpha: 0.02,
                epsilon: 2f64.sqrt(),
                truncation_m: 1,
                ..base
            },
            Experiment::TwoFormAudit => Self {
                x_left: -5.0,
                x_right: 5.0,
                dx: 0.1,
                t_final: 1.0,
                n_trajectories: 5,
                truncation_m: 4,
                ..base
            },
        }
    }

    /// Apply `key = value` lines on top of the defaults for `experiment`
    /// (or for the experiment named in the text, if any).
    pub fn parse(text: &str, experiment: Experiment) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut chosen = experiment;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "experiment" {
                chosen = v.parse()?;
            }
            pairs.push((k.to_string(), v.to_string()));
        }
        let mut cfg = Self::defaults(chosen);
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s.trim())).collect()
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "x_left" => self.x_left = num(key, value)?,
            "x_right" => self.x_right = num(key, value)?,
            "dx" => self.dx = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "noise" => {
                self.noise = match value.to_ascii_lowercase().as_str() {
                    "scalar" => NoiseKind::Scalar,
                    "spectral" | "spectral_truncated" | "spectraltruncated" => NoiseKind::SpectralTruncated,
                    _ => return Err(Error::Config(format!("invalid noise '{value}'"))),
                }
            }
            "truncation_m" => self.truncation_m = num(key, value)?,
            "n_trajectories" => self.n_trajectories = num(key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "theta" => self.theta = num(key, value)?,
            "reference_level" => self.reference_level = num(key, value)?,
            "coarse_levels" => self.coarse_levels = list(key, value)?,
            "per_m" => self.per_m = list(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "system" => {
                self.system = match value.to_ascii_lowercase().as_str() {
                    "nls" => AuditSystem::Nls,
                    "kdv" => AuditSystem::Kdv,
                    _ => return Err(Error::Config(format!("invalid system '{value}'"))),
                }
            }
            "gamma" => self.gamma = num(key, value)?,
            "fixed_point_tol" => self.fixed_point_tol = num(key, value)?,
            "max_iterations" => self.max_iterations = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}' (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.params()?;
        if self.n_trajectories < 1 {
            return Err(Error::Config("n_trajectories must be >= 1".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config("t_final must be positive".into()));
        }
        if self.truncation_m < 1 || self.per_m.contains(&0) {
            return Err(Error::Config("noise truncation must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta {} outside [0, 1]", self.theta)));
        }
        if !(self.fixed_point_tol > 0.0) || self.max_iterations < 1 {
            return Err(Error::Config("solver tolerance and iteration cap must be positive".into()));
        }
        if self.experiment == Experiment::Convergence {
            if self.coarse_levels.is_empty() {
                return Err(Error::Config("coarse_levels is empty".into()));
            }
            if let Some(l) = self.coarse_levels.iter().find(|&&l| l >= self.reference_level) {
                return Err(Error::Config(format!(
                    "coarse level {l} is not coarser than reference level {}",
                    self.reference_level
                )));
            }
        } else {
            self.n_steps()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.x_left, self.x_right, self.dx, self.dt).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<NlsParameters> {
        NlsParameters::new(self.alpha, self.epsilon).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            fixed_point_tol: self.fixed_point_tol,
            max_iterations: self.max_iterations,
            theta: self.theta,
            closure: Closure::Dirichlet,
        }
    }

    /// Number of steps of size `dt` to reach `t_final`.
    pub fn n_steps(&self) -> Result<usize> {
        steps_for(self.t_final, self.dt)
    }

    /// Noise model for trajectory `index`.
    pub fn noise_model(&self, index: u64, truncation: usize) -> NoiseModel {
        match self.noise {
            NoiseKind::Scalar => NoiseModel::scalar(self.seed).with_trajectory(index),
            NoiseKind::SpectralTruncated => {
                NoiseModel::spectral(truncation, self.x_left, self.x_right, self.seed).with_trajectory(index)
            }
        }
    }
}

pub(crate) fn steps_for(t_final: f64, dt: f64) -> Result<usize> {
    let n = (t_final / dt).round();
    if n < 1.0 || ((n * dt - t_final).abs() > 1e-9 * t_final) {
        return Err(Error::Config(format!("t_final {t_final} is not a multiple of dt {dt}")));
    }
    Ok(n as usize)
}

/// A trajectory that was dropped because a step failed.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub seed: u64,
    pub trajectory: u64,
    pub step: usize,
    pub residual: f64,
    pub message: String,
}

impl FailureRecord {
    pub(crate) fn from_error(seed: u64, trajectory: u64, step: usize, err: &Error) -> Self {
        let residual = match err {
            Error::NonConvergence { residual, .. } => *residual,
            _ => f64::NAN,
        };
        Self { seed, trajectory, step, residual, message: err.to_string() }
    }
}

/// Fail when more than 1% of the trajectories were dropped.
pub(crate) fn check_failures(failures: &[FailureRecord], total: usize) -> Result<()> {
    if failures.len() * 100 > total {
        return Err(Error::FailureThreshold { failed: failures.len(), total });
    }
    Ok(())
}

/// Advance a field in the `u` variable with the selected scheme.
pub(crate) fn step_with(
    scheme: Scheme,
    u: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<ComplexGridState> {
    match scheme {
        Scheme::Cms => cms_step_nls(u, params, dw, grid, cfg),
        Scheme::Cn => cn_step(u, params, dw, grid, cfg),
        Scheme::Ms => {
            let up = (params.alpha * u.time).exp();
            let w = ComplexGridState::new(u.u.iter().map(|v| v * up).collect(), u.time);
            let next = ms_step_transformed(&w, params, dw, grid, cfg)?;
            let down = (-params.alpha * next.time).exp();
            Ok(ComplexGridState::new(next.u.iter().map(|v| v * down).collect(), next.time))
        }
    }
}

/// Element-wise ensemble mean of equally long series, summed in the given
/// order.
pub(crate) fn ensemble_mean(series: &[&[f64]]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let n = series.len() as f64;
    (0..series[0].len()).map(|k| neumaier_sum(series.iter().map(|s| s[k])) / n).collect()
}

pub(crate) fn sech_profile(grid: &GridSpec) -> ComplexGridState {
    ComplexGridState::from_fn(grid, Closure::Dirichlet, |x| Complex64::new(1.0 / x.cosh(), 0.0))
}
