//! Strong convergence in time against a fine-step reference that shares the
//! same Brownian path.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_failures, step_with, steps_for, ExperimentConfig, FailureRecord};
use crate::diagnostics::{discrete_l2_error, neumaier_sum};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::integrators::{Closure, ComplexGridState};
use crate::noise::{sample_path, NoisePath};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    /// Noise truncation used for both reference and coarse runs.
    pub m: usize,
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    /// One curve per requested truncation (stochastic runs only).
    pub per_m: Option<Vec<ConvergenceCurve>>,
    pub trajectories_used: usize,
    pub failures: Vec<FailureRecord>,
}

/// Least-squares slope of `log₂ e` against `log₂ Δt`.
pub fn fit_slope(dts: &[f64], errors: &[f64]) -> Result<f64> {
    if dts.len() != errors.len() || dts.len() < 2 {
        return Err(Error::InvalidParameter("need at least two (dt, error) pairs".into()));
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("errors must be positive to fit a slope".into()));
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn level_dt(level: i32) -> f64 {
    2f64.powi(-level)
}

fn initial(grid: &GridSpec) -> ComplexGridState {
    ComplexGridState::from_fn(grid, Closure::Dirichlet, |x| Complex64::new((std::f64::consts::PI * x).sin(), 0.0))
}

fn integrate(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    path: Option<&NoisePath>,
    n_steps: usize,
) -> std::result::Result<ComplexGridState, (usize, Error)> {
    let params = cfg.params().map_err(|e| (0, e))?;
    let step_cfg = cfg.step_config();
    let zero = vec![0.0; grid.nodes()];
    let mut u = initial(grid);
    for n in 0..n_steps {
        let dw = path.map_or(zero.as_slice(), |p| p.slice(n));
        u = step_with(cfg.scheme, &u, &params, dw, grid, &step_cfg).map_err(|e| (n, e))?;
        u.time = (n + 1) as f64 * grid.dt;
    }
    Ok(u)
}

/// Squared errors of every coarse level for one trajectory.
fn run_one(cfg: &ExperimentConfig, m: usize, index: u64) -> std::result::Result<Vec<f64>, FailureRecord> {
    let fail = |step: usize, e: &Error| FailureRecord::from_error(cfg.seed, index, step, e);
    let base = cfg.grid().map_err(|e| fail(0, &e))?;
    let grid_ref = base.with_dt(level_dt(cfg.reference_level)).map_err(|e| fail(0, &e))?;
    let n_ref = steps_for(cfg.t_final, grid_ref.dt).map_err(|e| fail(0, &e))?;
    let stochastic = cfg.epsilon != 0.0;
    let path = if stochastic {
        Some(sample_path(&cfg.noise_model(index, m), &grid_ref, n_ref).map_err(|e| fail(0, &e))?)
    } else {
        None
    };
    let reference = integrate(cfg, &grid_ref, path.as_ref(), n_ref).map_err(|(n, e)| fail(n, &e))?;
    cfg.coarse_levels
        .iter()
        .map(|&level| {
            let grid = base.with_dt(level_dt(level)).map_err(|e| fail(0, &e))?;
            let n = steps_for(cfg.t_final, grid.dt).map_err(|e| fail(0, &e))?;
            let coarse_path = match &path {
                Some(p) => Some(p.coarsen((cfg.reference_level - level) as u32).map_err(|e| fail(0, &e))?),
                None => None,
            };
            let u = integrate(cfg, &grid, coarse_path.as_ref(), n).map_err(|(n, e)| fail(n, &e))?;
            let e = discrete_l2_error(&u, &reference, &grid).map_err(|e| fail(n, &e))?;
            Ok(e * e)
        })
        .collect()
}

fn curve(cfg: &ExperimentConfig, m: usize, trajectories: usize) -> Result<(ConvergenceCurve, usize, Vec<FailureRecord>)> {
    let results: Vec<_> = (0..trajectories as u64).into_par_iter().map(|i| run_one(cfg, m, i)).collect();
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(e) => ok.push(e),
            Err(f) => failures.push(f),
        }
    }
    check_failures(&failures, trajectories)?;
    let dts: Vec<f64> = cfg.coarse_levels.iter().map(|&l| level_dt(l)).collect();
    let errors: Vec<f64> = (0..dts.len())
        .map(|k| (neumaier_sum(ok.iter().map(|e| e[k])) / ok.len() as f64).sqrt())
        .collect();
    let slope = fit_slope(&dts, &errors)?;
    Ok((ConvergenceCurve { m, dts, errors, slope }, ok.len(), failures))
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if cfg.epsilon == 0.0 {
        let (c, used, failures) = curve(cfg, cfg.truncation_m, 1)?;
        return Ok(ConvergenceReport {
            dts: c.dts,
            errors: c.errors,
            slope: c.slope,
            per_m: None,
            trajectories_used: used,
            failures,
        });
    }
    let ms = if cfg.per_m.is_empty() { vec![cfg.truncation_m] } else { cfg.per_m.clone() };
    let mut curves = Vec::new();
    let mut failures = Vec::new();
    let mut used = 0;
    for &m in &ms {
        let (c, u, f) = curve(cfg, m, cfg.n_trajectories)?;
        curves.push(c);
        failures.extend(f);
        used = used.max(u);
    }
    let main = curves.iter().find(|c| c.m == cfg.truncation_m).unwrap_or(&curves[0]).clone();
    Ok(ConvergenceReport {
        dts: main.dts,
        errors: main.errors,
        slope: main.slope,
        per_m: Some(curves),
        trajectories_used: used,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let dts = [0.5, 0.25, 0.125, 0.0625];
        let errs: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powf(1.5)).collect();
        assert!((fit_slope(&dts, &errs).unwrap() - 1.5).abs() < 1e-12);
        assert!(fit_slope(&dts, &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(fit_slope(&dts[..1], &errs[..1]).is_err());
    }

    #[test]
    fn reference_against_itself_is_exact() {
        let mut cfg = ExperimentConfig::defaults(super::super::Experiment::Convergence);
        cfg.dx = 1.0 / 16.0;
        cfg.reference_level = 6;
        let grid = cfg.grid().unwrap().with_dt(level_dt(6)).unwrap();
        let n = steps_for(cfg.t_final, grid.dt).unwrap();
        let path = sample_path(&cfg.noise_model(0, 1), &grid, n).unwrap();
        let a = integrate(&cfg, &grid, Some(&path), n).unwrap();
        let b = integrate(&cfg, &grid, Some(&path.coarsen(0).unwrap()), n).unwrap();
        assert_eq!(discrete_l2_error(&a, &b, &grid).unwrap(), 0.0);
    }
}
