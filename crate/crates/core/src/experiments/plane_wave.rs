//! Spatially constant plane wave under scalar noise on a periodic grid.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_failures, ensemble_mean, step_with, ExperimentConfig, FailureRecord};
use crate::diagnostics::{
    amplitude_phase, charge_residual, discrete_charge, plane_wave_exact, plane_wave_phase, wrap_angle,
    DiagnosticsSeries,
};
use crate::error::Result;
use crate::integrators::{Closure, ComplexGridState};
use crate::noise::sample_path;

/// Ensemble statistics of a plane-wave run. Errors are reported both as the
/// mean of absolute values and as signed means.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveReport {
    pub series: DiagnosticsSeries,
    pub times: Vec<f64>,
    pub amp_num: Vec<f64>,
    pub amp_exact: Vec<f64>,
    pub amp_err: Vec<f64>,
    pub amp_err_signed: Vec<f64>,
    /// Numerical phase on the branch closest to the exact phase.
    pub phase_num: Vec<f64>,
    pub phase_exact: Vec<f64>,
    pub phase_err: Vec<f64>,
    pub phase_err_signed: Vec<f64>,
    pub trajectories_used: usize,
    pub failures: Vec<FailureRecord>,
}

#[derive(Default)]
struct Track {
    charge: Vec<f64>,
    amp_num: Vec<f64>,
    amp_err: Vec<f64>,
    abs_amp_err: Vec<f64>,
    phase_num: Vec<f64>,
    phase_exact: Vec<f64>,
    phase_err: Vec<f64>,
    abs_phase_err: Vec<f64>,
}

fn run_one(cfg: &ExperimentConfig, index: u64) -> std::result::Result<Track, FailureRecord> {
    let fail = |step: usize, e: &crate::Error| FailureRecord::from_error(cfg.seed, index, step, e);
    let grid = cfg.grid().map_err(|e| fail(0, &e))?;
    let params = cfg.params().map_err(|e| fail(0, &e))?;
    let n_steps = cfg.n_steps().map_err(|e| fail(0, &e))?;
    let step_cfg = crate::integrators::StepConfig { closure: Closure::Periodic, ..cfg.step_config() };
    let amp = Complex64::new(cfg.amplitude, 0.0);
    let path = sample_path(&cfg.noise_model(index, cfg.truncation_m), &grid, n_steps).map_err(|e| fail(0, &e))?;

    let mut u = ComplexGridState::from_fn(&grid, Closure::Periodic, |_| amp);
    let mut w = 0.0;
    let mut track = Track::default();
    let mut record = |u: &ComplexGridState, w: f64, step: usize| -> std::result::Result<(), FailureRecord> {
        let exact = plane_wave_exact(u.time, w, amp, &params);
        let exact_phase = plane_wave_phase(u.time, w, amp, &params);
        let (a, p) = amplitude_phase(&u.u[..grid.cells()]).map_err(|e| fail(step, &e))?;
        let perr = wrap_angle(p - exact_phase);
        track.charge.push(discrete_charge(u, &grid).map_err(|e| fail(step, &e))?);
        track.amp_num.push(a);
        track.amp_err.push(a - exact.norm());
        track.abs_amp_err.push((a - exact.norm()).abs());
        track.phase_num.push(exact_phase + perr);
        track.phase_exact.push(exact_phase);
        track.phase_err.push(perr);
        track.abs_phase_err.push(perr.abs());
        Ok(())
    };
    record(&u, w, 0)?;
    for n in 0..n_steps {
        u = step_with(cfg.scheme, &u, &params, path.slice(n), &grid, &step_cfg).map_err(|e| fail(n, &e))?;
        // Recompute from the step count so that times are exact multiples.
        u.time = (n + 1) as f64 * grid.dt;
        w += path.increment(n, 0);
        record(&u, w, n + 1)?;
    }
    Ok(track)
}

pub fn run_plane_wave(cfg: &ExperimentConfig) -> Result<PlaneWaveReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let n_steps = cfg.n_steps()?;
    let results: Vec<_> = (0..cfg.n_trajectories as u64).into_par_iter().map(|i| run_one(cfg, i)).collect();
    let mut tracks = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => tracks.push(t),
            Err(f) => failures.push(f),
        }
    }
    check_failures(&failures, cfg.n_trajectories)?;

    let mean = |f: fn(&Track) -> &Vec<f64>| ensemble_mean(&tracks.iter().map(|t| f(t).as_slice()).collect::<Vec<_>>());
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * grid.dt).collect();
    let amp_exact: Vec<f64> = times.iter().map(|&t| cfg.amplitude.abs() * (-params.alpha * t).exp()).collect();
    let charge = mean(|t| &t.charge);
    let residual = charge
        .windows(2)
        .map(|q| charge_residual(q[0], q[1], params.alpha, grid.dt))
        .collect::<Result<Vec<_>>>()?;
    let amp_num = mean(|t| &t.amp_num);
    let phase_num = mean(|t| &t.phase_num);
    let series = DiagnosticsSeries {
        times: times.clone(),
        charge,
        charge_residual: residual,
        energy: Vec::new(),
        two_form: None,
        amplitude: amp_num.clone(),
        phase: phase_num.clone(),
    };
    Ok(PlaneWaveReport {
        series,
        times,
        amp_num,
        amp_exact,
        amp_err: mean(|t| &t.abs_amp_err),
        amp_err_signed: mean(|t| &t.amp_err),
        phase_num,
        phase_exact: mean(|t| &t.phase_exact),
        phase_err: mean(|t| &t.abs_phase_err),
        phase_err_signed: mean(|t| &t.phase_err),
        trajectories_used: tracks.len(),
        failures,
    })
}
