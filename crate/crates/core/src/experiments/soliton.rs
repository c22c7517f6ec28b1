//! Soliton under space-time noise: charge and energy of the conformal
//! scheme next to Crank–Nicolson, both driven by the same increments.

use rayon::prelude::*;

use super::{check_failures, ensemble_mean, sech_profile, ExperimentConfig, FailureRecord};
use crate::diagnostics::{
    charge_residual, discrete_charge, energy_recursion_check, energy_recursion_terms, energy_terms,
    DiagnosticsSeries, EnergyPoint,
};
use crate::error::Result;
use crate::integrators::{cms_step_nls, cn_step, ComplexGridState};
use crate::noise::sample_path;

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonReport {
    /// Ensemble means for the conformal scheme; residuals come from the
    /// mean charges.
    pub cms: DiagnosticsSeries,
    pub cn: DiagnosticsSeries,
    /// `e^{−2αt}Q⁰`.
    pub q_exact: Vec<f64>,
    /// Largest `|Qⁿ⁺¹/Qⁿ − e^{−2αΔt}|/e^{−2αΔt}` over all CMS steps and
    /// trajectories.
    pub max_ratio_error_cms: f64,
    /// Largest per-trajectory, per-step `|rⁿ|`.
    pub max_path_residual_cms: f64,
    pub max_path_residual_cn: f64,
    /// Largest `|LHS − RHS|` of the energy recursion per step.
    pub max_energy_defect_cms: f64,
    pub max_energy_defect_cn: f64,
    pub trajectories_used: usize,
    pub failures: Vec<FailureRecord>,
}

struct Track {
    q_cms: Vec<f64>,
    q_cn: Vec<f64>,
    e_grad: Vec<f64>,
    e_quartic: Vec<f64>,
    e_noise: Vec<f64>,
    cn_grad: Vec<f64>,
    cn_quartic: Vec<f64>,
    ratio_error: f64,
    residual_cms: f64,
    residual_cn: f64,
    energy_cms: f64,
    energy_cn: f64,
}

fn run_one(cfg: &ExperimentConfig, index: u64) -> std::result::Result<Track, FailureRecord> {
    let fail = |step: usize, e: &crate::Error| FailureRecord::from_error(cfg.seed, index, step, e);
    let grid = cfg.grid().map_err(|e| fail(0, &e))?;
    let params = cfg.params().map_err(|e| fail(0, &e))?;
    let n_steps = cfg.n_steps().map_err(|e| fail(0, &e))?;
    let step_cfg = cfg.step_config();
    let path = sample_path(&cfg.noise_model(index, cfg.truncation_m), &grid, n_steps).map_err(|e| fail(0, &e))?;
    let decay = (-2.0 * params.alpha * grid.dt).exp();

    let mut u = sech_profile(&grid);
    let mut v: ComplexGridState = u.clone();
    let e0 = energy_terms(&u, &grid).map_err(|e| fail(0, &e))?;
    let q0 = discrete_charge(&u, &grid).map_err(|e| fail(0, &e))?;
    let mut t = Track {
        q_cms: vec![q0],
        q_cn: vec![q0],
        e_grad: vec![e0.grad],
        e_quartic: vec![e0.quartic],
        e_noise: vec![0.0],
        cn_grad: vec![e0.grad],
        cn_quartic: vec![e0.quartic],
        ratio_error: 0.0,
        residual_cms: 0.0,
        residual_cn: 0.0,
        energy_cms: 0.0,
        energy_cn: 0.0,
    };
    let mut noise_cum = 0.0;
    for n in 0..n_steps {
        let dw = path.slice(n);
        let next_u = cms_step_nls(&u, &params, dw, &grid, &step_cfg).map_err(|e| fail(n, &e))?;
        let next_v = cn_step(&v, &params, dw, &grid, &step_cfg).map_err(|e| fail(n, &e))?;

        let qu = discrete_charge(&next_u, &grid).map_err(|e| fail(n, &e))?;
        let qv = discrete_charge(&next_v, &grid).map_err(|e| fail(n, &e))?;
        let (qu0, qv0) = (t.q_cms[n], t.q_cn[n]);
        t.ratio_error = t.ratio_error.max(((qu / qu0 - decay) / decay).abs());
        let ru = charge_residual(qu0, qu, params.alpha, grid.dt).map_err(|e| fail(n, &e))?;
        let rv = charge_residual(qv0, qv, params.alpha, grid.dt).map_err(|e| fail(n, &e))?;
        t.residual_cms = t.residual_cms.max(ru.abs());
        t.residual_cn = t.residual_cn.max(rv.abs());

        let (lhs, cubic, noise) =
            energy_recursion_terms(&u, &next_u, &params, dw, &grid).map_err(|e| fail(n, &e))?;
        t.energy_cms = t.energy_cms.max((lhs - cubic - noise).abs());
        noise_cum += noise;
        let dv = energy_recursion_check(&v, &next_v, &params, dw, &grid).map_err(|e| fail(n, &e))?;
        t.energy_cn = t.energy_cn.max(dv);

        let eu = energy_terms(&next_u, &grid).map_err(|e| fail(n, &e))?;
        let ev = energy_terms(&next_v, &grid).map_err(|e| fail(n, &e))?;
        t.q_cms.push(qu);
        t.q_cn.push(qv);
        t.e_grad.push(eu.grad);
        t.e_quartic.push(eu.quartic);
        t.e_noise.push(noise_cum);
        t.cn_grad.push(ev.grad);
        t.cn_quartic.push(ev.quartic);
        u = next_u;
        v = next_v;
    }
    Ok(t)
}

pub fn run_soliton(cfg: &ExperimentConfig) -> Result<SolitonReport> {
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
    let maximum = |f: fn(&Track) -> f64| tracks.iter().map(f).fold(0.0, f64::max);
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * grid.dt).collect();
    let residuals = |q: &[f64]| -> Result<Vec<f64>> {
        q.windows(2).map(|w| charge_residual(w[0], w[1], params.alpha, grid.dt)).collect()
    };
    let energy = |grad: Vec<f64>, quartic: Vec<f64>, noise: Vec<f64>| -> Vec<EnergyPoint> {
        grad.into_iter()
            .zip(quartic)
            .zip(noise)
            .map(|((g, q), n)| EnergyPoint { grad: g, quartic: q, noise_cum: n })
            .collect()
    };

    let q_cms = mean(|t| &t.q_cms);
    let q_cn = mean(|t| &t.q_cn);
    let q_exact = times.iter().map(|&t| (-2.0 * params.alpha * t).exp() * q_cms[0]).collect();
    let cms = DiagnosticsSeries {
        times: times.clone(),
        charge_residual: residuals(&q_cms)?,
        charge: q_cms,
        energy: energy(mean(|t| &t.e_grad), mean(|t| &t.e_quartic), mean(|t| &t.e_noise)),
        two_form: None,
        amplitude: Vec::new(),
        phase: Vec::new(),
    };
    let cn = DiagnosticsSeries {
        times,
        charge_residual: residuals(&q_cn)?,
        charge: q_cn,
        energy: energy(mean(|t| &t.cn_grad), mean(|t| &t.cn_quartic), vec![0.0; n_steps + 1]),
        two_form: None,
        amplitude: Vec::new(),
        phase: Vec::new(),
    };
    Ok(SolitonReport {
        cms,
        cn,
        q_exact,
        max_ratio_error_cms: maximum(|t| t.ratio_error),
        max_path_residual_cms: maximum(|t| t.residual_cms),
        max_path_residual_cn: maximum(|t| t.residual_cn),
        max_energy_defect_cms: maximum(|t| t.energy_cms),
        max_energy_defect_cn: maximum(|t| t.energy_cn),
        trajectories_used: tracks.len(),
        failures,
    })
}
