//! Discrete conformal 2-form audit along random tangent pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_failures, sech_profile, AuditSystem, ExperimentConfig, FailureRecord};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::hamiltonian::{kdv_system, nls_system, HamiltonianSystem, State};
use crate::integrators::{cms_step_generic, tangent_step, two_form_defects, BoundaryPins, RealGridState4, TangentPair};
use crate::noise::sample_path;

/// Stream id for tangent draws, disjoint from the noise mode streams.
const TANGENT_STREAM: u64 = 0xFFFF;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub max_defect: f64,
    /// Largest `|defect|` over trajectories for every step `n` and cell `j`,
    /// stored as `[n][j]`.
    pub defects: Vec<Vec<f64>>,
    pub trajectories_used: usize,
    pub failures: Vec<FailureRecord>,
}

/// Smooth KdV-type initial state `(φ, u, v, ω)` with `u = ½sech²x`,
/// `φ' = u` and `v = u_x`.
pub fn kdv_initial_state(grid: &GridSpec) -> RealGridState4 {
    let z = grid
        .xs()
        .into_iter()
        .map(|x| {
            let u = 0.5 / x.cosh().powi(2);
            State::new(0.5 * (x.tanh() + 1.0), u, -2.0 * u * x.tanh(), 0.0)
        })
        .collect();
    RealGridState4::new(z, 0.0)
}

fn setup(cfg: &ExperimentConfig, grid: &GridSpec) -> Result<(HamiltonianSystem, BoundaryPins, RealGridState4)> {
    Ok(match cfg.system {
        AuditSystem::Nls => (
            nls_system(cfg.params()?),
            BoundaryPins::nls(),
            RealGridState4::from_complex(&sech_profile(grid), grid.dx),
        ),
        AuditSystem::Kdv => (kdv_system(cfg.alpha, cfg.gamma)?, BoundaryPins::kdv(), kdv_initial_state(grid)),
    })
}

fn unit_tangent(rng: &mut ChaCha8Rng, nodes: usize, pins: &BoundaryPins) -> Vec<State> {
    let mut t: Vec<State> = (0..nodes)
        .map(|_| State::from_fn(|_, _| rng.random_range(-1.0..1.0)))
        .collect();
    for &c in &pins.left {
        t[0][c] = 0.0;
    }
    for &c in &pins.right {
        t[nodes - 1][c] = 0.0;
    }
    let scale = t.iter().map(|s| s.amax()).fold(0.0, f64::max);
    if scale > 0.0 {
        for s in &mut t {
            *s /= scale;
        }
    }
    t
}

fn run_one(cfg: &ExperimentConfig, index: u64) -> std::result::Result<Vec<Vec<f64>>, FailureRecord> {
    let fail = |step: usize, e: &crate::Error| FailureRecord::from_error(cfg.seed, index, step, e);
    let grid = cfg.grid().map_err(|e| fail(0, &e))?;
    let n_steps = cfg.n_steps().map_err(|e| fail(0, &e))?;
    let step_cfg = cfg.step_config();
    let (sys, pins, mut z) = setup(cfg, &grid).map_err(|e| fail(0, &e))?;
    let path = sample_path(&cfg.noise_model(index, cfg.truncation_m), &grid, n_steps).map_err(|e| fail(0, &e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream((index << 16) | TANGENT_STREAM);
    let mut tangents = TangentPair {
        u: unit_tangent(&mut rng, grid.nodes(), &pins),
        v: unit_tangent(&mut rng, grid.nodes(), &pins),
    };
    let mut out = Vec::with_capacity(n_steps);
    for n in 0..n_steps {
        let dw = path.slice(n);
        let next = cms_step_generic(&sys, &z, dw, &grid, &pins, &step_cfg).map_err(|e| fail(n, &e))?;
        let advanced = tangent_step(&sys, &z, &next, &tangents, dw, &grid, &pins, &step_cfg).map_err(|e| fail(n, &e))?;
        let d = two_form_defects(&sys, &tangents, &advanced, &grid).map_err(|e| fail(n, &e))?;
        out.push(d.into_iter().map(f64::abs).collect());
        tangents = advanced;
        z = next;
    }
    Ok(out)
}

pub fn run_two_form_audit(cfg: &ExperimentConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let results: Vec<_> = (0..cfg.n_trajectories as u64).into_par_iter().map(|i| run_one(cfg, i)).collect();
    let mut defects: Vec<Vec<f64>> = Vec::new();
    let mut failures = Vec::new();
    let mut used = 0;
    for r in results {
        match r {
            Ok(d) => {
                used += 1;
                if defects.is_empty() {
                    defects = d;
                } else {
                    for (row, new) in defects.iter_mut().zip(d) {
                        for (a, b) in row.iter_mut().zip(new) {
                            *a = a.max(b);
                        }
                    }
                }
            }
            Err(f) => failures.push(f),
        }
    }
    check_failures(&failures, cfg.n_trajectories)?;
    let max_defect = defects.iter().flatten().fold(0.0, |m: f64, &d| m.max(d));
    Ok(AuditReport { max_defect, defects, trajectories_used: used, failures })
}
