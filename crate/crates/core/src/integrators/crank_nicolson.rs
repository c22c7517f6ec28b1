//! Crank–Nicolson midpoint scheme for the damped stochastic NLS equation,
//!
//! ```text
//! i (u^{n+1} − u^n)/Δt + i α h + Δ_h h + (|u^{n+1}|² + |u^n|²)/2 · h + ε χ h = 0,
//! h = (u^{n+1} + u^n)/2,
//! ```
//!
//! with the standard three-point Laplacian on the nodes. Charge decays as
//! `Σ|u^{n+1}|² = Σ|u^n|² − 2αΔt Σ|h|²`, which is not the exact factor
//! `e^{−2αΔt}`.

use num_complex::Complex64;

use super::{max_norm, max_norm_diff, Closure, ComplexGridState, SolveInfo, StepConfig};
use crate::banded::Tridiagonal;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::NlsParameters;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn cn_step(
    u: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<ComplexGridState> {
    cn_step_with_info(u, params, dw, grid, cfg).map(|(s, _)| s)
}

pub fn cn_step_with_info(
    u: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<(ComplexGridState, SolveInfo)> {
    let nodes = grid.nodes();
    let cells = grid.cells();
    if u.u.len() != nodes {
        return Err(Error::LengthMismatch { expected: nodes, actual: u.u.len() });
    }
    if dw.len() != nodes {
        return Err(Error::LengthMismatch { expected: nodes, actual: dw.len() });
    }
    if cells < 3 {
        return Err(Error::TooFewNodes { min: 4, actual: nodes });
    }
    let periodic = cfg.closure == Closure::Periodic;
    let dt = grid.dt;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let alpha = params.alpha;
    let u0 = &u.u;

    let n_unknowns = if periodic { cells } else { cells - 1 };
    let offset = if periodic { 0 } else { 1 };
    let neighbours = |c: usize| -> (usize, usize) {
        if periodic {
            ((c + cells - 1) % cells, (c + 1) % cells)
        } else {
            (c - 1, c + 1)
        }
    };

    let mut x = u0.clone();
    if !periodic {
        x[0] = Complex64::new(0.0, 0.0);
        x[cells] = Complex64::new(0.0, 0.0);
    }
    let mut last = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        let mut tri = Tridiagonal::new(n_unknowns, periodic);
        let mut rhs = vec![Complex64::new(0.0, 0.0); n_unknowns];
        let off = -I * (0.5 * inv_dx2);
        for e in 0..n_unknowns {
            let c = e + offset;
            let (l, r) = neighbours(c);
            let rate = 0.5 * (x[c].norm_sqr() + u0[c].norm_sqr()) + params.epsilon * dw[c] / dt;
            tri.lower[e] = off;
            tri.upper[e] = off;
            tri.diag[e] = Complex64::new(1.0 / dt + 0.5 * alpha, inv_dx2 - 0.5 * rate);
            rhs[e] = u0[c] * (1.0 / dt - 0.5 * alpha)
                + I * (0.5 * inv_dx2) * (u0[r] - u0[c] * 2.0 + u0[l])
                + I * (0.5 * rate) * u0[c];
        }
        if !periodic {
            tri.lower[0] = Complex64::new(0.0, 0.0);
            tri.upper[n_unknowns - 1] = Complex64::new(0.0, 0.0);
        }

        let sol = tri.solve(&rhs)?;
        let mut next = vec![Complex64::new(0.0, 0.0); nodes];
        for (k, v) in sol.into_iter().enumerate() {
            next[k + offset] = v;
        }
        if periodic {
            next[cells] = next[0];
        }
        last = max_norm_diff(&next, &x);
        let scale = max_norm(&next).max(1.0);
        x = next;
        if !last.is_finite() {
            break;
        }
        if last <= cfg.fixed_point_tol * scale {
            return Ok((ComplexGridState { u: x, time: u.time + dt }, SolveInfo { iterations: iteration, residual: last }));
        }
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, residual: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_charge_law_holds() {
        let g = GridSpec::new(-4.0, 4.0, 0.25, 0.02).unwrap();
        let u = ComplexGridState::from_fn(&g, Closure::Dirichlet, |x| {
            Complex64::new(1.0 / x.cosh(), 0.3 * (-x * x).exp())
        });
        let p = NlsParameters::new(0.4, 0.5).unwrap();
        let dw: Vec<f64> = (0..g.nodes()).map(|j| 0.01 * ((j as f64) * 0.7).sin()).collect();
        let next = cn_step(&u, &p, &dw, &g, &StepConfig::default()).unwrap();
        let q0: f64 = u.u.iter().map(|v| v.norm_sqr()).sum();
        let q1: f64 = next.u.iter().map(|v| v.norm_sqr()).sum();
        let h2: f64 = u.u.iter().zip(&next.u).map(|(a, b)| ((a + b) * 0.5).norm_sqr()).sum();
        assert!((q1 - (q0 - 2.0 * p.alpha * g.dt * h2)).abs() < 1e-12 * q0);
    }
}
