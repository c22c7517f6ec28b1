//! Reduced box scheme in complex form.
//!
//! Eliminating the auxiliary variables from the real four-component box
//! scheme leaves, for every pair of adjacent cells `j, j+1`, one equation in
//! the three nodes `j, j+1, j+2`:
//!
//! ```text
//! i (δ_t A_x u)_j + i (δ_t A_x u)_{j+1} + 2 (δ_x δ_x A_t u)_{j+1}
//!     + s_j Ā_j + s_{j+1} Ā_{j+1} = 0
//! ```
//!
//! with `Ā = A_t A_x u` and `s = g|Ā|² + εχ`. The conformal scheme uses the
//! weight `e = e^{−αΔt}` between levels; the transformed scheme uses `e = 1`
//! and a time-dependent `g`. The cubic term is solved by iterating on `|Ā|²`
//! only, so each iterate is a linear tridiagonal solve.

use num_complex::Complex64;

use super::{max_norm, max_norm_diff, Closure, ComplexGridState, SolveInfo, StepConfig};
use crate::banded::Tridiagonal;
use crate::error::{Error, Result};
use crate::grid::{Conformal, GridSpec};
use crate::hamiltonian::NlsParameters;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy)]
struct Coefficients {
    /// Level weight on `u^n`.
    decay: f64,
    /// Factor on `|Ā|²`.
    cubic: f64,
    epsilon: f64,
    /// First iterate is `predictor·u^n`.
    predictor: f64,
}

/// One step of the conformal multi-symplectic scheme.
pub fn cms_step_nls(
    u: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<ComplexGridState> {
    cms_step_nls_with_info(u, params, dw, grid, cfg).map(|(s, _)| s)
}

pub fn cms_step_nls_with_info(
    u: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<(ComplexGridState, SolveInfo)> {
    let decay = Conformal::new(params.alpha, grid.dt).decay();
    let half = Conformal::new(params.alpha, 0.5 * grid.dt).decay();
    let coef = Coefficients { decay, cubic: 1.0, epsilon: params.epsilon, predictor: half };
    let (next, info) = box_step(&u.u, coef, dw, grid, cfg)?;
    Ok((ComplexGridState { u: next, time: u.time + grid.dt }, info))
}

/// One step of the multi-symplectic scheme for the transformed variable
/// `ϖ = e^{αt}u`. The input and output hold `ϖ`, not `u`.
pub fn ms_step_transformed(
    w: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<ComplexGridState> {
    ms_step_transformed_with_info(w, params, dw, grid, cfg).map(|(s, _)| s)
}

pub fn ms_step_transformed_with_info(
    w: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<(ComplexGridState, SolveInfo)> {
    let t_star = w.time + cfg.theta * grid.dt;
    let cubic = if params.alpha == 0.0 { 1.0 } else { (-2.0 * params.alpha * t_star).exp() };
    let coef = Coefficients { decay: 1.0, cubic, epsilon: params.epsilon, predictor: 1.0 };
    let (next, info) = box_step(&w.u, coef, dw, grid, cfg)?;
    Ok((ComplexGridState { u: next, time: w.time + grid.dt }, info))
}

fn box_step(
    u0: &[Complex64],
    coef: Coefficients,
    dw: &[f64],
    grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<(Vec<Complex64>, SolveInfo)> {
    let nodes = grid.nodes();
    let cells = grid.cells();
    if u0.len() != nodes {
        return Err(Error::LengthMismatch { expected: nodes, actual: u0.len() });
    }
    if dw.len() != nodes {
        return Err(Error::LengthMismatch { expected: nodes, actual: dw.len() });
    }
    let periodic = cfg.closure == Closure::Periodic;
    if cells < 3 {
        return Err(Error::TooFewNodes { min: 4, actual: nodes });
    }

    let dt = grid.dt;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let w0: Vec<Complex64> = u0.iter().map(|v| v * coef.decay).collect();
    let chi: Vec<f64> = dw.iter().map(|v| v / dt).collect();

    // Unknowns: interior nodes 1..J−1 (Dirichlet) or nodes 0..J−1 (periodic).
    let n_unknowns = if periodic { cells } else { cells - 1 };
    let offset = if periodic { 0 } else { 1 };
    // Each equation is stored in the row of its centre node, so that the
    // matrix is (cyclic) tridiagonal.
    let n_eqs = n_unknowns;

    let mut x: Vec<Complex64> = u0.iter().map(|v| v * coef.predictor).collect();
    if !periodic {
        x[0] = Complex64::new(0.0, 0.0);
        x[cells] = Complex64::new(0.0, 0.0);
    }
    let mut s = vec![0.0; cells];
    let mut last = f64::INFINITY;

    for iteration in 1..=cfg.max_iterations {
        for c in 0..cells {
            let a = (x[c] + x[c + 1] + w0[c] + w0[c + 1]) * 0.25;
            s[c] = coef.cubic * a.norm_sqr() + coef.epsilon * chi[c];
        }

        let mut tri = Tridiagonal::new(n_unknowns, periodic);
        let mut rhs = vec![Complex64::new(0.0, 0.0); n_unknowns];
        for e in 0..n_eqs {
            // Centre node of equation e, and its row.
            let centre = e + offset;
            let (j0, j1, j2) = if periodic {
                ((centre + cells - 1) % cells, centre, (centre + 1) % cells)
            } else {
                (centre - 1, centre, centre + 1)
            };
            // Cells to the left and right of the centre node.
            let (sa, sb) = (s[j0], s[centre]);
            let side = 0.5 / dt - I * inv_dx2;
            tri.lower[e] = side - I * (0.25 * sa);
            tri.diag[e] = Complex64::new(1.0 / dt, 2.0 * inv_dx2) - I * (0.25 * (sa + sb));
            tri.upper[e] = side - I * (0.25 * sb);
            rhs[e] = (w0[j0] + w0[j1] * 2.0 + w0[j2]) * (0.5 / dt)
                + I * inv_dx2 * (w0[j2] - w0[j1] * 2.0 + w0[j0])
                + I * (0.25 * sa) * (w0[j0] + w0[j1])
                + I * (0.25 * sb) * (w0[j1] + w0[j2]);
        }
        if !periodic {
            tri.lower[0] = Complex64::new(0.0, 0.0);
            tri.upper[n_eqs - 1] = Complex64::new(0.0, 0.0);
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
            return Ok((x, SolveInfo { iterations: iteration, residual: last }));
        }
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, residual: last })
}
