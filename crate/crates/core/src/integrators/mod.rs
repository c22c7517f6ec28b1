//! Time steppers.
//!
//! * [`cms_step_nls`]: conformal multi-symplectic box scheme for the damped
//!   stochastic NLS equation in complex form.
//! * [`ms_step_transformed`]: multi-symplectic box scheme for `ϖ = e^{αt}u`
//!   with the quartic term evaluated at `t_n + θΔt`.
//! * [`cn_step`]: Crank–Nicolson comparator (not conformal).
//! * [`cms_step_generic`] and [`tangent_step`]: the same conformal scheme for
//!   any four-component damped Hamiltonian structure, with its variational
//!   equation.

mod box_scheme;
mod crank_nicolson;
mod generic;

use num_complex::Complex64;

use crate::grid::GridSpec;
use crate::hamiltonian::State;

pub use box_scheme::{cms_step_nls, cms_step_nls_with_info, ms_step_transformed, ms_step_transformed_with_info};
pub use crank_nicolson::{cn_step, cn_step_with_info};
pub use generic::{
    cms_step_generic, cms_step_generic_with_info, generic_defect, tangent_step, two_form_defects, BoundaryPins,
    TangentPair,
};

/// Spatial closure for the complex steppers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// `u_0 = u_J = 0`.
    #[default]
    Dirichlet,
    /// Node `J` is identified with node 0.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    /// Max-norm tolerance on successive iterates, relative to `max(1, ‖u‖∞)`.
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
    /// Evaluation time `t_n + θΔt` for the transformed scheme.
    pub theta: f64,
    pub closure: Closure,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { fixed_point_tol: 1e-13, max_iterations: 200, theta: 1.0, closure: Closure::Dirichlet }
    }
}

/// Convergence record of one implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveInfo {
    pub iterations: usize,
    /// Max-norm of the last correction.
    pub residual: f64,
}

/// One time level of the complex field on the nodes `0..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridState {
    pub u: Vec<Complex64>,
    pub time: f64,
}

impl ComplexGridState {
    pub fn new(u: Vec<Complex64>, time: f64) -> Self {
        Self { u, time }
    }

    /// Sample `f` on the grid; with Dirichlet closure the end values are
    /// forced to zero, with periodic closure node `J` copies node 0.
    pub fn from_fn(grid: &GridSpec, closure: Closure, f: impl Fn(f64) -> Complex64) -> Self {
        let mut u: Vec<Complex64> = grid.xs().into_iter().map(f).collect();
        let last = u.len() - 1;
        match closure {
            Closure::Dirichlet => {
                u[0] = Complex64::new(0.0, 0.0);
                u[last] = Complex64::new(0.0, 0.0);
            }
            Closure::Periodic => u[last] = u[0],
        }
        Self { u, time: 0.0 }
    }

    pub fn max_norm(&self) -> f64 {
        self.u.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// One time level of `z_j = (p, q, v, ω)` (or any four-component state).
#[derive(Debug, Clone, PartialEq)]
pub struct RealGridState4 {
    pub z: Vec<State>,
    pub time: f64,
}

impl RealGridState4 {
    pub fn new(z: Vec<State>, time: f64) -> Self {
        Self { z, time }
    }

    /// Real form of a complex NLS field: `p = Re u`, `q = Im u`, and the
    /// auxiliary `v`, `ω` from forward differences (zero in the last node).
    pub fn from_complex(u: &ComplexGridState, dx: f64) -> Self {
        let n = u.u.len();
        let z = (0..n)
            .map(|j| {
                let (v, w) = if j + 1 < n {
                    let d = (u.u[j + 1] - u.u[j]) / dx;
                    (d.re, d.im)
                } else {
                    (0.0, 0.0)
                };
                State::new(u.u[j].re, u.u[j].im, v, w)
            })
            .collect();
        Self { z, time: u.time }
    }

    pub fn to_complex(&self) -> ComplexGridState {
        ComplexGridState { u: self.z.iter().map(|s| Complex64::new(s[0], s[1])).collect(), time: self.time }
    }
}

pub(crate) fn max_norm_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn max_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
