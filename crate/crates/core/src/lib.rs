//! Structure-preserving time integration for damped stochastic Hamiltonian PDEs.
//!
//! The centre of the crate is the stochastic conformal multi-symplectic box
//! scheme applied to the damped stochastic nonlinear Schrödinger equation
//!
//! ```text
//! du + (αu − i u_xx − i|u|²u) dt = iε u ∘ dW
//! ```
//!
//! together with a generic stepper for any system of the form
//! `M z_t + K z_x = ∇S₁(z) + ∇S₂(z) ∘ χ̇ + D z`, its tangent (variational)
//! propagation, a Crank–Nicolson comparator, diagnostics for the discrete
//! charge and energy laws, and Monte Carlo experiment drivers.

pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod hamiltonian;
pub mod integrators;
pub mod noise;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use hamiltonian::{HamiltonianSystem, NlsParameters};
pub use integrators::{ComplexGridState, RealGridState4, StepConfig};
pub use noise::{NoiseKind, NoiseModel, NoisePath};
