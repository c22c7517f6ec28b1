//! Damped stochastic Hamiltonian PDE structures
//! `M z_t + K z_x = ∇S₁(z) + ∇S₂(z) ∘ χ̇ + D z` with `D = −(a/2)M − (b/2)K`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

pub type State = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

/// Closed-form potentials and their first and second derivatives.
///
/// `S₁` may depend on time; autonomous systems ignore the argument.
pub trait Potentials: Debug + Send + Sync {
    fn s1(&self, z: &State, t: f64) -> f64;
    fn grad_s1(&self, z: &State, t: f64) -> State;
    fn hess_s1(&self, z: &State, t: f64) -> Mat4;
    fn s2(&self, z: &State) -> f64;
    fn grad_s2(&self, z: &State) -> State;
    fn hess_s2(&self, z: &State) -> Mat4;
}

/// Absorption and noise size of the damped stochastic NLS equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsParameters {
    pub alpha: f64,
    pub epsilon: f64,
}

impl NlsParameters {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(Self { alpha, epsilon })
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    m: Mat4,
    k: Mat4,
    a: f64,
    b: f64,
    potentials: Arc<dyn Potentials>,
}

impl HamiltonianSystem {
    /// Fails unless `M` and `K` are exactly skew-symmetric.
    pub fn new(m: Mat4, k: Mat4, a: f64, b: f64, potentials: Arc<dyn Potentials>) -> Result<Self> {
        if m != -m.transpose() {
            return Err(Error::InvalidParameter("M is not skew-symmetric".into()));
        }
        if k != -k.transpose() {
            return Err(Error::InvalidParameter("K is not skew-symmetric".into()));
        }
        Ok(Self { m, k, a, b, potentials })
    }

    pub fn dim(&self) -> usize {
        4
    }

    pub fn m(&self) -> &Mat4 {
        &self.m
    }

    pub fn k(&self) -> &Mat4 {
        &self.k
    }

    /// Temporal conformal exponent.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Spatial conformal exponent.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// The damping matrix, always derived from `a`, `b`, `M` and `K`.
    pub fn d(&self) -> Mat4 {
        self.m * (-0.5 * self.a) + self.k * (-0.5 * self.b)
    }

    pub fn potentials(&self) -> &dyn Potentials {
        self.potentials.as_ref()
    }

    pub fn s1(&self, z: &State, t: f64) -> f64 {
        self.potentials.s1(z, t)
    }
    pub fn grad_s1(&self, z: &State, t: f64) -> State {
        self.potentials.grad_s1(z, t)
    }
    pub fn hess_s1(&self, z: &State, t: f64) -> Mat4 {
        self.potentials.hess_s1(z, t)
    }
    pub fn s2(&self, z: &State) -> f64 {
        self.potentials.s2(z)
    }
    pub fn grad_s2(&self, z: &State) -> State {
        self.potentials.grad_s2(z)
    }
    pub fn hess_s2(&self, z: &State) -> Mat4 {
        self.potentials.hess_s2(z)
    }
}

/// `S₁ = −½(v²+ω²) − ¼(p²+q²)²`, `S₂ = −(ε/2)(p²+q²)` on `z = (p, q, v, ω)`.
#[derive(Debug, Clone, Copy)]
pub struct NlsPotentials {
    pub epsilon: f64,
}

impl Potentials for NlsPotentials {
    fn s1(&self, z: &State, _t: f64) -> f64 {
        let r2 = z[0] * z[0] + z[1] * z[1];
        -0.5 * (z[2] * z[2] + z[3] * z[3]) - 0.25 * r2 * r2
    }
    fn grad_s1(&self, z: &State, _t: f64) -> State {
        let r2 = z[0] * z[0] + z[1] * z[1];
        State::new(-z[0] * r2, -z[1] * r2, -z[2], -z[3])
    }
    fn hess_s1(&self, z: &State, _t: f64) -> Mat4 {
        let (p, q) = (z[0], z[1]);
        let mut h = Mat4::zeros();
        h[(0, 0)] = -(3.0 * p * p + q * q);
        h[(0, 1)] = -2.0 * p * q;
        h[(1, 0)] = -2.0 * p * q;
        h[(1, 1)] = -(p * p + 3.0 * q * q);
        h[(2, 2)] = -1.0;
        h[(3, 3)] = -1.0;
        h
    }
    fn s2(&self, z: &State) -> f64 {
        -0.5 * self.epsilon * (z[0] * z[0] + z[1] * z[1])
    }
    fn grad_s2(&self, z: &State) -> State {
        State::new(-self.epsilon * z[0], -self.epsilon * z[1], 0.0, 0.0)
    }
    fn hess_s2(&self, _z: &State) -> Mat4 {
        Mat4::from_diagonal(&State::new(-self.epsilon, -self.epsilon, 0.0, 0.0))
    }
}

/// Potentials of the damped KdV equation on `z = (φ, u, v, ω)`:
/// `S₁ = u³ − uω + ½v²`, `S₂ = γφ`.
#[derive(Debug, Clone, Copy)]
pub struct KdvPotentials {
    pub gamma: f64,
}

impl Potentials for KdvPotentials {
    fn s1(&self, z: &State, _t: f64) -> f64 {
        let u = z[1];
        u * u * u - u * z[3] + 0.5 * z[2] * z[2]
    }
    fn grad_s1(&self, z: &State, _t: f64) -> State {
        let u = z[1];
        State::new(0.0, 3.0 * u * u - z[3], z[2], -u)
    }
    fn hess_s1(&self, z: &State, _t: f64) -> Mat4 {
        let mut h = Mat4::zeros();
        h[(1, 1)] = 6.0 * z[1];
        h[(1, 3)] = -1.0;
        h[(3, 1)] = -1.0;
        h[(2, 2)] = 1.0;
        h
    }
    fn s2(&self, z: &State) -> f64 {
        self.gamma * z[0]
    }
    fn grad_s2(&self, _z: &State) -> State {
        State::new(self.gamma, 0.0, 0.0, 0.0)
    }
    fn hess_s2(&self, _z: &State) -> Mat4 {
        Mat4::zeros()
    }
}

/// Potentials of the NLS equation for `ϖ = e^{αt}u` on `U = (r, s, ξ, η)`:
/// `S₁(t, U) = ½(ξ²+η²) + ¼e^{−2αt}(r²+s²)²`, `S₂ = (ε/2)(r²+s²)`.
#[derive(Debug, Clone, Copy)]
pub struct TransformedNlsPotentials {
    pub alpha: f64,
    pub epsilon: f64,
}

impl Potentials for TransformedNlsPotentials {
    fn s1(&self, z: &State, t: f64) -> f64 {
        let r2 = z[0] * z[0] + z[1] * z[1];
        0.5 * (z[2] * z[2] + z[3] * z[3]) + 0.25 * (-2.0 * self.alpha * t).exp() * r2 * r2
    }
    fn grad_s1(&self, z: &State, t: f64) -> State {
        let g = (-2.0 * self.alpha * t).exp();
        let r2 = z[0] * z[0] + z[1] * z[1];
        State::new(g * z[0] * r2, g * z[1] * r2, z[2], z[3])
    }
    fn hess_s1(&self, z: &State, t: f64) -> Mat4 {
        let g = (-2.0 * self.alpha * t).exp();
        let (r, s) = (z[0], z[1]);
        let mut h = Mat4::zeros();
        h[(0, 0)] = g * (3.0 * r * r + s * s);
        h[(0, 1)] = g * 2.0 * r * s;
        h[(1, 0)] = g * 2.0 * r * s;
        h[(1, 1)] = g * (r * r + 3.0 * s * s);
        h[(2, 2)] = 1.0;
        h[(3, 3)] = 1.0;
        h
    }
    fn s2(&self, z: &State) -> f64 {
        0.5 * self.epsilon * (z[0] * z[0] + z[1] * z[1])
    }
    fn grad_s2(&self, z: &State) -> State {
        State::new(self.epsilon * z[0], self.epsilon * z[1], 0.0, 0.0)
    }
    fn hess_s2(&self, _z: &State) -> Mat4 {
        Mat4::from_diagonal(&State::new(self.epsilon, self.epsilon, 0.0, 0.0))
    }
}

fn nls_m() -> Mat4 {
    Mat4::new(
        0.0, -1.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 0.0,
    )
}

fn nls_k() -> Mat4 {
    Mat4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// Damped stochastic NLS in real form, `z = (p, q, v, ω)`, `a = 2α`, `b = 0`.
pub fn nls_system(params: NlsParameters) -> HamiltonianSystem {
    HamiltonianSystem::new(
        nls_m(),
        nls_k(),
        2.0 * params.alpha,
        0.0,
        Arc::new(NlsPotentials { epsilon: params.epsilon }),
    )
    .expect("NLS structure matrices are skew")
}

/// Undamped NLS for `ϖ = e^{αt}u`, with the damping moved into the
/// time-dependent quartic potential.
pub fn transformed_nls_system(params: NlsParameters) -> HamiltonianSystem {
    HamiltonianSystem::new(
        -nls_m(),
        -nls_k(),
        0.0,
        0.0,
        Arc::new(TransformedNlsPotentials { alpha: params.alpha, epsilon: params.epsilon }),
    )
    .expect("transformed structure matrices are skew")
}

/// Damped stochastic KdV with additive noise, `z = (φ, u, v, ω)`.
///
/// The temporal exponent is `a = −2α`, which makes `D = −(a/2)M` equal to
/// the damping term `(α/2)u` in the first-order system.
pub fn kdv_system(alpha: f64, gamma: f64) -> Result<HamiltonianSystem> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    let m = Mat4::new(
        0.0, 0.5, 0.0, 0.0, //
        -0.5, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 0.0,
    );
    let k = Mat4::new(
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    );
    HamiltonianSystem::new(m, k, -2.0 * alpha, 0.0, Arc::new(KdvPotentials { gamma }))
}
