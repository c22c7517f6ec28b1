//! Conformal box scheme for a general four-component structure,
//!
//! ```text
//! M δ_t^{a/2} A_x^{b/2} z + K δ_x^{b/2} A_t^{a/2} z = ∇S₁(Z̄, t*) + ∇S₂(Z̄) χ_j,
//! Z̄ = A_t^{a/2} A_x^{b/2} z,  t* = t_n + θΔt,
//! ```
//!
//! one vector equation per cell, closed by pinning components to zero at the
//! two ends. The nonlinear system is solved by Newton's method on the banded
//! Jacobian; the variational equation reuses that Jacobian.

use super::{RealGridState4, SolveInfo, StepConfig};
use crate::banded::{BandLu, BandMatrix};
use crate::error::{Error, Result};
use crate::grid::{Conformal, GridSpec};
use crate::hamiltonian::{HamiltonianSystem, Mat4, State};

/// State components held at zero in the first and last node. Together they
/// must close the system, i.e. `left.len() + right.len() == 4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPins {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl BoundaryPins {
    /// `p = q = 0` at both ends.
    pub fn nls() -> Self {
        Self { left: vec![0, 1], right: vec![0, 1] }
    }

    /// `φ = u = 0` on the left, `u = v = 0` on the right.
    pub fn kdv() -> Self {
        Self { left: vec![0, 1], right: vec![1, 2] }
    }

    fn validate(&self) -> Result<()> {
        if self.left.len() + self.right.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "boundary pins must fix 4 components, got {}",
                self.left.len() + self.right.len()
            )));
        }
        let ok = |v: &[usize]| {
            let mut s = v.to_vec();
            s.sort_unstable();
            s.dedup();
            s.len() == v.len() && v.iter().all(|&c| c < 4)
        };
        if !ok(&self.left) || !ok(&self.right) {
            return Err(Error::InvalidParameter("boundary pins must be distinct components 0..4".into()));
        }
        Ok(())
    }
}

/// Two solutions of the variational equation on the same base trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub u: Vec<State>,
    pub v: Vec<State>,
}

struct Scheme<'a> {
    sys: &'a HamiltonianSystem,
    pins: &'a BoundaryPins,
    cells: usize,
    dt: f64,
    dx: f64,
    /// `e^{−aΔt/2}` and `e^{−bΔx/2}`.
    et: f64,
    ex: f64,
    t_star: f64,
}

impl<'a> Scheme<'a> {
    fn new(
        sys: &'a HamiltonianSystem,
        pins: &'a BoundaryPins,
        grid: &GridSpec,
        time: f64,
        theta: f64,
        len: usize,
    ) -> Result<Self> {
        pins.validate()?;
        if len != grid.nodes() {
            return Err(Error::LengthMismatch { expected: grid.nodes(), actual: len });
        }
        if grid.cells() < 2 {
            return Err(Error::TooFewNodes { min: 3, actual: grid.nodes() });
        }
        Ok(Self {
            sys,
            pins,
            cells: grid.cells(),
            dt: grid.dt,
            dx: grid.dx,
            et: Conformal::new(0.5 * sys.a(), grid.dt).decay(),
            ex: Conformal::new(0.5 * sys.b(), grid.dx).decay(),
            t_star: time + theta * grid.dt,
        })
    }

    fn size(&self) -> usize {
        4 * (self.cells + 1)
    }

    fn ax(&self, z: &[State], j: usize) -> State {
        (z[j + 1] + z[j] * self.ex) * 0.5
    }

    fn zbar(&self, zn: &[State], x: &[State], j: usize) -> State {
        (self.ax(x, j) + self.ax(zn, j) * self.et) * 0.5
    }

    fn cell_residual(&self, zn: &[State], x: &[State], chi: f64, j: usize) -> State {
        let m = self.sys.m();
        let k = self.sys.k();
        let time = m * (self.ax(x, j) - self.ax(zn, j) * self.et) / self.dt;
        let at0 = (x[j] + zn[j] * self.et) * 0.5;
        let at1 = (x[j + 1] + zn[j + 1] * self.et) * 0.5;
        let space = k * (at1 - at0 * self.ex) / self.dx;
        let zb = self.zbar(zn, x, j);
        time + space - self.sys.grad_s1(&zb, self.t_star) - self.sys.grad_s2(&zb) * chi
    }

    fn hessian(&self, zb: &State, chi: f64) -> Mat4 {
        self.sys.hess_s1(zb, self.t_star) + self.sys.hess_s2(zb) * chi
    }

    fn residual(&self, zn: &[State], x: &[State], chi: &[f64]) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.size());
        for &c in &self.pins.left {
            f.push(x[0][c]);
        }
        for j in 0..self.cells {
            f.extend(self.cell_residual(zn, x, chi[j], j).iter());
        }
        for &c in &self.pins.right {
            f.push(x[self.cells][c]);
        }
        f
    }

    fn jacobian(&self, zn: &[State], x: &[State], chi: &[f64]) -> BandMatrix<f64> {
        let n = self.size();
        let mut t = Vec::with_capacity(32 * self.cells + 4);
        for (r, &c) in self.pins.left.iter().enumerate() {
            t.push((r, c, 1.0));
        }
        let base = self.pins.left.len();
        let m = self.sys.m();
        let k = self.sys.k();
        for j in 0..self.cells {
            let h = self.hessian(&self.zbar(zn, x, j), chi[j]);
            let left = m * (self.ex / (2.0 * self.dt)) - k * (self.ex / (2.0 * self.dx)) - h * (self.ex / 4.0);
            let right = m * (1.0 / (2.0 * self.dt)) + k * (1.0 / (2.0 * self.dx)) - h * 0.25;
            for r in 0..4 {
                for c in 0..4 {
                    t.push((base + 4 * j + r, 4 * j + c, left[(r, c)]));
                    t.push((base + 4 * j + r, 4 * (j + 1) + c, right[(r, c)]));
                }
            }
        }
        let base = base + 4 * self.cells;
        for (r, &c) in self.pins.right.iter().enumerate() {
            t.push((base + r, 4 * self.cells + c, 1.0));
        }
        BandMatrix::from_triplets(n, &t)
    }
}

fn chi_of(dw: &[f64], grid: &GridSpec) -> Result<Vec<f64>> {
    if dw.len() != grid.nodes() {
        return Err(Error::LengthMismatch { expected: grid.nodes(), actual: dw.len() });
    }
    Ok(dw.iter().map(|v| v / grid.dt).collect())
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// One step of the conformal box scheme for `system`.
pub fn cms_step_generic(
    system: &HamiltonianSystem,
    z: &RealGridState4,
    dw: &[f64],
    grid: &GridSpec,
    pins: &BoundaryPins,
    cfg: &StepConfig,
) -> Result<RealGridState4> {
    cms_step_generic_with_info(system, z, dw, grid, pins, cfg).map(|(s, _)| s)
}

pub fn cms_step_generic_with_info(
    system: &HamiltonianSystem,
    z: &RealGridState4,
    dw: &[f64],
    grid: &GridSpec,
    pins: &BoundaryPins,
    cfg: &StepConfig,
) -> Result<(RealGridState4, SolveInfo)> {
    let scheme = Scheme::new(system, pins, grid, z.time, cfg.theta, z.z.len())?;
    let chi = chi_of(dw, grid)?;
    let zn = &z.z;
    let mut x = zn.clone();
    for &c in &pins.left {
        x[0][c] = 0.0;
    }
    for &c in &pins.right {
        x[scheme.cells][c] = 0.0;
    }

    let mut previous = f64::INFINITY;
    let mut last = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        let mut f = scheme.residual(zn, &x, &chi);
        scheme.jacobian(zn, &x, &chi).factorize()?.solve_in_place(&mut f)?;
        for (j, s) in x.iter_mut().enumerate() {
            for c in 0..4 {
                s[c] -= f[4 * j + c];
            }
        }
        last = max_abs(f.iter().copied());
        if !last.is_finite() {
            break;
        }
        let scale = max_abs(x.iter().flat_map(|s| s.iter().copied())).max(1.0);
        // Newton corrections stop shrinking once they reach rounding level.
        let stalled = last >= previous && last <= 1e3 * cfg.fixed_point_tol * scale;
        if last <= cfg.fixed_point_tol * scale || stalled {
            return Ok((RealGridState4 { z: x, time: z.time + grid.dt }, SolveInfo { iterations: iteration, residual: last }));
        }
        previous = last;
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, residual: last })
}

/// Max-norm of the scheme residual in every cell for a given pair of levels.
pub fn generic_defect(
    system: &HamiltonianSystem,
    zn: &RealGridState4,
    zn1: &RealGridState4,
    dw: &[f64],
    grid: &GridSpec,
    theta: f64,
) -> Result<Vec<f64>> {
    let pins = BoundaryPins::nls();
    let scheme = Scheme::new(system, &pins, grid, zn.time, theta, zn.z.len())?;
    if zn1.z.len() != zn.z.len() {
        return Err(Error::LengthMismatch { expected: zn.z.len(), actual: zn1.z.len() });
    }
    let chi = chi_of(dw, grid)?;
    Ok((0..scheme.cells).map(|j| scheme.cell_residual(&zn.z, &zn1.z, chi[j], j).amax()).collect())
}

/// Advance two tangent vectors along the step `base_n → base_next`.
#[allow(clippy::too_many_arguments)]
pub fn tangent_step(
    system: &HamiltonianSystem,
    base_n: &RealGridState4,
    base_next: &RealGridState4,
    tangents: &TangentPair,
    dw: &[f64],
    grid: &GridSpec,
    pins: &BoundaryPins,
    cfg: &StepConfig,
) -> Result<TangentPair> {
    let scheme = Scheme::new(system, pins, grid, base_n.time, cfg.theta, base_n.z.len())?;
    for len in [base_next.z.len(), tangents.u.len(), tangents.v.len()] {
        if len != base_n.z.len() {
            return Err(Error::LengthMismatch { expected: base_n.z.len(), actual: len });
        }
    }
    let chi = chi_of(dw, grid)?;
    let lu = scheme.jacobian(&base_n.z, &base_next.z, &chi).factorize()?;
    let advance = |w: &[State]| -> Result<Vec<State>> { advance_tangent(&scheme, &lu, &base_n.z, &base_next.z, w, &chi) };
    Ok(TangentPair { u: advance(&tangents.u)?, v: advance(&tangents.v)? })
}

fn advance_tangent(
    scheme: &Scheme<'_>,
    lu: &BandLu<f64>,
    zn: &[State],
    zn1: &[State],
    w: &[State],
    chi: &[f64],
) -> Result<Vec<State>> {
    let m = scheme.sys.m();
    let k = scheme.sys.k();
    let et = scheme.et;
    let mut rhs = vec![0.0; scheme.size()];
    let base = scheme.pins.left.len();
    for j in 0..scheme.cells {
        let h = scheme.hessian(&scheme.zbar(zn, zn1, j), chi[j]);
        let aw = scheme.ax(w, j);
        let known = m * aw * (-et / scheme.dt) + k * (w[j + 1] - w[j] * scheme.ex) * (et / (2.0 * scheme.dx))
            - h * aw * (0.5 * et);
        for r in 0..4 {
            rhs[base + 4 * j + r] = -known[r];
        }
    }
    lu.solve_in_place(&mut rhs)?;
    Ok((0..=scheme.cells).map(|j| State::new(rhs[4 * j], rhs[4 * j + 1], rhs[4 * j + 2], rhs[4 * j + 3])).collect())
}

/// Per-cell defect of the discrete conformal symplecticity law
///
/// ```text
/// δ_t^{a} ⟨M A_x^{b/2} U, A_x^{b/2} V⟩ + δ_x^{b} ⟨K A_t^{a/2} U, A_t^{a/2} V⟩
/// ```
///
/// for tangent pairs at two consecutive levels.
pub fn two_form_defects(
    system: &HamiltonianSystem,
    before: &TangentPair,
    after: &TangentPair,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    for len in [before.u.len(), before.v.len(), after.u.len(), after.v.len()] {
        if len != nodes {
            return Err(Error::LengthMismatch { expected: nodes, actual: len });
        }
    }
    let (a, b) = (system.a(), system.b());
    let et_full = Conformal::new(a, grid.dt).decay();
    let ex_full = Conformal::new(b, grid.dx).decay();
    let et = Conformal::new(0.5 * a, grid.dt).decay();
    let ex = Conformal::new(0.5 * b, grid.dx).decay();
    let m = system.m();
    let k = system.k();

    let ax = |z: &[State], j: usize| (z[j + 1] + z[j] * ex) * 0.5;
    let at = |z1: &[State], z0: &[State], j: usize| (z1[j] + z0[j] * et) * 0.5;
    let time_form = |p: &TangentPair, j: usize| (m * ax(&p.u, j)).dot(&ax(&p.v, j));
    let space_form = |j: usize| (k * at(&after.u, &before.u, j)).dot(&at(&after.v, &before.v, j));

    Ok((0..grid.cells())
        .map(|j| {
            (time_form(after, j) - et_full * time_form(before, j)) / grid.dt
                + (space_form(j + 1) - ex_full * space_form(j)) / grid.dx
        })
        .collect())
}
