//! Charge, energy, error norms and the exact plane wave.
//!
//! All spatial sums carry a `Δx` factor. Charge uses cell midpoints,
//! `Q = Δx Σ_{j<J} |(u_j + u_{j+1})/2|²`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Conformal, GridSpec};
use crate::hamiltonian::NlsParameters;
use crate::integrators::ComplexGridState;

/// Compensated (Neumaier) summation in iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_nodes(u: &[Complex64], grid: &GridSpec) -> Result<()> {
    if u.len() != grid.nodes() {
        return Err(Error::LengthMismatch { expected: grid.nodes(), actual: u.len() });
    }
    Ok(())
}

fn midpoints(u: &[Complex64]) -> impl Iterator<Item = Complex64> + '_ {
    u.windows(2).map(|w| (w[0] + w[1]) * 0.5)
}

pub fn discrete_charge(u: &ComplexGridState, grid: &GridSpec) -> Result<f64> {
    check_nodes(&u.u, grid)?;
    Ok(grid.dx * neumaier_sum(midpoints(&u.u).map(|m| m.norm_sqr())))
}

/// `2αΔt − log(Q_curr/Q_next)`; zero when the charge decays exactly by
/// `e^{−2αΔt}`.
pub fn charge_residual(q_curr: f64, q_next: f64, alpha: f64, dt: f64) -> Result<f64> {
    for q in [q_curr, q_next] {
        if !(q > 0.0) {
            return Err(Error::NonPositiveCharge(q));
        }
    }
    Ok(2.0 * alpha * dt - (q_curr / q_next).ln())
}

/// `∫₀ᵗ e^{−2αs} ds`, continuous at `α = 0`.
fn damped_time(alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        t
    } else {
        -(-2.0 * alpha * t).exp_m1() / (2.0 * alpha)
    }
}

/// Phase of the exact plane wave, `|A|²∫₀ᵗe^{−2αs}ds + εW(t)` plus `arg A`.
pub fn plane_wave_phase(t: f64, w_t: f64, amp: Complex64, params: &NlsParameters) -> f64 {
    amp.norm_sqr() * damped_time(params.alpha, t) + params.epsilon * w_t + amp.arg()
}

/// `u(t) = A e^{−αt} exp(i(|A|²(1 − e^{−2αt})/(2α) + εW(t)))`.
pub fn plane_wave_exact(t: f64, w_t: f64, amp: Complex64, params: &NlsParameters) -> Complex64 {
    let phase = amp.norm_sqr() * damped_time(params.alpha, t) + params.epsilon * w_t;
    amp * (-params.alpha * t).exp() * Complex64::from_polar(1.0, phase)
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `arg u_j` unwrapped along space so that consecutive increments lie in
/// `(−π, π]`.
pub fn unwrap_phase(u: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    let mut prev: Option<f64> = None;
    for v in u {
        let a = v.arg();
        let next = match prev {
            None => a,
            Some(p) => p + wrap_angle(a - p),
        };
        out.push(next);
        prev = Some(next);
    }
    out
}

/// Spatial means of `|u_j|` and of the unwrapped `arg u_j`.
pub fn amplitude_phase(u: &[Complex64]) -> Result<(f64, f64)> {
    if u.is_empty() || u.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::ZeroField);
    }
    let n = u.len() as f64;
    let amp = neumaier_sum(u.iter().map(|v| v.norm())) / n;
    let phase = neumaier_sum(unwrap_phase(u)) / n;
    Ok((amp, phase))
}

/// Amplitude error and phase error (wrapped into `(−π, π]`) of the spatial
/// averages against a spatially constant reference.
pub fn amplitude_phase_error(u: &ComplexGridState, exact: Complex64) -> Result<(f64, f64)> {
    let (amp, phase) = amplitude_phase(&u.u)?;
    Ok((amp - exact.norm(), wrap_angle(phase - exact.arg())))
}

/// `(Δx Σ_j |u_j − v_j|²)^{1/2}` over all nodes.
pub fn discrete_l2_error(u: &ComplexGridState, v: &ComplexGridState, grid: &GridSpec) -> Result<f64> {
    check_nodes(&u.u, grid)?;
    check_nodes(&v.u, grid)?;
    Ok((grid.dx * neumaier_sum(u.u.iter().zip(&v.u).map(|(a, b)| (a - b).norm_sqr()))).sqrt())
}

/// Energy functionals of one time level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms {
    /// `Δx Σ |δ_x u_j|²`.
    pub grad: f64,
    /// `Δx Σ |A_x u_j|⁴`.
    pub quartic: f64,
}

pub fn energy_terms(u: &ComplexGridState, grid: &GridSpec) -> Result<EnergyTerms> {
    check_nodes(&u.u, grid)?;
    let inv = 1.0 / grid.dx;
    let grad = neumaier_sum(u.u.windows(2).map(|w| ((w[1] - w[0]) * inv).norm_sqr()));
    let quartic = neumaier_sum(midpoints(&u.u).map(|m| m.norm_sqr().powi(2)));
    Ok(EnergyTerms { grad: grid.dx * grad, quartic: grid.dx * quartic })
}

/// The three sums of the discrete energy recursion for one CMS step:
/// `(E^{n+1} − e^{−2αΔt}Eⁿ, cubic, noise)` with
///
/// ```text
/// E      = Δx Σ |δ_x u_j|²
/// cubic  = Δx Σ |Ā_j|² (|A_x u_j^{n+1}|² − e^{−2αΔt}|A_x u_jⁿ|²)
/// noise  = ε Δx Σ χ_j (|A_x u_j^{n+1}|² − e^{−2αΔt}|A_x u_jⁿ|²)
/// ```
///
/// where `Ā = A_t^α A_x u`. A CMS step satisfies `E-part = cubic + noise`.
pub fn energy_recursion_terms(
    u_curr: &ComplexGridState,
    u_next: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
) -> Result<(f64, f64, f64)> {
    check_nodes(&u_curr.u, grid)?;
    check_nodes(&u_next.u, grid)?;
    if dw.len() != grid.nodes() {
        return Err(Error::LengthMismatch { expected: grid.nodes(), actual: dw.len() });
    }
    let e = Conformal::new(params.alpha, grid.dt).decay();
    let e2 = e * e;
    let inv = 1.0 / grid.dx;
    let cells = grid.cells();
    let (u0, u1) = (&u_curr.u, &u_next.u);

    let grad = |u: &[Complex64], c: usize| ((u[c + 1] - u[c]) * inv).norm_sqr();
    let avg = |u: &[Complex64], c: usize| (u[c + 1] + u[c]) * 0.5;
    let lhs = neumaier_sum((0..cells).map(|c| grad(u1, c) - e2 * grad(u0, c)));
    let change = |c: usize| avg(u1, c).norm_sqr() - e2 * avg(u0, c).norm_sqr();
    let cubic = neumaier_sum((0..cells).map(|c| ((avg(u1, c) + avg(u0, c) * e) * 0.5).norm_sqr() * change(c)));
    let noise = params.epsilon * neumaier_sum((0..cells).map(|c| dw[c] / grid.dt * change(c)));
    Ok((grid.dx * lhs, grid.dx * cubic, grid.dx * noise))
}

/// `|LHS − RHS|` of the discrete energy recursion across one step.
pub fn energy_recursion_check(
    u_curr: &ComplexGridState,
    u_next: &ComplexGridState,
    params: &NlsParameters,
    dw: &[f64],
    grid: &GridSpec,
) -> Result<f64> {
    let (lhs, cubic, noise) = energy_recursion_terms(u_curr, u_next, params, dw, grid)?;
    Ok((lhs - cubic - noise).abs())
}

/// One energy sample in a time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyPoint {
    pub grad: f64,
    pub quartic: f64,
    /// Running sum of the noise term of the recursion.
    pub noise_cum: f64,
}

/// Time series of diagnostics for one trajectory or an ensemble mean.
///
/// `charge_residual[n]` refers to the step `t_n → t_{n+1}`, so it has one
/// entry fewer than `times`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub charge: Vec<f64>,
    pub charge_residual: Vec<f64>,
    pub energy: Vec<EnergyPoint>,
    pub two_form: Option<Vec<f64>>,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Lengths agree with `times` for every filled series.
    pub fn is_consistent(&self) -> bool {
        let n = self.times.len();
        let ok = |len: usize| len == 0 || len == n;
        ok(self.charge.len())
            && (self.charge_residual.is_empty() || self.charge_residual.len() + 1 == n)
            && ok(self.energy.len())
            && ok(self.amplitude.len())
            && ok(self.phase.len())
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.charge_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}
