//! Python bindings: grids, parameters, single steps, noise sampling,
//! diagnostics and the experiment drivers.

use std::path::Path;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use conformal_ms::diagnostics;
use conformal_ms::experiments::{self, Experiment, ExperimentConfig};
use conformal_ms::integrators::{self, Closure, ComplexGridState, StepConfig};
use conformal_ms::noise::{sample_path, NoiseModel};
use conformal_ms::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidGrid(_)
        | Error::InvalidParameter(_)
        | Error::LengthMismatch { .. }
        | Error::TooFewNodes { .. }
        | Error::NonDyadic(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Grid", frozen)]
struct PyGrid(conformal_ms::GridSpec);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(x_left: f64, x_right: f64, dx: f64, dt: f64) -> PyResult<Self> {
        conformal_ms::GridSpec::new(x_left, x_right, dx, dt).map(Self).map_err(to_py)
    }
    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx
    }
    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }
    #[getter]
    fn nodes(&self) -> usize {
        self.0.nodes()
    }
    #[getter]
    fn cells(&self) -> usize {
        self.0.cells()
    }
    fn xs(&self) -> Vec<f64> {
        self.0.xs()
    }
    fn __repr__(&self) -> String {
        format!("Grid(x_left={}, x_right={}, dx={}, dt={})", self.0.x_left, self.0.x_right, self.0.dx, self.0.dt)
    }
}

#[pyclass(name = "NlsParams", frozen)]
struct PyNlsParams(conformal_ms::NlsParameters);

#[pymethods]
impl PyNlsParams {
    #[new]
    fn new(alpha: f64, epsilon: f64) -> PyResult<Self> {
        conformal_ms::NlsParameters::new(alpha, epsilon).map(Self).map_err(to_py)
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }
}

fn step_config(periodic: bool, theta: f64, tol: f64, max_iterations: usize) -> StepConfig {
    let closure = if periodic { Closure::Periodic } else { Closure::Dirichlet };
    StepConfig { fixed_point_tol: tol, max_iterations, theta, closure }
}

/// One conformal multi-symplectic step of the damped NLS.
#[pyfunction]
#[pyo3(signature = (u, params, dw, grid, time=0.0, periodic=false, tol=1e-13, max_iterations=200))]
#[allow(clippy::too_many_arguments)]
fn cms_step(
    u: Vec<Complex64>,
    params: &PyNlsParams,
    dw: Vec<f64>,
    grid: &PyGrid,
    time: f64,
    periodic: bool,
    tol: f64,
    max_iterations: usize,
) -> PyResult<Vec<Complex64>> {
    let state = ComplexGridState { u, time };
    let cfg = step_config(periodic, 1.0, tol, max_iterations);
    integrators::cms_step_nls(&state, &params.0, &dw, &grid.0, &cfg).map(|s| s.u).map_err(to_py)
}

/// One multi-symplectic step for `ϖ = e^{αt}u`; input and output are `ϖ`.
#[pyfunction]
#[pyo3(signature = (w, params, dw, grid, time=0.0, theta=1.0, periodic=false, tol=1e-13, max_iterations=200))]
#[allow(clippy::too_many_arguments)]
fn ms_step(
    w: Vec<Complex64>,
    params: &PyNlsParams,
    dw: Vec<f64>,
    grid: &PyGrid,
    time: f64,
    theta: f64,
    periodic: bool,
    tol: f64,
    max_iterations: usize,
) -> PyResult<Vec<Complex64>> {
    let state = ComplexGridState { u: w, time };
    let cfg = step_config(periodic, theta, tol, max_iterations);
    integrators::ms_step_transformed(&state, &params.0, &dw, &grid.0, &cfg).map(|s| s.u).map_err(to_py)
}

/// One Crank–Nicolson step.
#[pyfunction]
#[pyo3(signature = (u, params, dw, grid, time=0.0, periodic=false, tol=1e-13, max_iterations=200))]
#[allow(clippy::too_many_arguments)]
fn cn_step(
    u: Vec<Complex64>,
    params: &PyNlsParams,
    dw: Vec<f64>,
    grid: &PyGrid,
    time: f64,
    periodic: bool,
    tol: f64,
    max_iterations: usize,
) -> PyResult<Vec<Complex64>> {
    let state = ComplexGridState { u, time };
    let cfg = step_config(periodic, 1.0, tol, max_iterations);
    integrators::cn_step(&state, &params.0, &dw, &grid.0, &cfg).map(|s| s.u).map_err(to_py)
}

/// Brownian increments `[n][j]` for one trajectory. `modes = 0` gives scalar noise.
#[pyfunction]
#[pyo3(signature = (grid, n_steps, seed, trajectory=0, modes=0))]
fn sample_noise(grid: &PyGrid, n_steps: usize, seed: u64, trajectory: u64, modes: usize) -> PyResult<Vec<Vec<f64>>> {
    let model = if modes == 0 {
        NoiseModel::scalar(seed)
    } else {
        NoiseModel::spectral(modes, grid.0.x_left, grid.0.x_right, seed)
    }
    .with_trajectory(trajectory);
    let path = sample_path(&model, &grid.0, n_steps).map_err(to_py)?;
    Ok((0..n_steps).map(|n| path.slice(n).to_vec()).collect())
}

#[pyfunction]
fn discrete_charge(u: Vec<Complex64>, grid: &PyGrid) -> PyResult<f64> {
    diagnostics::discrete_charge(&ComplexGridState { u, time: 0.0 }, &grid.0).map_err(to_py)
}

#[pyfunction]
fn charge_residual(q_curr: f64, q_next: f64, alpha: f64, dt: f64) -> PyResult<f64> {
    diagnostics::charge_residual(q_curr, q_next, alpha, dt).map_err(to_py)
}

/// `(gradient part, quartic part)` of the discrete energy.
#[pyfunction]
fn energy_terms(u: Vec<Complex64>, grid: &PyGrid) -> PyResult<(f64, f64)> {
    let e = diagnostics::energy_terms(&ComplexGridState { u, time: 0.0 }, &grid.0).map_err(to_py)?;
    Ok((e.grad, e.quartic))
}

#[pyfunction]
fn fit_slope(dts: Vec<f64>, errors: Vec<f64>) -> PyResult<f64> {
    experiments::fit_slope(&dts, &errors).map_err(to_py)
}

/// Run an experiment and return a dict of its main series. Keyword
/// arguments are config keys; `config` is the text of a config file and
/// `out` a directory for the CSV files.
#[pyfunction]
#[pyo3(signature = (experiment, config=None, out=None, **overrides))]
fn run_experiment<'py>(
    py: Python<'py>,
    experiment: &str,
    config: Option<&str>,
    out: Option<&str>,
    overrides: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let exp: Experiment = experiment.parse().map_err(to_py)?;
    let mut cfg = match config {
        Some(text) => ExperimentConfig::parse(text, exp).map_err(to_py)?,
        None => ExperimentConfig::defaults(exp),
    };
    if let Some(kw) = overrides {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            let value = match v.extract::<Vec<i64>>() {
                Ok(list) => list.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                Err(_) => v.str()?.to_string(),
            };
            cfg.set(&key, &value).map_err(to_py)?;
        }
    }
    cfg.validate().map_err(to_py)?;

    let d = PyDict::new(py);
    // Long runs release the GIL; rayon does the parallel work.
    match exp {
        Experiment::PlaneWave => {
            let r = py.detach(|| experiments::run_plane_wave(&cfg)).map_err(to_py)?;
            if let Some(dir) = out {
                experiments::write_plane_wave_csv(Path::new(dir), &r).map_err(to_py)?;
            }
            d.set_item("t", r.times)?;
            d.set_item("amp_num", r.amp_num)?;
            d.set_item("amp_exact", r.amp_exact)?;
            d.set_item("amp_err", r.amp_err)?;
            d.set_item("phase_num", r.phase_num)?;
            d.set_item("phase_exact", r.phase_exact)?;
            d.set_item("phase_err", r.phase_err)?;
            d.set_item("trajectories_used", r.trajectories_used)?;
        }
        Experiment::SolitonChargeEnergy => {
            let r = py.detach(|| experiments::run_soliton(&cfg)).map_err(to_py)?;
            if let Some(dir) = out {
                experiments::write_soliton_csv(Path::new(dir), &r).map_err(to_py)?;
            }
            d.set_item("t", r.cms.times.clone())?;
            d.set_item("q_cms", r.cms.charge.clone())?;
            d.set_item("q_cn", r.cn.charge.clone())?;
            d.set_item("q_exact", r.q_exact)?;
            d.set_item("r_cms", r.cms.charge_residual.clone())?;
            d.set_item("r_cn", r.cn.charge_residual.clone())?;
            d.set_item("max_ratio_error_cms", r.max_ratio_error_cms)?;
            d.set_item("max_energy_defect_cms", r.max_energy_defect_cms)?;
            d.set_item("max_energy_defect_cn", r.max_energy_defect_cn)?;
            d.set_item("trajectories_used", r.trajectories_used)?;
        }
        Experiment::Convergence => {
            let r = py.detach(|| experiments::run_convergence(&cfg)).map_err(to_py)?;
            if let Some(dir) = out {
                experiments::write_convergence_csv(Path::new(dir), &r, cfg.truncation_m).map_err(to_py)?;
            }
            if let Some(curves) = &r.per_m {
                let per_m = PyDict::new(py);
                for c in curves {
                    per_m.set_item(c.m, c.slope)?;
                }
                d.set_item("slope_per_m", per_m)?;
            }
            d.set_item("dt", r.dts)?;
            d.set_item("error", r.errors)?;
            d.set_item("slope", r.slope)?;
            d.set_item("trajectories_used", r.trajectories_used)?;
        }
        Experiment::TwoFormAudit => {
            let r = py.detach(|| experiments::run_two_form_audit(&cfg)).map_err(to_py)?;
            if let Some(dir) = out {
                experiments::write_audit_csv(Path::new(dir), &r).map_err(to_py)?;
            }
            d.set_item("max_defect", r.max_defect)?;
            d.set_item("trajectories_used", r.trajectories_used)?;
        }
    }
    Ok(d)
}

#[pymodule]
fn conformal_ms_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyNlsParams>()?;
    m.add_function(wrap_pyfunction!(cms_step, m)?)?;
    m.add_function(wrap_pyfunction!(ms_step, m)?)?;
    m.add_function(wrap_pyfunction!(cn_step, m)?)?;
    m.add_function(wrap_pyfunction!(sample_noise, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_charge, m)?)?;
    m.add_function(wrap_pyfunction!(charge_residual, m)?)?;
    m.add_function(wrap_pyfunction!(energy_terms, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
