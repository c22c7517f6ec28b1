//! Reproducible Wiener increments.
//!
//! Each Brownian mode `β_m` of trajectory `i` draws from its own ChaCha
//! stream keyed by the experiment seed, with stream id `(i << 16) | m`, so
//! paths are pure functions of `(seed, trajectory, mode)` and independent of
//! the order in which trajectories are generated.
//!
//! Space-time increments follow the truncated expansion
//! `ΔW_j^n = Σ_{m=1}^{M} √η_m e_m(x_j) Δβ_m^n` with the sine basis
//! `e_m(x) = √(2/L) sin(mπ(x − x_L)/L)`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// A single Brownian motion, constant in space.
    Scalar,
    /// Sine-mode expansion truncated after `truncation_m` modes.
    SpectralTruncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub truncation_m: usize,
    pub eta: Vec<f64>,
    pub x_left: f64,
    pub x_right: f64,
    pub seed: u64,
    pub trajectory_index: u64,
}

impl NoiseModel {
    pub fn scalar(seed: u64) -> Self {
        Self {
            kind: NoiseKind::Scalar,
            truncation_m: 1,
            eta: vec![1.0],
            x_left: 0.0,
            x_right: 1.0,
            seed,
            trajectory_index: 0,
        }
    }

    pub fn spectral(truncation_m: usize, x_left: f64, x_right: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::SpectralTruncated,
            truncation_m,
            eta: vec![1.0; truncation_m],
            x_left,
            x_right,
            seed,
            trajectory_index: 0,
        }
    }

    pub fn with_trajectory(mut self, index: u64) -> Self {
        self.trajectory_index = index;
        self
    }

    pub fn with_truncation(mut self, m: usize) -> Self {
        self.truncation_m = m;
        if self.eta.len() < m {
            self.eta.resize(m, 1.0);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation_m < 1 {
            return Err(Error::InvalidParameter("truncation_M must be >= 1".into()));
        }
        if self.kind == NoiseKind::SpectralTruncated {
            if self.eta.len() < self.truncation_m {
                return Err(Error::InvalidParameter(format!(
                    "eta has {} entries, need {}",
                    self.eta.len(),
                    self.truncation_m
                )));
            }
            if self.eta.iter().any(|&e| !(e >= 0.0)) {
                return Err(Error::InvalidParameter("eta entries must be nonnegative".into()));
            }
            if !(self.x_right > self.x_left) {
                return Err(Error::InvalidParameter("noise domain is empty".into()));
            }
        }
        Ok(())
    }

    /// Number of independent Brownian motions driving the path.
    pub fn modes(&self) -> usize {
        match self.kind {
            NoiseKind::Scalar => 1,
            NoiseKind::SpectralTruncated => self.truncation_m,
        }
    }

    /// `[m][j]` table of `√η_m e_m(x_j)`; all ones for scalar noise.
    pub fn mode_weights(&self, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        match self.kind {
            NoiseKind::Scalar => Ok(vec![vec![1.0; grid.nodes()]]),
            NoiseKind::SpectralTruncated => (1..=self.truncation_m)
                .map(|m| {
                    let w = self.eta[m - 1].sqrt();
                    (0..grid.nodes())
                        .map(|j| Ok(w * basis_e(m, grid.x(j), self.x_left, self.x_right)?))
                        .collect()
                })
                .collect(),
        }
    }

    fn stream_rng(&self, mode: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.trajectory_index << 16) | mode as u64);
        rng
    }
}

/// Sine basis function `e_m(x) = √(2/L) sin(mπ(x − x_L)/L)`, `m ≥ 1`.
pub fn basis_e(m: usize, x: f64, x_left: f64, x_right: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidParameter("basis index must be >= 1".into()));
    }
    let len = x_right - x_left;
    Ok((2.0 / len).sqrt() * (m as f64 * PI * (x - x_left) / len).sin())
}

/// Spatial variance density `F_φ(x) = Σ_m η_m e_m(x)²` of the truncated
/// noise; identically one for scalar noise.
pub fn f_phi(model: &NoiseModel, x: f64) -> f64 {
    match model.kind {
        NoiseKind::Scalar => 1.0,
        NoiseKind::SpectralTruncated => (1..=model.truncation_m)
            .map(|m| {
                let e = basis_e(m, x, model.x_left, model.x_right).unwrap_or(0.0);
                model.eta[m - 1] * e * e
            })
            .sum(),
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ModalIncrements {
    modes: usize,
    /// `[n * modes + m]`
    dbeta: Vec<f64>,
    /// `[m][j]`
    weights: Vec<Vec<f64>>,
}

/// Wiener increments `ΔW_j^n` for `n_steps` steps on `nodes` grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub dt: f64,
    pub resolution_level: i32,
    n_steps: usize,
    nodes: usize,
    /// `[n * nodes + j]`
    table: Vec<f64>,
    modal: Option<ModalIncrements>,
}

impl NoisePath {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn increment(&self, n: usize, j: usize) -> f64 {
        self.table[n * self.nodes + j]
    }

    /// Increments `ΔW_j^n` for all nodes at step `n`.
    pub fn slice(&self, n: usize) -> &[f64] {
        &self.table[n * self.nodes..(n + 1) * self.nodes]
    }

    /// Brownian increment of mode `m` (zero-based) at step `n`, when the
    /// path was sampled from a model.
    pub fn mode_increment(&self, n: usize, m: usize) -> Option<f64> {
        self.modal.as_ref().map(|md| md.dbeta[n * md.modes + m])
    }

    pub fn modes(&self) -> Option<usize> {
        self.modal.as_ref().map(|md| md.modes)
    }

    fn from_modal(dt: f64, resolution_level: i32, nodes: usize, modal: ModalIncrements) -> Self {
        let n_steps = modal.dbeta.len() / modal.modes;
        let mut table = vec![0.0; n_steps * nodes];
        for n in 0..n_steps {
            let row = &mut table[n * nodes..(n + 1) * nodes];
            for (m, w) in modal.weights.iter().enumerate() {
                let db = modal.dbeta[n * modal.modes + m];
                for (dst, &wj) in row.iter_mut().zip(w) {
                    *dst += wj * db;
                }
            }
        }
        Self { dt, resolution_level, n_steps, nodes, table, modal: Some(modal) }
    }

    /// Merge `2^k` consecutive steps by repeated pairwise summation, so that
    /// coarsening twice by 2 is bit-identical to coarsening once by 4.
    pub fn coarsen(&self, k: u32) -> Result<NoisePath> {
        let factor = 1usize
            .checked_shl(k)
            .ok_or_else(|| Error::NonDyadic(format!("factor 2^{k} overflows")))?;
        if self.n_steps % factor != 0 {
            return Err(Error::NonDyadic(format!("{} steps not divisible by {factor}", self.n_steps)));
        }
        let mut path = self.clone();
        for _ in 0..k {
            path = path.coarsen_by_two();
        }
        Ok(path)
    }

    fn coarsen_by_two(&self) -> NoisePath {
        let dt = 2.0 * self.dt;
        let level = self.resolution_level - 1;
        match &self.modal {
            Some(md) => {
                let steps = self.n_steps / 2;
                let mut dbeta = vec![0.0; steps * md.modes];
                for n in 0..steps {
                    for m in 0..md.modes {
                        dbeta[n * md.modes + m] =
                            md.dbeta[2 * n * md.modes + m] + md.dbeta[(2 * n + 1) * md.modes + m];
                    }
                }
                let modal = ModalIncrements { modes: md.modes, dbeta, weights: md.weights.clone() };
                NoisePath::from_modal(dt, level, self.nodes, modal)
            }
            None => {
                let steps = self.n_steps / 2;
                let mut table = vec![0.0; steps * self.nodes];
                for n in 0..steps {
                    for j in 0..self.nodes {
                        table[n * self.nodes + j] = self.table[2 * n * self.nodes + j]
                            + self.table[(2 * n + 1) * self.nodes + j];
                    }
                }
                NoisePath { dt, resolution_level: level, n_steps: steps, nodes: self.nodes, table, modal: None }
            }
        }
    }

    /// Write `n,j,dW` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,j,dW")?;
        for n in 0..self.n_steps {
            for j in 0..self.nodes {
                writeln!(w, "{n},{j},{:.16e}", self.increment(n, j))?;
            }
        }
        Ok(())
    }

    /// Restore a table-only path from `n,j,dW` rows.
    pub fn read_csv<R: BufRead>(r: R, dt: f64) -> Result<NoisePath> {
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse_err = || Error::Config(format!("bad noise row {}: {line}", lineno + 1));
            let n = it.next().and_then(|s| s.trim().parse().ok()).ok_or_else(parse_err)?;
            let j = it.next().and_then(|s| s.trim().parse().ok()).ok_or_else(parse_err)?;
            let v = it.next().and_then(|s| s.trim().parse().ok()).ok_or_else(parse_err)?;
            rows.push((n, j, v));
        }
        let n_steps = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let nodes = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if rows.len() != n_steps * nodes {
            return Err(Error::Config(format!("noise table has {} rows, expected {}", rows.len(), n_steps * nodes)));
        }
        let mut table = vec![0.0; n_steps * nodes];
        for (n, j, v) in rows {
            table[n * nodes + j] = v;
        }
        Ok(NoisePath { dt, resolution_level: dyadic_level(dt), n_steps, nodes, table, modal: None })
    }
}

fn dyadic_level(dt: f64) -> i32 {
    let l = -dt.log2();
    if l.fract() == 0.0 && l.is_finite() {
        l as i32
    } else {
        0
    }
}

/// Sample `n_steps` increments of `model` on the nodes of `grid` with step `grid.dt`.
pub fn sample_path(model: &NoiseModel, grid: &GridSpec, n_steps: usize) -> Result<NoisePath> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be positive".into()));
    }
    let weights = model.mode_weights(grid)?;
    let modes = model.modes();
    let sd = grid.dt.sqrt();
    let mut dbeta = vec![0.0; n_steps * modes];
    for m in 0..modes {
        let mut rng = model.stream_rng(m + 1);
        for n in 0..n_steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            dbeta[n * modes + m] = sd * z;
        }
    }
    let modal = ModalIncrements { modes, dbeta, weights };
    Ok(NoisePath::from_modal(grid.dt, dyadic_level(grid.dt), grid.nodes(), modal))
}

/// Change the resolution of a stored path by `level_delta` dyadic levels.
/// Only coarsening (`level_delta ≤ 0`) is possible from stored increments.
pub fn refine_or_coarsen(path: &NoisePath, level_delta: i32) -> Result<NoisePath> {
    if level_delta > 0 {
        return Err(Error::NonDyadic(format!(
            "cannot refine a stored path by {level_delta} levels; resample at the finer level"
        )));
    }
    path.coarsen((-level_delta) as u32)
}
