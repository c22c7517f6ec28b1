//! Uniform space-time mesh and the exponentially weighted difference and
//! averaging operators.
//!
//! For a rate `c` and mesh width `h` the operators act on a sequence `z` as
//!
//! ```text
//! δ^c z_k = (z_{k+1} − e^{−c h} z_k) / h
//! A^c z_k = (z_{k+1} + e^{−c h} z_k) / 2
//! ```
//!
//! In time the two levels are passed separately; in space the forward
//! stencil shrinks the index range by one. With `c = 0` they reduce to the
//! classical forward difference and midpoint average.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Values that the grid operators can act on: reals, complex numbers and
/// small fixed-size vectors.
pub trait GridValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> GridValue for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Uniform mesh `x_j = x_left + j·dx`, `j = 0..=cells`, with time step `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    pub dt: f64,
    cells: usize,
}

impl GridSpec {
    pub fn new(x_left: f64, x_right: f64, dx: f64, dt: f64) -> Result<Self> {
        if !(x_right > x_left) {
            return Err(Error::InvalidGrid(format!("x_right {x_right} must exceed x_left {x_left}")));
        }
        if !(dx > 0.0) || dx > x_right - x_left {
            return Err(Error::InvalidGrid(format!("dx {dx} outside (0, {}]", x_right - x_left)));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt {dt} must be positive")));
        }
        // Tolerate the representation error of dx, e.g. 50 / 0.1 = 499.999...
        let ratio = (x_right - x_left) / dx;
        let cells = (ratio + 1e-9 * ratio.max(1.0)).floor() as usize;
        Ok(Self { x_left, x_right, dx, dt, cells })
    }

    /// Number of cells `J`; the grid has `J + 1` nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| self.x(j)).collect()
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.x_left, self.x_right, self.dx, dt)
    }
}

/// Exponential weight `e^{−c h}` for one rate and mesh width, computed once
/// and reused so that repeated steps see bit-identical coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conformal {
    pub rate: f64,
    pub step: f64,
    decay: f64,
}

impl Conformal {
    pub fn new(rate: f64, step: f64) -> Self {
        let decay = if rate == 0.0 { 1.0 } else { (-rate * step).exp() };
        Self { rate, step, decay }
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// Difference between two levels, `(next − e^{−ch} curr)/h`.
    pub fn delta_levels<T: GridValue>(&self, next: &[T], curr: &[T]) -> Result<Vec<T>> {
        check_same_len(next, curr)?;
        let inv = 1.0 / self.step;
        Ok(next.iter().zip(curr).map(|(&a, &b)| (a - b * self.decay) * inv).collect())
    }

    /// Average of two levels, `(next + e^{−ch} curr)/2`.
    pub fn avg_levels<T: GridValue>(&self, next: &[T], curr: &[T]) -> Result<Vec<T>> {
        check_same_len(next, curr)?;
        Ok(next.iter().zip(curr).map(|(&a, &b)| (a + b * self.decay) * 0.5).collect())
    }

    /// Forward difference along a sequence; output has one fewer entry.
    pub fn delta_forward<T: GridValue>(&self, z: &[T]) -> Result<Vec<T>> {
        check_min_nodes(z)?;
        let inv = 1.0 / self.step;
        Ok(z.windows(2).map(|w| (w[1] - w[0] * self.decay) * inv).collect())
    }

    /// Forward average along a sequence; output has one fewer entry.
    pub fn avg_forward<T: GridValue>(&self, z: &[T]) -> Result<Vec<T>> {
        check_min_nodes(z)?;
        Ok(z.windows(2).map(|w| (w[1] + w[0] * self.decay) * 0.5).collect())
    }
}

pub fn delta_t<T: GridValue>(c: f64, z_next: &[T], z_curr: &[T], dt: f64) -> Result<Vec<T>> {
    Conformal::new(c, dt).delta_levels(z_next, z_curr)
}

pub fn avg_t<T: GridValue>(c: f64, z_next: &[T], z_curr: &[T], dt: f64) -> Result<Vec<T>> {
    Conformal::new(c, dt).avg_levels(z_next, z_curr)
}

pub fn delta_x<T: GridValue>(c: f64, z: &[T], dx: f64) -> Result<Vec<T>> {
    Conformal::new(c, dx).delta_forward(z)
}

pub fn avg_x<T: GridValue>(c: f64, z: &[T], dx: f64) -> Result<Vec<T>> {
    Conformal::new(c, dx).avg_forward(z)
}

fn check_same_len<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(())
}

fn check_min_nodes<T>(z: &[T]) -> Result<()> {
    if z.len() < 2 {
        return Err(Error::TooFewNodes { min: 2, actual: z.len() });
    }
    Ok(())
}
