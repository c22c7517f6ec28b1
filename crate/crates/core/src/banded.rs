//! Banded LU factorisation with partial pivoting, plus a cyclic tridiagonal
//! solve (Sherman–Morrison) for periodic closures.
//!
//! Storage keeps, for each row `r`, the absolute columns
//! `r − kl ..= r + ku + kl`; the extra `kl` upper diagonals hold the fill
//! produced by row interchanges.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        // 1-norm is enough for pivot selection and avoids a sqrt
        self.re.abs() + self.im.abs()
    }
}

#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    /// Build from `(row, col, value)` triplets, sizing the band to fit.
    /// Repeated entries are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, T)]) -> Self {
        let (mut kl, mut ku) = (0usize, 0usize);
        for &(r, c, _) in entries {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        let mut m = Self::zeros(n, kl, ku);
        for &(r, c, v) in entries {
            m.add(r, c, v);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku + self.kl, "({r},{c}) outside band");
        r * self.width + (c + self.kl - r)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        if c + self.kl < r || c > r + self.ku {
            return T::zero();
        }
        self.data[self.idx(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        assert!(c + self.kl >= r && c <= r + self.ku, "({r},{c}) outside band");
        let i = self.idx(r, c);
        self.data[i] = v;
    }

    pub fn add(&mut self, r: usize, c: usize, v: T) {
        assert!(c + self.kl >= r && c <= r + self.ku, "({r},{c}) outside band");
        let i = self.idx(r, c);
        self.data[i] += v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                let mut acc = T::zero();
                for c in lo..=hi {
                    acc += self.get(r, c) * x[c];
                }
                acc
            })
            .collect()
    }

    pub fn factorize(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let last = (col + kl).min(n - 1);
            let mut p = col;
            let mut best = self.data[self.idx(col, col)].modulus();
            for r in col + 1..=last {
                let v = self.data[self.idx(r, col)].modulus();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { column: col });
            }
            pivots[col] = p;
            let right = (col + ku + kl).min(n - 1);
            if p != col {
                for c in col..=right {
                    let a = self.idx(col, c);
                    let b = self.idx(p, c);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(col, col)];
            for r in col + 1..=last {
                let i = self.idx(r, col);
                let factor = self.data[i] / pivot;
                self.data[i] = factor;
                if factor == T::zero() {
                    continue;
                }
                for c in col + 1..=right {
                    let src = self.data[self.idx(col, c)];
                    let dst = self.idx(r, c);
                    self.data[dst] -= factor * src;
                }
            }
        }
        Ok(BandLu { m: self, pivots })
    }

    pub fn solve(self, rhs: &[T]) -> Result<Vec<T>> {
        let lu = self.factorize()?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x)?;
        Ok(x)
    }
}

#[derive(Debug, Clone)]
pub struct BandLu<T> {
    m: BandMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        let m = &self.m;
        let n = m.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: b.len() });
        }
        for col in 0..n {
            let p = self.pivots[col];
            if p != col {
                b.swap(p, col);
            }
            let last = (col + m.kl).min(n - 1);
            let bc = b[col];
            for r in col + 1..=last {
                let f = m.data[m.idx(r, col)];
                b[r] -= f * bc;
            }
        }
        for r in (0..n).rev() {
            let right = (r + m.ku + m.kl).min(n - 1);
            let mut acc = b[r];
            for c in r + 1..=right {
                acc -= m.data[m.idx(r, c)] * b[c];
            }
            b[r] = acc / m.data[m.idx(r, r)];
        }
        Ok(())
    }
}

/// Tridiagonal system with optional periodic corners.
///
/// Row `i` reads `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1]`; with
/// `periodic` set the indices wrap, so `lower[0]` couples to `x[n−1]` and
/// `upper[n−1]` to `x[0]`. Otherwise `lower[0]` and `upper[n−1]` are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
    pub periodic: bool,
}

impl<T: Scalar> Tridiagonal<T> {
    pub fn new(n: usize, periodic: bool) -> Self {
        Self {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
            periodic,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                } else if self.periodic && n > 1 {
                    acc += self.lower[0] * x[n - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                } else if self.periodic && n > 1 {
                    acc += self.upper[n - 1] * x[0];
                }
                acc
            })
            .collect()
    }

    fn open_band(&self) -> BandMatrix<T> {
        let n = self.len();
        let mut m = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, self.diag[i]);
            if i > 0 {
                m.set(i, i - 1, self.lower[i]);
            }
            if i + 1 < n {
                m.set(i, i + 1, self.upper[i]);
            }
        }
        m
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: rhs.len() });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if !self.periodic || n < 3 {
            if self.periodic {
                return self.solve_small_periodic(rhs);
            }
            return self.open_band().solve(rhs);
        }
        // A = T' + u vᵀ with u = (γ, 0, …, 0, c), v = (1, 0, …, 0, a/γ).
        let a = self.lower[0];
        let c = self.upper[n - 1];
        let gamma = -self.diag[0];
        let mut base = self.clone();
        base.periodic = false;
        base.diag[0] = base.diag[0] - gamma;
        base.diag[n - 1] = base.diag[n - 1] - c * a / gamma;
        let lu = base.open_band().factorize()?;
        let mut x = rhs.to_vec();
        lu.solve_in_place(&mut x)?;
        let mut u = vec![T::zero(); n];
        u[0] = gamma;
        u[n - 1] = c;
        lu.solve_in_place(&mut u)?;
        let v_last = a / gamma;
        let num = x[0] + v_last * x[n - 1];
        let den = T::one() + u[0] + v_last * u[n - 1];
        if den.modulus() == 0.0 {
            return Err(Error::Singular { column: 0 });
        }
        let fact = num / den;
        for i in 0..n {
            x[i] = x[i] - fact * u[i];
        }
        Ok(x)
    }

    fn solve_small_periodic(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.len();
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, self.diag[i]));
            if n > 1 {
                entries.push((i, (i + n - 1) % n, self.lower[i]));
                entries.push((i, (i + 1) % n, self.upper[i]));
            }
        }
        BandMatrix::from_triplets(n, &entries).solve(rhs)
    }
}
