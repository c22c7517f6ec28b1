//! Independent dense reference solvers on tiny grids.
//!
//! Each oracle writes the scheme residual literally (full cubic, no lagging),
//! stacks it as a real vector and solves it with Newton's method using a
//! finite-difference Jacobian and a dense LU factorization.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn dense_newton(f: impl Fn(&DVector<f64>) -> DVector<f64>, x0: DVector<f64>) -> DVector<f64> {
    let n = x0.len();
    let mut x = x0;
    for _ in 0..60 {
        let fx = f(&x);
        let mut jac = DMatrix::zeros(n, n);
        for c in 0..n {
            let h = 1e-6 * (1.0 + x[c].abs());
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            let col = (f(&xp) - f(&xm)) / (2.0 * h);
            jac.set_column(c, &col);
        }
        let dx = jac.lu().solve(&fx).expect("oracle Jacobian singular");
        x -= &dx;
        if dx.amax() < 1e-15 * (1.0 + x.amax()) {
            break;
        }
    }
    assert!(f(&x).amax() < 1e-9, "oracle did not converge");
    x
}

pub fn to_real(u: &[Complex64]) -> DVector<f64> {
    DVector::from_iterator(2 * u.len(), u.iter().flat_map(|v| [v.re, v.im]))
}

pub fn to_complex(x: &DVector<f64>) -> Vec<Complex64> {
    (0..x.len() / 2).map(|k| Complex64::new(x[2 * k], x[2 * k + 1])).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<Complex64> {
    let mut u: Vec<Complex64> =
        (0..nodes).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    u[0] = Complex64::new(0.0, 0.0);
    u[nodes - 1] = Complex64::new(0.0, 0.0);
    u
}

pub fn random_dw(rng: &mut ChaCha8Rng, nodes: usize, dt: f64) -> Vec<f64> {
    (0..nodes).map(|_| dt.sqrt() * rng.random_range(-2.0..2.0)).collect()
}

/// Box scheme in complex form with level weight `e` and cubic factor `g`,
/// Dirichlet ends, equations j = 0..J−2.
pub fn box_oracle(u0: &[Complex64], e: f64, g: f64, eps: f64, dw: &[f64], dx: f64, dt: f64) -> Vec<Complex64> {
    let nodes = u0.len();
    let cells = nodes - 1;
    let chi: Vec<f64> = dw.iter().map(|v| v / dt).collect();
    let residual = |x: &DVector<f64>| -> DVector<f64> {
        let mut u1 = vec![Complex64::new(0.0, 0.0); nodes];
        u1[1..cells].copy_from_slice(&to_complex(x));
        let dtax = |j: usize| ((u1[j] + u1[j + 1]) * 0.5 - (u0[j] + u0[j + 1]) * (0.5 * e)) / dt;
        let at = |j: usize| (u1[j] + u0[j] * e) * 0.5;
        let bar = |j: usize| ((u1[j] + u1[j + 1]) * 0.5 + (u0[j] + u0[j + 1]) * (0.5 * e)) * 0.5;
        let eqs: Vec<Complex64> = (0..cells - 1)
            .map(|j| {
                let lhs = dtax(j + 1) + dtax(j) - I * 2.0 * (at(j + 2) - at(j + 1) * 2.0 + at(j)) / (dx * dx);
                let (a, b) = (bar(j), bar(j + 1));
                let rhs = I * g * (a.norm_sqr() * a + b.norm_sqr() * b) + I * eps * (a * chi[j] + b * chi[j + 1]);
                lhs - rhs
            })
            .collect();
        to_real(&eqs)
    };
    let x = dense_newton(residual, to_real(&u0[1..cells]));
    let mut out = vec![Complex64::new(0.0, 0.0); nodes];
    out[1..cells].copy_from_slice(&to_complex(&x));
    out
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
