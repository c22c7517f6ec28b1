use conformal_ms::grid::{avg_t, avg_x, delta_t, delta_x};
use proptest::collection::vec;
use proptest::prelude::*;

fn levels() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4usize..64).prop_flat_map(|n| (vec(-1.0..1.0f64, n), vec(-1.0..1.0f64, n)))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn time_and_space_operators_commute(
        (z1, z0) in levels(), c in -2.0..2.0f64, d in -2.0..2.0f64, dt in 0.05..1.0f64, dx in 0.05..1.0f64,
    ) {
        let ta = delta_t(c, &avg_x(d, &z1, dx).unwrap(), &avg_x(d, &z0, dx).unwrap(), dt).unwrap();
        let at = avg_x(d, &delta_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        prop_assert!(close(&ta, &at, 1e-13));

        let tx = delta_t(c, &delta_x(d, &z1, dx).unwrap(), &delta_x(d, &z0, dx).unwrap(), dt).unwrap();
        let xt = delta_x(d, &delta_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        prop_assert!(close(&tx, &xt, 1e-12));

        let mm = avg_t(c, &avg_x(d, &z1, dx).unwrap(), &avg_x(d, &z0, dx).unwrap(), dt).unwrap();
        let mm2 = avg_x(d, &avg_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        prop_assert!(close(&mm, &mm2, 1e-14));
    }

    #[test]
    fn product_rule_in_space(
        (phi, psi) in levels(), c in -2.0..2.0f64, h in 0.05..1.0f64,
    ) {
        let prod: Vec<f64> = phi.iter().zip(&psi).map(|(a, b)| a * b).collect();
        let lhs = delta_x(c, &prod, h).unwrap();
        let (dp, ap) = (delta_x(c / 2.0, &phi, h).unwrap(), avg_x(c / 2.0, &phi, h).unwrap());
        let (ds, as_) = (delta_x(c / 2.0, &psi, h).unwrap(), avg_x(c / 2.0, &psi, h).unwrap());
        let rhs: Vec<f64> = (0..lhs.len()).map(|k| dp[k] * as_[k] + ap[k] * ds[k]).collect();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn product_rule_in_time(
        (p1, p0) in levels(), c in -2.0..2.0f64, h in 0.05..1.0f64,
    ) {
        let s1: Vec<f64> = p1.iter().map(|v| (v * 7.0).sin()).collect();
        let s0: Vec<f64> = p0.iter().map(|v| (v * 3.0).cos()).collect();
        let q1: Vec<f64> = p1.iter().zip(&s1).map(|(a, b)| a * b).collect();
        let q0: Vec<f64> = p0.iter().zip(&s0).map(|(a, b)| a * b).collect();
        let lhs = delta_t(c, &q1, &q0, h).unwrap();
        let dp = delta_t(c / 2.0, &p1, &p0, h).unwrap();
        let ap = avg_t(c / 2.0, &p1, &p0, h).unwrap();
        let ds = delta_t(c / 2.0, &s1, &s0, h).unwrap();
        let as_ = avg_t(c / 2.0, &s1, &s0, h).unwrap();
        let rhs: Vec<f64> = (0..lhs.len()).map(|k| dp[k] * as_[k] + ap[k] * ds[k]).collect();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }
}
