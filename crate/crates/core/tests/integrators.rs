use conformal_ms::diagnostics::{discrete_charge, discrete_l2_error, energy_recursion_check};
use conformal_ms::hamiltonian::{kdv_system, nls_system, HamiltonianSystem, State};
use conformal_ms::integrators::{
    cms_step_generic, cms_step_nls, cms_step_nls_with_info, cn_step, ms_step_transformed, tangent_step,
    two_form_defects, BoundaryPins, Closure, ComplexGridState, RealGridState4, StepConfig, TangentPair,
};
use conformal_ms::noise::{sample_path, NoiseModel};
use conformal_ms::{GridSpec, NlsParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn soliton_grid(dt: f64) -> GridSpec {
    GridSpec::new(-10.0, 10.0, 0.1, dt).unwrap()
}

fn sech(g: &GridSpec) -> ComplexGridState {
    ComplexGridState::from_fn(g, Closure::Dirichlet, |x| Complex64::new(1.0 / x.cosh(), 0.0))
}

#[test]
fn charge_ratio_is_exact_every_step() {
    let g = soliton_grid(0.01);
    let cfg = StepConfig::default();
    for alpha in [0.02, 0.1, 0.7] {
        let p = NlsParameters::new(alpha, 0.5).unwrap();
        let model = NoiseModel::spectral(8, g.x_left, g.x_right, 9);
        let path = sample_path(&model, &g, 50).unwrap();
        let mut u = sech(&g);
        let target = (-2.0 * alpha * g.dt).exp();
        for n in 0..50 {
            let next = cms_step_nls(&u, &p, path.slice(n), &g, &cfg).unwrap();
            let ratio = discrete_charge(&next, &g).unwrap() / discrete_charge(&u, &g).unwrap();
            assert!(((ratio - target) / target).abs() < 1e-10, "alpha {alpha} step {n}");
            u = next;
        }
    }
}

#[test]
fn undamped_noiseless_fourier_mode_conserves_charge() {
    let g = GridSpec::new(0.0, 1.0, 1.0 / 64.0, 0.01).unwrap();
    let p = NlsParameters::new(0.0, 0.0).unwrap();
    let u = ComplexGridState::from_fn(&g, Closure::Dirichlet, |x| Complex64::new((std::f64::consts::PI * x).sin(), 0.0));
    let next = cms_step_nls(&u, &p, &vec![0.0; g.nodes()], &g, &StepConfig::default()).unwrap();
    let (q0, q1) = (discrete_charge(&u, &g).unwrap(), discrete_charge(&next, &g).unwrap());
    assert!((q1 - q0).abs() < 1e-13 * q0);
}

#[test]
fn energy_recursion_separates_cms_from_cn() {
    let g = soliton_grid(0.01);
    let cfg = StepConfig::default();
    let p = NlsParameters::new(0.1, 0.5).unwrap();
    let model = NoiseModel::spectral(8, g.x_left, g.x_right, 4);
    let path = sample_path(&model, &g, 30).unwrap();
    let (mut u, mut v) = (sech(&g), sech(&g));
    let mut worst_cn: f64 = 0.0;
    for n in 0..30 {
        let next = cms_step_nls(&u, &p, path.slice(n), &g, &cfg).unwrap();
        assert!(energy_recursion_check(&u, &next, &p, path.slice(n), &g).unwrap() < 1e-9);
        let next_cn = cn_step(&v, &p, path.slice(n), &g, &cfg).unwrap();
        worst_cn = worst_cn.max(energy_recursion_check(&v, &next_cn, &p, path.slice(n), &g).unwrap());
        u = next;
        v = next_cn;
    }
    assert!(worst_cn > 1e-4, "{worst_cn}");
}

#[test]
fn energy_recursion_without_damping_or_noise() {
    let g = soliton_grid(0.02);
    let p = NlsParameters::new(0.0, 0.0).unwrap();
    let u = ComplexGridState::from_fn(&g, Closure::Dirichlet, |x| Complex64::new(1.2 / x.cosh(), 0.3 * (-x * x).exp()));
    let zero = vec![0.0; g.nodes()];
    let next = cms_step_nls(&u, &p, &zero, &g, &StepConfig::default()).unwrap();
    assert!(energy_recursion_check(&u, &next, &p, &zero, &g).unwrap() < 1e-10);
}

#[test]
fn transformed_scheme_with_unit_theta_matches_cms() {
    let g = soliton_grid(0.01);
    let cfg = StepConfig::default();
    let p = NlsParameters::new(0.1, 0.5).unwrap();
    let path = sample_path(&NoiseModel::spectral(8, g.x_left, g.x_right, 77), &g, 100).unwrap();
    let mut u = sech(&g);
    let mut w = sech(&g);
    for n in 0..100 {
        u = cms_step_nls(&u, &p, path.slice(n), &g, &cfg).unwrap();
        w = ms_step_transformed(&w, &p, path.slice(n), &g, &cfg).unwrap();
    }
    let back = ComplexGridState::new(w.u.iter().map(|v| v * (-p.alpha * w.time).exp()).collect(), w.time);
    assert!(discrete_l2_error(&u, &back, &g).unwrap() < 1e-8);
}

#[test]
fn transformed_scheme_ignores_theta_without_damping() {
    let g = soliton_grid(0.01);
    let p = NlsParameters::new(0.0, 0.5).unwrap();
    let u = sech(&g);
    let dw: Vec<f64> = (0..g.nodes()).map(|j| 0.02 * (j as f64 * 0.1).cos()).collect();
    let a = ms_step_transformed(&u, &p, &dw, &g, &StepConfig { theta: 0.0, ..StepConfig::default() }).unwrap();
    let b = ms_step_transformed(&u, &p, &dw, &g, &StepConfig { theta: 1.0, ..StepConfig::default() }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn steps_are_deterministic() {
    let g = soliton_grid(0.01);
    let p = NlsParameters::new(0.1, 0.5).unwrap();
    let path = sample_path(&NoiseModel::spectral(8, g.x_left, g.x_right, 5), &g, 1).unwrap();
    let (a, ia) = cms_step_nls_with_info(&sech(&g), &p, path.slice(0), &g, &StepConfig::default()).unwrap();
    let (b, ib) = cms_step_nls_with_info(&sech(&g), &p, path.slice(0), &g, &StepConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(ia, ib);
    assert!(ia.iterations > 1);
}

fn random_tangent(rng: &mut ChaCha8Rng, nodes: usize, pins: &BoundaryPins) -> Vec<State> {
    let mut t: Vec<State> = (0..nodes)
        .map(|_| State::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    for &c in &pins.left {
        t[0][c] = 0.0;
    }
    for &c in &pins.right {
        t[nodes - 1][c] = 0.0;
    }
    t
}

fn kdv_initial(g: &GridSpec) -> RealGridState4 {
    let z = g
        .xs()
        .into_iter()
        .map(|x| {
            let u = 0.5 / (x.cosh() * x.cosh());
            let ux = -u * 2.0 * x.tanh();
            State::new(0.5 * (x.tanh() + 1.0), u, ux, 0.0)
        })
        .collect();
    RealGridState4::new(z, 0.0)
}

fn audit(sys: &HamiltonianSystem, z0: RealGridState4, pins: &BoundaryPins, g: &GridSpec, seed: u64, steps: usize) -> f64 {
    let cfg = StepConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = sample_path(&NoiseModel::spectral(4, g.x_left, g.x_right, seed), g, steps).unwrap();
    let mut tangents = TangentPair { u: random_tangent(&mut rng, g.nodes(), pins), v: random_tangent(&mut rng, g.nodes(), pins) };
    let mut z = z0;
    let mut worst: f64 = 0.0;
    for n in 0..steps {
        let next = cms_step_generic(sys, &z, path.slice(n), g, pins, &cfg).unwrap();
        let advanced = tangent_step(sys, &z, &next, &tangents, path.slice(n), g, pins, &cfg).unwrap();
        for d in two_form_defects(sys, &tangents, &advanced, g).unwrap() {
            worst = worst.max(d.abs());
        }
        tangents = advanced;
        z = next;
    }
    worst
}

#[test]
fn two_form_is_conserved_for_nls_and_kdv() {
    let g = GridSpec::new(-5.0, 5.0, 0.1, 0.01).unwrap();
    let nls = nls_system(NlsParameters::new(0.1, 0.5).unwrap());
    let z = RealGridState4::from_complex(&sech(&g), g.dx);
    let d = audit(&nls, z, &BoundaryPins::nls(), &g, 1, 20);
    assert!(d < 1e-9, "nls defect {d}");

    let kdv = kdv_system(0.1, 0.3).unwrap();
    let d = audit(&kdv, kdv_initial(&g), &BoundaryPins::kdv(), &g, 2, 20);
    assert!(d < 1e-9, "kdv defect {d}");
}

#[test]
fn zero_tangents_stay_zero() {
    let g = GridSpec::new(-5.0, 5.0, 0.1, 0.01).unwrap();
    let sys = nls_system(NlsParameters::new(0.1, 0.5).unwrap());
    let z = RealGridState4::from_complex(&sech(&g), g.dx);
    let dw = vec![0.01; g.nodes()];
    let pins = BoundaryPins::nls();
    let cfg = StepConfig::default();
    let next = cms_step_generic(&sys, &z, &dw, &g, &pins, &cfg).unwrap();
    let zero = TangentPair { u: vec![State::zeros(); g.nodes()], v: vec![State::zeros(); g.nodes()] };
    let out = tangent_step(&sys, &z, &next, &zero, &dw, &g, &pins, &cfg).unwrap();
    assert_eq!(out, zero);
    assert!(two_form_defects(&sys, &zero, &out, &g).unwrap().iter().all(|&d| d == 0.0));
}

#[test]
fn tangent_matches_finite_difference_of_the_step() {
    let g = GridSpec::new(-5.0, 5.0, 0.1, 0.01).unwrap();
    let cfg = StepConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dw: Vec<f64> = (0..g.nodes()).map(|_| rng.random_range(-0.1..0.1)).collect();
    let cases = [
        (nls_system(NlsParameters::new(0.2, 0.7).unwrap()), RealGridState4::from_complex(&sech(&g), g.dx), BoundaryPins::nls()),
        (kdv_system(0.2, 0.3).unwrap(), kdv_initial(&g), BoundaryPins::kdv()),
    ];
    for (sys, z, pins) in cases {
        let dir = random_tangent(&mut rng, g.nodes(), &pins);
        let base = cms_step_generic(&sys, &z, &dw, &g, &pins, &cfg).unwrap();
        let lin = tangent_step(&sys, &z, &base, &TangentPair { u: dir.clone(), v: dir.clone() }, &dw, &g, &pins, &cfg)
            .unwrap()
            .u;
        let mut errors = Vec::new();
        for h in [1e-3, 5e-4] {
            let shifted = RealGridState4::new(z.z.iter().zip(&dir).map(|(a, b)| a + b * h).collect(), z.time);
            let moved = cms_step_generic(&sys, &shifted, &dw, &g, &pins, &cfg).unwrap();
            let err = moved
                .z
                .iter()
                .zip(&base.z)
                .zip(&lin)
                .map(|((m, b), l)| ((m - b) / h - l).amax())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[0] < 1e-2, "{errors:?}");
        // first order in h
        let ratio = errors[0] / errors[1];
        assert!(ratio > 1.6 && ratio < 2.4, "{errors:?}");
    }
}
