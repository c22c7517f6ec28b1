//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{box_oracle, max_diff, random_dw, random_state};
use conformal_ms::diagnostics::discrete_l2_error;
use conformal_ms::experiments::{
    run_convergence, run_plane_wave, run_soliton, run_two_form_audit, write_audit_csv, write_convergence_csv,
    write_plane_wave_csv, write_soliton_csv, AuditSystem, Experiment, ExperimentConfig, SolitonReport,
};
use conformal_ms::grid::{avg_t, avg_x, delta_t, delta_x};
use conformal_ms::hamiltonian::nls_system;
use conformal_ms::integrators::{
    cms_step_generic, cms_step_nls, ms_step_transformed, BoundaryPins, Closure, ComplexGridState, RealGridState4,
    StepConfig,
};
use conformal_ms::noise::{sample_path, NoiseModel};
use conformal_ms::{GridSpec, NlsParameters};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    /// Outside the advisory window but inside the hard bounds.
    Warn(String),
    Fail(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn close(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n = rng.random_range(4..=512);
        let mut draw = || -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let (z1, z0, s1, s0) = (draw(), draw(), draw(), draw());
        let c: f64 = rng.random_range(-2.0..2.0);
        let d: f64 = rng.random_range(-2.0..2.0);
        let dt: f64 = rng.random_range(0.5..1.0);
        let dx: f64 = rng.random_range(0.5..1.0);

        let a = delta_t(c, &avg_x(d, &z1, dx).unwrap(), &avg_x(d, &z0, dx).unwrap(), dt).unwrap();
        let b = avg_x(d, &delta_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        worst = worst.max(close(&a, &b));
        let a = delta_t(c, &delta_x(d, &z1, dx).unwrap(), &delta_x(d, &z0, dx).unwrap(), dt).unwrap();
        let b = delta_x(d, &delta_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        worst = worst.max(close(&a, &b));
        let a = avg_t(c, &avg_x(d, &z1, dx).unwrap(), &avg_x(d, &z0, dx).unwrap(), dt).unwrap();
        let b = avg_x(d, &avg_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        worst = worst.max(close(&a, &b));
        let a = avg_t(c, &delta_x(d, &z1, dx).unwrap(), &delta_x(d, &z0, dx).unwrap(), dt).unwrap();
        let b = delta_x(d, &avg_t(c, &z1, &z0, dt).unwrap(), dx).unwrap();
        worst = worst.max(close(&a, &b));

        let h = c / 2.0;
        let prod: Vec<f64> = z1.iter().zip(&s1).map(|(x, y)| x * y).collect();
        let lhs = delta_x(c, &prod, dx).unwrap();
        let (dp, ap) = (delta_x(h, &z1, dx).unwrap(), avg_x(h, &z1, dx).unwrap());
        let (ds, as_) = (delta_x(h, &s1, dx).unwrap(), avg_x(h, &s1, dx).unwrap());
        let rhs: Vec<f64> = (0..lhs.len()).map(|k| dp[k] * as_[k] + ap[k] * ds[k]).collect();
        worst = worst.max(close(&lhs, &rhs));

        let p1: Vec<f64> = z1.iter().zip(&s1).map(|(x, y)| x * y).collect();
        let p0: Vec<f64> = z0.iter().zip(&s0).map(|(x, y)| x * y).collect();
        let lhs = delta_t(c, &p1, &p0, dt).unwrap();
        let (dp, ap) = (delta_t(h, &z1, &z0, dt).unwrap(), avg_t(h, &z1, &z0, dt).unwrap());
        let (ds, as_) = (delta_t(h, &s1, &s0, dt).unwrap(), avg_t(h, &s1, &s0, dt).unwrap());
        let rhs: Vec<f64> = (0..lhs.len()).map(|k| dp[k] * as_[k] + ap[k] * ds[k]).collect();
        worst = worst.max(close(&lhs, &rhs));
    }
    let took = start.elapsed();
    verdict(
        worst <= 1e-13 && took < Duration::from_secs(5),
        format!("max deviation {worst:.2e} over 1000 arrays, {took:.2?}"),
    )
}

fn soliton(alpha: f64) -> SolitonReport {
    let mut cfg = ExperimentConfig::defaults(Experiment::SolitonChargeEnergy);
    cfg.alpha = alpha;
    cfg.n_trajectories = 10;
    cfg.t_final = 10.0;
    assert_eq!((cfg.dx, cfg.dt, cfg.epsilon, cfg.truncation_m), (0.1, 0.01, 0.5, 8));
    run_soliton(&cfg).expect("soliton run")
}

struct SolitonRuns {
    low: SolitonReport,
    high: SolitonReport,
    took: Duration,
}

fn criterion_2(runs: &SolitonRuns) -> Outcome {
    let worst = runs.low.max_ratio_error_cms.max(runs.high.max_ratio_error_cms);
    verdict(
        worst < 1e-9 && runs.took < Duration::from_secs(120) && runs.low.failures.is_empty() && runs.high.failures.is_empty(),
        format!("max relative ratio error {worst:.2e}, 1000 steps x 10 paths x 2 alphas in {:.2?}", runs.took),
    )
}

fn criterion_3(runs: &SolitonRuns) -> Outcome {
    let cms = |r: &SolitonReport| max_abs(&r.cms.charge_residual).max(r.max_path_residual_cms);
    let (cms_lo, cms_hi) = (cms(&runs.low), cms(&runs.high));
    let (cn_lo, cn_hi) = (max_abs(&runs.low.cn.charge_residual), max_abs(&runs.high.cn.charge_residual));
    verdict(
        cms_lo < 1e-9 && cms_hi < 1e-9 && cn_lo > 1e-6 && cn_hi > 1e-6 && cn_hi > cn_lo,
        format!("CMS {cms_lo:.2e}/{cms_hi:.2e}, CN {cn_lo:.2e}/{cn_hi:.2e} (alpha 0.02/0.1)"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0_f64;
    for system in [AuditSystem::Nls, AuditSystem::Kdv] {
        for seed in 0..5u64 {
            let mut cfg = ExperimentConfig::defaults(Experiment::TwoFormAudit);
            cfg.system = system;
            cfg.seed = 1000 + seed;
            cfg.n_trajectories = 1;
            cfg.t_final = 100.0 * cfg.dt;
            let r = run_two_form_audit(&cfg).expect("audit run");
            assert_eq!(r.defects.len(), 100);
            worst = worst.max(r.max_defect);
        }
    }
    verdict(worst <= 1e-9, format!("max defect {worst:.2e} over NLS and KdV, 5 seeds each, 100 steps"))
}

fn criterion_5(runs: &SolitonRuns) -> Outcome {
    let cms = runs.low.max_energy_defect_cms.max(runs.high.max_energy_defect_cms);
    let cn = runs.low.max_energy_defect_cn.max(runs.high.max_energy_defect_cn);
    verdict(cms < 1e-9 && cn > 1e-4, format!("CMS max defect {cms:.2e}, CN max defect {cn:.2e}"))
}

fn criterion_6() -> Outcome {
    let grid = GridSpec::new(-25.0, 25.0, 0.1, 0.01).unwrap();
    let cfg = StepConfig { theta: 1.0, ..StepConfig::default() };
    let mut worst = 0.0_f64;
    for seed in 0..5u64 {
        let p = NlsParameters::new(0.1, 0.5).unwrap();
        let path = sample_path(&NoiseModel::spectral(8, grid.x_left, grid.x_right, 600 + seed), &grid, 100).unwrap();
        let mut u = ComplexGridState::from_fn(&grid, Closure::Dirichlet, |x| Complex64::new(1.0 / x.cosh(), 0.0));
        let mut w = u.clone();
        for n in 0..100 {
            u = cms_step_nls(&u, &p, path.slice(n), &grid, &cfg).unwrap();
            w = ms_step_transformed(&w, &p, path.slice(n), &grid, &cfg).unwrap();
        }
        let back = (-p.alpha * w.time).exp();
        let mapped = ComplexGridState::new(w.u.iter().map(|v| v * back).collect(), w.time);
        worst = worst.max(discrete_l2_error(&u, &mapped, &grid).unwrap());
    }
    verdict(worst < 1e-8, format!("max L2 distance {worst:.2e} after 100 steps, 5 seeds"))
}

fn criterion_7() -> Outcome {
    let mut cfg = ExperimentConfig::defaults(Experiment::PlaneWave);
    cfg.n_trajectories = 200;
    cfg.t_final = 5.0;
    cfg.dt = 0.01;
    let r = run_plane_wave(&cfg).expect("plane wave run");
    let last = r.times.len() - 1;
    let (amp, phase) = (r.amp_err[last], r.phase_err[last]);
    verdict(
        amp <= 1e-12 && phase >= 1e-3 && r.trajectories_used == 200,
        format!("at T = {}: mean amplitude error {amp:.2e}, mean |phase error| {phase:.2e}", r.times[last]),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut slopes = Vec::new();
    for alpha in [0.0, 0.02, 0.1] {
        let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
        cfg.alpha = alpha;
        cfg.epsilon = 0.0;
        assert_eq!(cfg.reference_level, 12);
        assert_eq!(cfg.coarse_levels, vec![11, 10, 9, 8, 7, 6, 5]);
        slopes.push(run_convergence(&cfg).expect("convergence run").slope);
    }
    let took = start.elapsed();
    verdict(
        slopes.iter().all(|s| (1.8..=2.2).contains(s)) && took < Duration::from_secs(300),
        format!("slopes {:.3}/{:.3}/{:.3} (alpha 0/0.02/0.1), window [1.8, 2.2], {took:.2?}", slopes[0], slopes[1], slopes[2]),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::Convergence);
    cfg.alpha = 0.02;
    cfg.epsilon = 2f64.sqrt();
    cfg.n_trajectories = 100;
    cfg.per_m = vec![1, 8];
    let r = run_convergence(&cfg).expect("convergence run");
    let curves = r.per_m.expect("per-M curves");
    let slope = |m: usize| curves.iter().find(|c| c.m == m).expect("curve").slope;
    let (s1, s8) = (slope(1), slope(8));
    let took = start.elapsed();
    let detail = format!("slopes M=1 {s1:.3} (advisory [0.8, 1.2]), M=8 {s8:.3} (advisory [0.35, 0.7]), {took:.2?}");
    let hard = [s1, s8].iter().all(|s| (0.25..=1.5).contains(s)) && took < Duration::from_secs(1200);
    if !hard {
        Outcome::Fail(detail)
    } else if (0.8..=1.2).contains(&s1) && (0.35..=0.7).contains(&s8) {
        Outcome::Pass(detail)
    } else {
        Outcome::Warn(detail)
    }
}

fn criterion_10() -> Outcome {
    let grid = GridSpec::new(0.0, 1.0, 0.2, 0.05).unwrap();
    assert_eq!(grid.nodes(), 6);
    let cfg = StepConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let p = NlsParameters::new(rng.random_range(0.0..0.5), rng.random_range(0.0..1.5)).unwrap();
        let u = ComplexGridState::new(random_state(&mut rng, 6), 0.0);
        for _ in 0..5 {
            let dw = random_dw(&mut rng, 6, grid.dt);
            let reduced = cms_step_nls(&u, &p, &dw, &grid, &cfg).unwrap();
            let z = RealGridState4::from_complex(&u, grid.dx);
            let generic = cms_step_generic(&nls_system(p), &z, &dw, &grid, &BoundaryPins::nls(), &cfg).unwrap();
            let dense = box_oracle(&u.u, (-p.alpha * grid.dt).exp(), 1.0, p.epsilon, &dw, grid.dx, grid.dt);
            worst = worst
                .max(max_diff(&reduced.u, &dense))
                .max(max_diff(&generic.to_complex().u, &dense))
                .max(max_diff(&reduced.u, &generic.to_complex().u));
        }
    }
    verdict(worst < 1e-10, format!("max pairwise difference {worst:.2e} over 20 states x 5 draws"))
}

fn csv_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_11() -> Outcome {
    let run = |exp: Experiment| -> Vec<(String, Vec<u8>)> {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::defaults(exp);
        cfg.n_trajectories = 4;
        match exp {
            Experiment::PlaneWave => {
                cfg.t_final = 0.5;
                write_plane_wave_csv(dir.path(), &run_plane_wave(&cfg).unwrap()).unwrap();
            }
            Experiment::SolitonChargeEnergy => {
                cfg.t_final = 0.2;
                write_soliton_csv(dir.path(), &run_soliton(&cfg).unwrap()).unwrap();
            }
            Experiment::Convergence => {
                cfg.dx = 1.0 / 32.0;
                cfg.reference_level = 9;
                cfg.coarse_levels = vec![8, 6, 4];
                cfg.per_m = vec![1, 4];
                let r = run_convergence(&cfg).unwrap();
                write_convergence_csv(dir.path(), &r, cfg.truncation_m).unwrap();
            }
            Experiment::TwoFormAudit => {
                cfg.t_final = 0.1;
                write_audit_csv(dir.path(), &run_two_form_audit(&cfg).unwrap()).unwrap();
            }
        }
        csv_bytes(dir.path())
    };
    let mut files = 0;
    let mut mismatched = Vec::new();
    for exp in [Experiment::PlaneWave, Experiment::SolitonChargeEnergy, Experiment::Convergence, Experiment::TwoFormAudit] {
        let (a, b) = (run(exp), run(exp));
        files += a.len();
        if a != b {
            mismatched.push(exp.to_string());
        }
    }
    verdict(
        mismatched.is_empty() && files > 0,
        format!("{files} CSV files compared across 4 experiments, mismatched: {mismatched:?}"),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::Fail(format!("panicked: {msg}"))
    })
}

fn main() {
    let start = Instant::now();
    let runs: Result<SolitonRuns, String> = catch_unwind(|| {
        let t = Instant::now();
        let (low, high) = (soliton(0.02), soliton(0.1));
        SolitonRuns { low, high, took: t.elapsed() }
    })
    .map_err(|_| "soliton runs panicked".to_string());
    let with_runs = |f: fn(&SolitonRuns) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => guarded(|| f(r)),
            Err(msg) => Outcome::Fail(msg.clone()),
        }
    };

    let criteria: Vec<(&str, Outcome)> = vec![
        ("operator algebra", guarded(criterion_1)),
        ("charge dissipation ratio", with_runs(criterion_2)),
        ("charge residual CMS vs CN", with_runs(criterion_3)),
        ("two-form conservation", guarded(criterion_4)),
        ("energy recursion", with_runs(criterion_5)),
        ("theta = 1 equivalence", guarded(criterion_6)),
        ("plane wave", guarded(criterion_7)),
        ("deterministic convergence", guarded(criterion_8)),
        ("stochastic convergence", guarded(criterion_9)),
        ("oracle equivalence", guarded(criterion_10)),
        ("reproducibility", guarded(criterion_11)),
    ];

    println!();
    let mut failed = 0;
    for (k, (name, outcome)) in criteria.iter().enumerate() {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Warn(d) => ("WARN", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} [{name}]: {detail}", k + 1);
    }
    println!("acceptance: {} of {} criteria failed ({:.1?})", failed, criteria.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
