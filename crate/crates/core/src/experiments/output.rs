//! Plot-ready CSV files. Floats carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{AuditReport, ConvergenceReport, FailureRecord, PlaneWaveReport, SolitonReport};
use crate::error::Result;

fn f(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_failures(dir: &Path, failures: &[FailureRecord]) -> Result<()> {
    let mut w = create(dir, "failures.csv")?;
    writeln!(w, "seed,trajectory,step,residual,message")?;
    for r in failures {
        writeln!(w, "{},{},{},{},\"{}\"", r.seed, r.trajectory, r.step, f(r.residual), r.message.replace('"', "'"))?;
    }
    w.flush()?;
    Ok(())
}

/// `amplitude.csv`, `phase.csv` and `failures.csv`.
pub fn write_plane_wave_csv(dir: &Path, r: &PlaneWaveReport) -> Result<()> {
    let mut w = create(dir, "amplitude.csv")?;
    writeln!(w, "t,amp_num,amp_exact,amp_err")?;
    for k in 0..r.times.len() {
        writeln!(w, "{},{},{},{}", f(r.times[k]), f(r.amp_num[k]), f(r.amp_exact[k]), f(r.amp_err[k]))?;
    }
    w.flush()?;
    let mut w = create(dir, "phase.csv")?;
    writeln!(w, "t,phase_num,phase_exact,phase_err")?;
    for k in 0..r.times.len() {
        writeln!(w, "{},{},{},{}", f(r.times[k]), f(r.phase_num[k]), f(r.phase_exact[k]), f(r.phase_err[k]))?;
    }
    w.flush()?;
    write_failures(dir, &r.failures)
}

/// `charge.csv`, `energy.csv` and `failures.csv`. Residual columns hold the
/// step that ends at `t` and are empty in the first row.
pub fn write_soliton_csv(dir: &Path, r: &SolitonReport) -> Result<()> {
    let mut w = create(dir, "charge.csv")?;
    writeln!(w, "t,Q_cms,Q_cn,Q_exact,r_cms,r_cn")?;
    for k in 0..r.cms.times.len() {
        let (rc, rn) = if k == 0 {
            (String::new(), String::new())
        } else {
            (f(r.cms.charge_residual[k - 1]), f(r.cn.charge_residual[k - 1]))
        };
        writeln!(w, "{},{},{},{},{},{}", f(r.cms.times[k]), f(r.cms.charge[k]), f(r.cn.charge[k]), f(r.q_exact[k]), rc, rn)?;
    }
    w.flush()?;
    let mut w = create(dir, "energy.csv")?;
    writeln!(w, "t,E_grad,E_quartic,E_noise_cum")?;
    for (t, e) in r.cms.times.iter().zip(&r.cms.energy) {
        writeln!(w, "{},{},{},{}", f(*t), f(e.grad), f(e.quartic), f(e.noise_cum))?;
    }
    w.flush()?;
    write_failures(dir, &r.failures)
}

/// `convergence.csv` with one row per `(M, Δt)` and one `slope` row per M.
pub fn write_convergence_csv(dir: &Path, r: &ConvergenceReport, default_m: usize) -> Result<()> {
    let mut w = create(dir, "convergence.csv")?;
    writeln!(w, "M,dt,error")?;
    let curves: Vec<(usize, &[f64], &[f64], f64)> = match &r.per_m {
        Some(cs) => cs.iter().map(|c| (c.m, c.dts.as_slice(), c.errors.as_slice(), c.slope)).collect(),
        None => vec![(default_m, r.dts.as_slice(), r.errors.as_slice(), r.slope)],
    };
    for (m, dts, errors, _) in &curves {
        for (dt, e) in dts.iter().zip(errors.iter()) {
            writeln!(w, "{m},{},{}", f(*dt), f(*e))?;
        }
    }
    for (m, _, _, slope) in &curves {
        writeln!(w, "{m},slope,{}", f(*slope))?;
    }
    w.flush()?;
    write_failures(dir, &r.failures)
}

/// `audit.csv` with the per-cell defect of every step.
pub fn write_audit_csv(dir: &Path, r: &AuditReport) -> Result<()> {
    let mut w = create(dir, "audit.csv")?;
    writeln!(w, "n,j,defect")?;
    for (n, row) in r.defects.iter().enumerate() {
        for (j, d) in row.iter().enumerate() {
            writeln!(w, "{n},{j},{}", f(*d))?;
        }
    }
    w.flush()?;
    write_failures(dir, &r.failures)
}
