//! CSV artifacts. Numbers are written with Rust's shortest round-trip
//! formatting, so identical results give byte-identical files.

use std::fs;
use std::path::Path;

use super::ExperimentOutput;
use crate::diagnostics::KlProfile;
use crate::error::Result;

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e16)`.
pub(crate) fn num(v: f64) -> String {
    let m = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e16).contains(&m) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// `run, iteration, best_value`.
pub fn write_curves(path: &Path, out: &ExperimentOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "iteration", "best_value"])?;
    for rec in &out.records {
        for (k, v) in out.iterations.iter().zip(&rec.running_best) {
            w.write_record([rec.run.to_string(), k.to_string(), num(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `iteration, epsilon, p_hat`.
pub fn write_probabilities(path: &Path, out: &ExperimentOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "epsilon", "p_hat"])?;
    let curve = &out.curve;
    for (k, row) in curve.iterations.iter().zip(&curve.p_hat) {
        for (eps, p) in curve.epsilons.iter().zip(row) {
            w.write_record([k.to_string(), num(*eps), num(*p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `h, a_final, avg, median, sd, m, n, k, sampler`.
pub fn write_summary(path: &Path, out: &ExperimentOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h", "a_final", "avg", "median", "sd", "m", "n", "k", "sampler"])?;
    let s = &out.summary;
    w.write_record([
        num(s.h),
        num(s.a_final),
        num(s.stats.avg),
        num(s.stats.median),
        num(s.stats.sd),
        s.m.to_string(),
        s.n.to_string(),
        s.k.to_string(),
        s.sampler.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// `k, t, kl, floor_estimate`, with `t = k·h`.
pub fn write_kl_profile(path: &Path, profile: &KlProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "t", "kl", "floor_estimate"])?;
    let floor = num(profile.floor);
    for (k, kl) in profile.kl.iter().enumerate() {
        w.write_record([k.to_string(), num(k as f64 * profile.h), num(*kl), floor.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `curves.csv`, `probabilities.csv`, `summary.csv` and the resolved
/// `config.txt` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_curves(&dir.join("curves.csv"), out)?;
    write_probabilities(&dir.join("probabilities.csv"), out)?;
    write_summary(&dir.join("summary.csv"), out)?;
    fs::write(dir.join("config.txt"), out.config.to_string())?;
    Ok(())
}
