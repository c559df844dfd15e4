//! Protocols of the Rastrigin benchmarks, `d = 10`.
//!
//! Fixed-temperature protocols take the running best over every 100th
//! iterate (and the last); annealed protocols use every iterate.

use super::{ExperimentConfig, InitSpec, SamplerKind, Temperature};
use crate::error::{Error, Result};

pub const NAMES: &[&str] = &["table1", "figure2", "comparison", "table2", "table3"];

const FIXED_RECORD_STRIDE: usize = 100;

/// `M = 100, N = 10, K = 14000`, `N(3·1, 10·I)` start, fixed `a`.
pub fn table1(h: f64, a: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::rastrigin(10, 100, 10, 14_000, h, a);
    cfg.record_stride = FIXED_RECORD_STRIDE;
    cfg
}

/// Hitting-probability curves at fixed `a`, same protocol as `table1`.
pub fn figure2(a: f64) -> ExperimentConfig {
    let mut cfg = table1(0.01, a);
    cfg.epsilons = vec![0.25, 0.5, 1.0, 2.0, 4.0];
    cfg
}

/// `figure2` run with another sampler.
pub fn comparison(sampler: SamplerKind, a: f64) -> ExperimentConfig {
    let mut cfg = figure2(a);
    cfg.sampler = sampler;
    cfg
}

/// Annealing from `a = 0.1` at fixed effort `N·K = 140000`, `M = 20`.
pub fn table2(n: usize, a_high: f64) -> Result<ExperimentConfig> {
    if n == 0 || 140_000 % n != 0 {
        return Err(Error::invalid("n", "must divide 140000"));
    }
    let mut cfg = ExperimentConfig::rastrigin(10, 20, n, 140_000 / n, 0.01, a_high);
    cfg.temperature = Temperature::Linear { low: 0.1, high: a_high };
    cfg.epsilons = vec![0.1, 0.25, 0.5, 1.0];
    Ok(cfg)
}

/// `M = 50, N = 250, K = 500`, start at `(1, …, 1)`, annealing `0.1 → a_high`.
pub fn table3(a_high: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::rastrigin(10, 50, 250, 500, 0.01, a_high);
    cfg.temperature = Temperature::Linear { low: 0.1, high: a_high };
    cfg.init = InitSpec::Dirac { point: vec![1.0] };
    cfg.epsilons = vec![0.1, 0.25, 0.5, 1.0];
    cfg
}

/// Looks up a preset by name with its default parameters.
pub fn by_name(name: &str) -> Result<ExperimentConfig> {
    match name {
        "table1" => Ok(table1(0.01, 4.0)),
        "figure2" => Ok(figure2(4.0)),
        "comparison" => Ok(comparison(SamplerKind::Ola, 4.0)),
        "table2" => table2(10, 12.0),
        "table3" => Ok(table3(4.0)),
        other => Err(Error::invalid(
            "preset",
            format!("unknown preset '{other}' (one of {})", NAMES.join(", ")),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for name in NAMES {
            let cfg = by_name(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::parse(&cfg.to_string()).unwrap(), cfg, "{name}");
        }
        assert!(by_name("table4").is_err());
    }

    #[test]
    fn fixed_effort() {
        for n in [1, 10, 100, 1000, 10_000] {
            let cfg = table2(n, 4.0).unwrap();
            assert_eq!(cfg.n * cfg.k, 140_000);
        }
        assert!(table2(3, 4.0).is_err());
    }
}
