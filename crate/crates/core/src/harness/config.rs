//! `key = value` experiment configuration.
//!
//! Keys are the `ExperimentConfig` field names. Lines starting with `#` and
//! trailing `# ...` are comments. Unknown or repeated keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::HrlaParams;
use crate::potentials::PotentialSpec;
use crate::samplers::{make_baseline, AnnealingSchedule, BaselineKind, InitialDistribution};

pub const KEYS: &[&str] = &[
    "potential",
    "d",
    "curvature",
    "m",
    "n",
    "k",
    "h",
    "a",
    "a_low",
    "a_high",
    "epsilons",
    "sampler",
    "init",
    "seed",
    "workers",
    "record_stride",
    "curve_stride",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Hrla,
    Ola,
    Ula,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Hrla => "hrla",
            Self::Ola => "ola",
            Self::Ula => "ula",
        }
    }

    /// Parameters at inverse temperature `a` and step `h`.
    pub fn params(self, a: f64, h: f64) -> Result<HrlaParams> {
        match self {
            Self::Hrla => HrlaParams::from_inverse_temperature(a, h),
            Self::Ola => make_baseline(BaselineKind::Ola, a, h),
            Self::Ula => make_baseline(BaselineKind::Ula, a, h),
        }
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hrla" => Ok(Self::Hrla),
            "ola" => Ok(Self::Ola),
            "ula" => Ok(Self::Ula),
            other => Err(Error::invalid("sampler", format!("unknown sampler '{other}' (hrla, ola, ula)"))),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fixed inverse temperature or a linear ramp from `low` to `high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Fixed(f64),
    Linear { low: f64, high: f64 },
}

impl Temperature {
    pub fn initial(&self) -> f64 {
        match *self {
            Self::Fixed(a) => a,
            Self::Linear { low, .. } => low,
        }
    }

    pub fn terminal(&self) -> f64 {
        match *self {
            Self::Fixed(a) => a,
            Self::Linear { high, .. } => high,
        }
    }
}

/// Starting law as written in a config: scalars broadcast to all coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Gaussian {
        mean: Vec<f64>,
        variance: f64,
        momentum_variance: Option<f64>,
    },
    Dirac {
        point: Vec<f64>,
    },
}

fn parse_vector(s: &str, key: &'static str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(key, format!("'{t}' is not a number")))
        })
        .collect()
}

fn parse_number(s: &str, key: &'static str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::invalid(key, format!("'{s}' is not a number")))
}

fn broadcast(v: &[f64], d: usize) -> Result<Vec<f64>> {
    match v.len() {
        1 => Ok(vec![v[0]; d]),
        n if n == d => Ok(v.to_vec()),
        n => Err(Error::DimensionMismatch { expected: d, got: n }),
    }
}

fn join(v: &[f64]) -> String {
    if !v.is_empty() && v.iter().all(|x| *x == v[0]) {
        return v[0].to_string();
    }
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl InitSpec {
    pub fn resolve(&self, d: usize) -> Result<InitialDistribution> {
        let init = match self {
            Self::Gaussian {
                mean,
                variance,
                momentum_variance,
            } => InitialDistribution::Gaussian {
                mean: broadcast(mean, d)?,
                variance: *variance,
                momentum_variance: *momentum_variance,
            },
            Self::Dirac { point } => InitialDistribution::Dirac {
                point: broadcast(point, d)?,
            },
        };
        init.validate()?;
        Ok(init)
    }
}

impl FromStr for InitSpec {
    type Err = Error;

    /// `gaussian <mean> <variance> [<momentum variance>]` or `dirac <point>`,
    /// where `<mean>` and `<point>` are a scalar or a comma list.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["gaussian", mean, var] => Ok(Self::Gaussian {
                mean: parse_vector(mean, "init")?,
                variance: parse_number(var, "init")?,
                momentum_variance: None,
            }),
            ["gaussian", mean, var, mvar] => Ok(Self::Gaussian {
                mean: parse_vector(mean, "init")?,
                variance: parse_number(var, "init")?,
                momentum_variance: Some(parse_number(mvar, "init")?),
            }),
            ["dirac", point] => Ok(Self::Dirac {
                point: parse_vector(point, "init")?,
            }),
            _ => Err(Error::invalid(
                "init",
                format!("expected 'gaussian <mean> <variance> [<momentum variance>]' or 'dirac <point>', got '{s}'"),
            )),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian {
                mean,
                variance,
                momentum_variance,
            } => {
                write!(f, "gaussian {} {}", join(mean), variance)?;
                if let Some(v) = momentum_variance {
                    write!(f, " {v}")?;
                }
                Ok(())
            }
            Self::Dirac { point } => write!(f, "dirac {}", join(point)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    /// Runs.
    pub m: usize,
    /// Samples per run.
    pub n: usize,
    /// Iterations per sample.
    pub k: usize,
    pub h: f64,
    pub temperature: Temperature,
    pub epsilons: Vec<f64>,
    pub sampler: SamplerKind,
    pub init: InitSpec,
    pub seed: u64,
    pub workers: usize,
    /// Iterates entering the running best: multiples of this stride, and `K`.
    pub record_stride: usize,
    /// Spacing of the iterations written to the curve outputs; `K` is always
    /// included.
    pub curve_stride: usize,
}

/// Curve spacing used when `curve_stride` is not given.
pub fn default_curve_stride(k: usize) -> usize {
    if k >= 10_000 {
        10
    } else {
        1
    }
}

impl ExperimentConfig {
    /// Fixed-temperature Rastrigin protocol with the defaults used throughout:
    /// `N(3·1, 10·I)` start, one worker, every iterate recorded.
    pub fn rastrigin(d: usize, m: usize, n: usize, k: usize, h: f64, a: f64) -> Self {
        Self {
            potential: PotentialSpec::Rastrigin { dimension: d },
            m,
            n,
            k,
            h,
            temperature: Temperature::Fixed(a),
            epsilons: vec![0.5, 1.0, 2.0, 4.0],
            sampler: SamplerKind::Hrla,
            init: InitSpec::Gaussian {
                mean: vec![3.0],
                variance: 10.0,
                momentum_variance: None,
            },
            seed: 1,
            workers: 1,
            record_stride: 1,
            curve_stride: default_curve_stride(k),
        }
    }

    pub fn dimension(&self) -> usize {
        self.potential.dimension()
    }

    pub fn schedule(&self) -> Result<Option<AnnealingSchedule>> {
        match self.temperature {
            Temperature::Fixed(_) => Ok(None),
            Temperature::Linear { low, high } => AnnealingSchedule::new(low, high, self.k).map(Some),
        }
    }

    /// Sampler parameters at the first iteration.
    pub fn initial_params(&self) -> Result<HrlaParams> {
        self.sampler.params(self.temperature.initial(), self.h)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("n", self.n),
            ("k", self.k),
            ("workers", self.workers),
            ("record_stride", self.record_stride),
            ("curve_stride", self.curve_stride),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if self.m > u32::MAX as usize || self.n > u32::MAX as usize {
            return Err(Error::invalid("m", "run and sample indices must fit in 32 bits"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid("h", "must be positive"));
        }
        match self.temperature {
            Temperature::Fixed(a) if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::invalid("a", "must be positive"));
            }
            _ => {}
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::invalid("epsilons", "must be non-negative numbers"));
        }
        if self.epsilons.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("epsilons", "must be sorted ascending"));
        }
        let potential = self.potential.build()?;
        if potential.known_minimum().is_none() {
            return Err(Error::invalid("potential", "needs a known minimum value"));
        }
        self.init.resolve(self.dimension())?;
        self.schedule()?;
        self.initial_params()?;
        self.sampler.params(self.temperature.terminal(), self.h)?;
        Ok(())
    }

    /// Parses and validates a config, reporting the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// As `parse`, with `key=value` overrides applied after the file.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                path: None,
                line: i + 1,
                reason: format!("expected 'key = value', got '{content}'"),
            })?;
            raw.insert(key.trim(), value.trim(), false).map_err(|reason| Error::Config {
                path: None,
                line: i + 1,
                reason,
            })?;
        }
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| Error::Config {
                path: None,
                line: 0,
                reason: format!("override '{o}' is not 'key=value'"),
            })?;
            raw.insert(key.trim(), value.trim(), true).map_err(|reason| Error::Config {
                path: None,
                line: 0,
                reason,
            })?;
        }
        let cfg = raw.build()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_overrides(path, &[])
    }

    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_with_overrides(&text, overrides).map_err(|e| match e {
            Error::Config { line, reason, .. } => Error::Config {
                path: Some(PathBuf::from(path)),
                line,
                reason,
            },
            other => other,
        })
    }
}

impl fmt::Display for ExperimentConfig {
    /// Round-trips through `parse`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "potential = {}", self.potential.name())?;
        writeln!(f, "d = {}", self.dimension())?;
        if let PotentialSpec::Quadratic { curvature, .. } = self.potential {
            writeln!(f, "curvature = {curvature}")?;
        }
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "h = {}", self.h)?;
        match self.temperature {
            Temperature::Fixed(a) => writeln!(f, "a = {a}")?,
            Temperature::Linear { low, high } => {
                writeln!(f, "a_low = {low}")?;
                writeln!(f, "a_high = {high}")?;
            }
        }
        let eps: Vec<String> = self.epsilons.iter().map(|e| e.to_string()).collect();
        writeln!(f, "epsilons = {}", eps.join(", "))?;
        writeln!(f, "sampler = {}", self.sampler)?;
        writeln!(f, "init = {}", self.init)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "record_stride = {}", self.record_stride)?;
        writeln!(f, "curve_stride = {}", self.curve_stride)
    }
}

#[derive(Default)]
struct RawConfig {
    values: Vec<(&'static str, String)>,
}

impl RawConfig {
    fn insert(&mut self, key: &str, value: &str, replace: bool) -> std::result::Result<(), String> {
        let key = *KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| format!("unknown key '{key}'"))?;
        if let Some(slot) = self.values.iter_mut().find(|(k, _)| *k == key) {
            if !replace {
                return Err(format!("key '{key}' given twice"));
            }
            slot.1 = value.to_string();
        } else {
            self.values.push((key, value.to_string()));
        }
        if replace {
            // A fixed temperature and a ramp are exclusive; an override of one
            // clears the other.
            let clear: &[&str] = match key {
                "a" => &["a_low", "a_high"],
                "a_low" | "a_high" => &["a"],
                _ => &[],
            };
            self.values.retain(|(k, _)| !clear.contains(k));
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &'static str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::invalid(key, "missing"))
    }

    fn parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::invalid(key, format!("cannot parse '{v}'")))
            })
            .transpose()
    }

    fn build(&self) -> Result<ExperimentConfig> {
        let d: usize = self.parse("d")?.ok_or_else(|| Error::invalid("d", "missing"))?;
        let curvature: f64 = self.parse("curvature")?.unwrap_or(1.0);
        let potential = PotentialSpec::from_name(self.require("potential")?, d, curvature)?;
        if self.get("curvature").is_some() && !matches!(potential, PotentialSpec::Quadratic { .. }) {
            return Err(Error::invalid("curvature", "only applies to the quadratic potential"));
        }
        let req = |key: &'static str| -> Result<usize> {
            self.parse(key)?.ok_or_else(|| Error::invalid(key, "missing"))
        };
        let (m, n, k) = (req("m")?, req("n")?, req("k")?);
        let h: f64 = self.parse("h")?.ok_or_else(|| Error::invalid("h", "missing"))?;
        let temperature = match (self.parse::<f64>("a")?, self.parse::<f64>("a_low")?, self.parse::<f64>("a_high")?) {
            (Some(a), None, None) => Temperature::Fixed(a),
            (None, Some(low), Some(high)) => Temperature::Linear { low, high },
            (Some(_), _, _) => return Err(Error::invalid("a", "give either a or a_low/a_high, not both")),
            (None, None, None) => return Err(Error::invalid("a", "missing (or a_low/a_high)")),
            _ => return Err(Error::invalid("a_low", "a_low and a_high go together")),
        };
        let epsilons = match self.get("epsilons") {
            Some(v) => parse_vector(v, "epsilons")?,
            None => vec![0.5, 1.0, 2.0, 4.0],
        };
        Ok(ExperimentConfig {
            potential,
            m,
            n,
            k,
            h,
            temperature,
            epsilons,
            sampler: self.parse("sampler")?.unwrap_or(SamplerKind::Hrla),
            init: self.parse("init")?.unwrap_or(InitSpec::Gaussian {
                mean: vec![3.0],
                variance: 10.0,
                momentum_variance: None,
            }),
            seed: self.parse("seed")?.unwrap_or(1),
            workers: self.parse("workers")?.unwrap_or(1),
            record_stride: self.parse("record_stride")?.unwrap_or(1),
            curve_stride: self.parse("curve_stride")?.unwrap_or_else(|| default_curve_stride(k)),
        })
    }
}
