//! Experiment orchestration: `M` independent runs, each drawing `N` chains of
//! `K` iterations and keeping the best value seen, aggregated into hitting
//! probabilities and summary statistics.
//!
//! Chain `(run, sample)` draws from `RandomStream::substream(seed, run,
//! sample)` and nothing else, so the output does not depend on how runs are
//! spread over workers.

mod config;
mod output;
pub mod presets;

use rayon::prelude::*;

pub use config::{default_curve_stride, ExperimentConfig, InitSpec, SamplerKind, Temperature, KEYS};
pub use output::{write_curves, write_kl_profile, write_outputs, write_probabilities, write_summary};

use crate::diagnostics::{empirical_probability, terminal_stats, EmpiricalProbabilityCurve, TerminalStats};
use crate::error::{Error, Result};
use crate::kernel::HrlaParams;
use crate::potentials::Potential;
use crate::rng::RandomStream;
use crate::samplers::{AnnealingSchedule, Chain, InitialDistribution};

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    /// Running best over the `N` chains at each curve iteration; nonincreasing.
    pub running_best: Vec<f64>,
    /// Running best at `K`.
    pub best_value: f64,
    pub best_sample: usize,
    pub best_iteration: usize,
    pub best_point: Vec<f64>,
    /// The argmin over the `N` terminal states `x_K`.
    pub final_sample: usize,
    pub final_value: f64,
    pub final_point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub h: f64,
    pub a_final: f64,
    pub stats: TerminalStats,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub sampler: SamplerKind,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    /// Iterations at which the curves are reported.
    pub iterations: Vec<usize>,
    pub records: Vec<RunRecord>,
    /// Hitting probabilities of `best − U* ≥ ε` at each curve iteration.
    pub curve: EmpiricalProbabilityCurve,
    pub summary: SummaryRow,
    pub gradient_evaluations: u64,
}

/// `0, s, 2s, …` and always `K`.
pub fn strided_iterations(k: usize, stride: usize) -> Vec<usize> {
    let mut its: Vec<usize> = (0..=k).step_by(stride.max(1)).collect();
    if its.last() != Some(&k) {
        its.push(k);
    }
    its
}

struct RunContext<'a> {
    cfg: &'a ExperimentConfig,
    potential: &'a dyn Potential,
    params: HrlaParams,
    schedule: Option<AnnealingSchedule>,
    init: InitialDistribution,
    curve_iterations: &'a [usize],
}

struct RunResult {
    record: RunRecord,
    gradient_evaluations: u64,
}

impl RunContext<'_> {
    fn is_checkpoint(&self, k: usize) -> bool {
        k.is_multiple_of(self.cfg.record_stride) || k == self.cfg.k
    }

    fn run(&self, run: usize) -> Result<RunResult> {
        let cfg = self.cfg;
        let d = self.potential.dimension();
        // Best over samples of U(x_k) at each iteration, infinite off checkpoints.
        let mut per_iteration = vec![f64::INFINITY; cfg.k + 1];
        let mut best = (f64::INFINITY, 0, 0, vec![0.0; d]);
        let mut last = (f64::INFINITY, 0, vec![0.0; d]);
        let mut scratch = vec![0.0; d];
        let mut gradient_evaluations = 0;
        for sample in 0..cfg.n {
            let stream = RandomStream::substream(cfg.seed, run as u32, sample as u32);
            let fail = |e: Error| Error::OracleFailure {
                sample,
                source: Box::new(e),
            };
            let mut chain = Chain::new(self.params, self.potential, &self.init, stream, self.schedule).map_err(fail)?;
            for (k, slot) in per_iteration[..cfg.k].iter_mut().enumerate() {
                if self.is_checkpoint(k) {
                    scratch.copy_from_slice(&chain.state().x);
                    let value = chain.advance().map_err(fail)?;
                    *slot = slot.min(value);
                    if value < best.0 {
                        best = (value, sample, k, scratch.clone());
                    }
                } else {
                    chain.advance().map_err(fail)?;
                }
            }
            let value = chain.current_value();
            if !value.is_finite() {
                return Err(fail(Error::Diverged { iteration: cfg.k }));
            }
            per_iteration[cfg.k] = per_iteration[cfg.k].min(value);
            if value < best.0 {
                best = (value, sample, cfg.k, chain.state().x.clone());
            }
            if value < last.0 {
                last = (value, sample, chain.state().x.clone());
            }
            gradient_evaluations += chain.gradient_evaluations();
        }
        let mut running = f64::INFINITY;
        let mut cursor = self.curve_iterations.iter().peekable();
        let mut running_best = Vec::with_capacity(self.curve_iterations.len());
        for (k, v) in per_iteration.iter().enumerate() {
            running = running.min(*v);
            if cursor.peek() == Some(&&k) {
                running_best.push(running);
                cursor.next();
            }
        }
        Ok(RunResult {
            record: RunRecord {
                run,
                running_best,
                best_value: best.0,
                best_sample: best.1,
                best_iteration: best.2,
                best_point: best.3,
                final_sample: last.1,
                final_value: last.0,
                final_point: last.2,
            },
            gradient_evaluations,
        })
    }
}

/// Runs the protocol described by `cfg` on the potential it names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let potential = cfg.potential.build()?;
    run_experiment_on(cfg, potential.as_ref())
}

/// Runs the protocol on a caller-supplied potential of dimension `d`. The
/// potential must report its known minimum.
pub fn run_experiment_on(cfg: &ExperimentConfig, potential: &dyn Potential) -> Result<ExperimentOutput> {
    cfg.validate()?;
    if potential.dimension() != cfg.dimension() {
        return Err(Error::DimensionMismatch {
            expected: cfg.dimension(),
            got: potential.dimension(),
        });
    }
    let u_star = potential
        .known_minimum()
        .ok_or_else(|| Error::invalid("potential", "needs a known minimum value"))?;
    let iterations = strided_iterations(cfg.k, cfg.curve_stride);
    let ctx = RunContext {
        cfg,
        potential,
        params: cfg.initial_params()?,
        schedule: cfg.schedule()?,
        init: cfg.init.resolve(cfg.dimension())?,
        curve_iterations: &iterations,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let results: Vec<RunResult> = pool.install(|| {
        (0..cfg.m)
            .into_par_iter()
            .map(|run| {
                ctx.run(run).map_err(|e| Error::RunFailure {
                    run,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let gradient_evaluations = results.iter().map(|r| r.gradient_evaluations).sum();
    let records: Vec<RunRecord> = results.into_iter().map(|r| r.record).collect();
    let traces: Vec<Vec<f64>> = records.iter().map(|r| r.running_best.clone()).collect();
    let curve = empirical_probability(&traces, &iterations, u_star, &cfg.epsilons)?;
    let gaps: Vec<f64> = records.iter().map(|r| r.best_value - u_star).collect();
    let summary = SummaryRow {
        h: cfg.h,
        a_final: cfg.temperature.terminal(),
        stats: terminal_stats(&gaps)?,
        m: cfg.m,
        n: cfg.n,
        k: cfg.k,
        sampler: cfg.sampler,
    };
    Ok(ExperimentOutput {
        config: cfg.clone(),
        iterations,
        records,
        curve,
        summary,
        gradient_evaluations,
    })
}
