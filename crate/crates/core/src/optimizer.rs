//! Sample-and-argmin global optimization, the sample-size / temperature
//! bounds that guarantee it, and the discretization constants of the
//! sampler's KL convergence bound.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{HrlaParams, SamplerMode};
use crate::potentials::Potential;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    /// Index of the selected sample (lowest index among ties).
    pub best_index: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// `U` of every sample, in index order.
    pub values: Vec<f64>,
}

/// Lowest-index argmin. NaN values never win.
pub fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if !(v < values[b]) => {}
            _ if v.is_nan() => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Draws `n` independent samples from `oracle` and returns the one with the
/// smallest potential value.
///
/// Sample `i` receives `RandomStream::substream(seed, run, i)`. The oracle is
/// invoked exactly `n` times, concurrently; the argmin is taken sequentially
/// over the index-ordered results, so the outcome does not depend on the
/// number of worker threads.
pub fn global_optimize<F>(
    oracle: F,
    potential: &dyn Potential,
    n: usize,
    seed: u64,
    run: u32,
) -> Result<OptimizeOutcome>
where
    F: Fn(usize, RandomStream) -> Result<Vec<f64>> + Sync,
{
    if n == 0 {
        return Err(Error::invalid("n", "at least one sample is required"));
    }
    let d = potential.dimension();
    let samples: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let stream = RandomStream::substream(seed, run, i as u32);
            let x = oracle(i, stream).map_err(|e| Error::OracleFailure {
                sample: i,
                source: Box::new(e),
            })?;
            if x.len() != d {
                return Err(Error::OracleFailure {
                    sample: i,
                    source: Box::new(Error::DimensionMismatch { expected: d, got: x.len() }),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::OracleFailure {
                    sample: i,
                    source: Box::new(Error::Diverged { iteration: 0 }),
                });
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = samples.iter().map(|x| potential.value(x)).collect();
    let best_index = argmin(&values).ok_or(Error::invalid("oracle", "no sample has a comparable value"))?;
    Ok(OptimizeOutcome {
        best_index,
        best_point: samples[best_index].clone(),
        best_value: values[best_index],
        values,
    })
}

/// Inputs of the sample-size and inverse-temperature bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRequest {
    /// Target accuracy `ε ∈ (0, 1/2)`.
    pub epsilon: f64,
    /// Failure probability `δ ∈ (0, 1)`.
    pub delta: f64,
    /// Concentration constant `C` of `W₂(μᵃ, μ*) ≤ C·a^{−1/4}`. Not
    /// computable in general; 1.0 is a reasonable exploratory default.
    pub concentration: f64,
    pub smoothness: f64,
    pub a0: f64,
    /// Log-Sobolev constant, when known.
    pub log_sobolev: Option<f64>,
}

impl BoundsRequest {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            concentration: 1.0,
            smoothness: 1.0,
            a0: 1.0,
            log_sobolev: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::invalid(
                "epsilon",
                format!(
                    "ε = {} is outside (0, 1/2); the upper limit is an artifact of the \
                     guarantee, so rescale U (e.g. by 1/(2ε)) and ask again",
                    self.epsilon
                ),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", format!("δ = {} is outside (0, 1)", self.delta)));
        }
        for (name, v) in [
            ("c", self.concentration),
            ("l", self.smoothness),
            ("a0", self.a0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(rho) = self.log_sobolev {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::invalid("rho", format!("must be positive, got {rho}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBounds {
    /// `⌈18 ln(1/δ)/ε²⌉`, at least 1.
    pub n_min: u64,
    /// `max(a₀, 9C⁴L²/ε²)`.
    pub a_min: f64,
}

/// Number of samples and inverse temperature that make
/// `P(U(X̃) − U* ≥ ε) ≤ δ` for an oracle with `KL(μ̃‖μᵃ) ≤ ε²/18`.
///
/// The oracle accuracy condition cannot be checked for nonconvex targets; it
/// is the caller's responsibility.
pub fn required_sample_count(req: &BoundsRequest) -> Result<SampleBounds> {
    req.validate()?;
    let eps2 = req.epsilon * req.epsilon;
    let n = (18.0 * (1.0 / req.delta).ln() / eps2).ceil();
    let ratio = req.concentration * req.concentration * req.smoothness / req.epsilon;
    let a = 9.0 * ratio * ratio;
    Ok(SampleBounds {
        n_min: (n as u64).max(1),
        a_min: req.a0.max(a),
    })
}

/// Constants of the discretized sampler's KL bound
/// `KL(μ̃_Kh‖μ^{a,b}) ≤ exp(−θKh/2)·KL₀ + 3B̂h/(4θ)`, valid for `h < h_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    /// `ρ·min(σx², σy²)`.
    pub theta: f64,
    /// `a²L²(σx⁴ + b⁻²) / (2 min(σx², σy²))`.
    pub tau: f64,
    /// `12 + 4β²L² + 4γ²L²`.
    pub a_const: f64,
    /// `2σx² + 12/b + 4β²L/a + 3σy² + 4γ²L/a`.
    pub b_const: f64,
    /// `2τB·d`.
    pub b_hat: f64,
    /// `min(1, 1/θ, √(θρ/(8τA)))`.
    pub h_max: f64,
}

pub fn theory_constants(params: &HrlaParams, rho: f64, smoothness: f64, d: usize) -> Result<TheoryConstants> {
    if params.mode != SamplerMode::Full {
        return Err(Error::invalid(
            "params",
            "theory constants need σx², σy² > 0 (full mode)",
        ));
    }
    params.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid("rho", "must be positive"));
    }
    if !(smoothness > 0.0 && smoothness.is_finite()) {
        return Err(Error::invalid("l", "must be positive"));
    }
    if d == 0 {
        return Err(Error::invalid("d", "dimension must be positive"));
    }
    let HrlaParams {
        beta,
        gamma,
        a,
        b,
        sigma_x2,
        sigma_y2,
        ..
    } = *params;
    let l = smoothness;
    let min_sigma = sigma_x2.min(sigma_y2);
    let theta = rho * min_sigma;
    let tau = a * a * l * l * (sigma_x2 * sigma_x2 + 1.0 / (b * b)) / (2.0 * min_sigma);
    let a_const = 12.0 + 4.0 * beta * beta * l * l + 4.0 * gamma * gamma * l * l;
    let b_const = 2.0 * sigma_x2 + 12.0 / b + 4.0 * beta * beta * l / a + 3.0 * sigma_y2 + 4.0 * gamma * gamma * l / a;
    let b_hat = 2.0 * tau * b_const * d as f64;
    let h_max = 1.0f64.min(1.0 / theta).min((theta * rho / (8.0 * tau * a_const)).sqrt());
    Ok(TheoryConstants {
        theta,
        tau,
        a_const,
        b_const,
        b_hat,
        h_max,
    })
}

/// Step size and iteration count sufficient for `KL(μ̃_Kh‖μ^{a,b}) ≤ ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlSchedule {
    /// Largest admissible step: the bias term `3B̂h/(4θ)` is at most `ε/2`
    /// and `h` does not exceed `h_max` (the bound needs `h` strictly below
    /// it, so in that case take any smaller value).
    pub h: f64,
    /// Smallest `K` with `exp(−θKh/2)·KL₀ ≤ ε/2`.
    pub iterations: u64,
}

impl TheoryConstants {
    pub fn kl_schedule(&self, target_kl: f64, initial_kl: f64) -> Result<KlSchedule> {
        if !(target_kl > 0.0 && target_kl.is_finite()) {
            return Err(Error::invalid("epsilon", "target KL must be positive"));
        }
        if !(initial_kl >= 0.0 && initial_kl.is_finite()) {
            return Err(Error::invalid("kl0", "initial KL must be finite and non-negative"));
        }
        let h = (2.0 * self.theta * target_kl / (3.0 * self.b_hat)).min(self.h_max);
        let ratio = 2.0 * initial_kl / target_kl;
        let iterations = if ratio <= 1.0 {
            1
        } else {
            ((2.0 / (self.theta * h)) * ratio.ln()).ceil().max(1.0) as u64
        };
        Ok(KlSchedule { h, iterations })
    }

    /// Right-hand side of the KL bound after `k` steps of size `h`.
    pub fn kl_bound(&self, h: f64, k: u64, initial_kl: f64) -> f64 {
        (-self.theta * k as f64 * h / 2.0).exp() * initial_kl + 3.0 * self.b_hat * h / (4.0 * self.theta)
    }
}
