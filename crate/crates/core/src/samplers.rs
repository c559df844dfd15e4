//! Chain drivers: the high-resolution sampler, the two Langevin baselines
//! expressed as parameter specializations, and linear annealing of the
//! inverse temperature.

use crate::error::{Error, Result};
use crate::kernel::{ChainState, HrlaParams, KernelBasis, SamplerMode, TransitionKernel};
use crate::potentials::Potential;
use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution {
    /// `x ~ N(mean, variance·I)`; `y ~ N(0, momentum_variance·I)` if given,
    /// otherwise `y = 0`.
    Gaussian {
        mean: Vec<f64>,
        variance: f64,
        momentum_variance: Option<f64>,
    },
    /// `x = point`, `y = 0`.
    Dirac { point: Vec<f64> },
}

impl InitialDistribution {
    pub fn dimension(&self) -> usize {
        match self {
            Self::Gaussian { mean, .. } => mean.len(),
            Self::Dirac { point } => point.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian {
                mean,
                variance,
                momentum_variance,
            } => {
                if !(*variance > 0.0 && variance.is_finite()) {
                    return Err(Error::invalid("init", "gaussian variance must be positive"));
                }
                if let Some(v) = momentum_variance {
                    if !(*v > 0.0 && v.is_finite()) {
                        return Err(Error::invalid("init", "momentum variance must be positive"));
                    }
                }
                if mean.iter().any(|m| !m.is_finite()) {
                    return Err(Error::invalid("init", "mean must be finite"));
                }
            }
            Self::Dirac { point } => {
                if point.iter().any(|m| !m.is_finite()) {
                    return Err(Error::invalid("init", "point must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Draws the starting state. Position normals are drawn before momentum
    /// normals.
    pub fn sample(&self, rng: &mut RandomStream) -> ChainState {
        match self {
            Self::Gaussian {
                mean,
                variance,
                momentum_variance,
            } => {
                let sd = variance.sqrt();
                let x = mean.iter().map(|m| m + sd * rng.standard_normal()).collect::<Vec<_>>();
                let y = match momentum_variance {
                    Some(v) => {
                        let sd = v.sqrt();
                        (0..x.len()).map(|_| sd * rng.standard_normal()).collect()
                    }
                    None => vec![0.0; x.len()],
                };
                ChainState { x, y }
            }
            Self::Dirac { point } => ChainState::at_rest(point.clone()),
        }
    }
}

/// Affine ramp `a_k = ((K − k)·a_low + k·a_high)/K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealingSchedule {
    a_low: f64,
    a_high: f64,
    iterations: usize,
}

impl AnnealingSchedule {
    pub fn new(a_low: f64, a_high: f64, iterations: usize) -> Result<Self> {
        if !(a_low >= 0.0 && a_low.is_finite()) {
            return Err(Error::invalid("a_low", "must be finite and non-negative"));
        }
        if !(a_high > a_low && a_high.is_finite()) {
            return Err(Error::invalid("a_high", "must exceed a_low"));
        }
        if iterations == 0 {
            return Err(Error::invalid("k", "schedule needs at least one iteration"));
        }
        Ok(Self {
            a_low,
            a_high,
            iterations,
        })
    }

    pub fn a_low(&self) -> f64 {
        self.a_low
    }

    pub fn a_high(&self) -> f64 {
        self.a_high
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn at(&self, k: usize) -> f64 {
        let total = self.iterations as f64;
        let k = k as f64;
        ((total - k) * self.a_low + k * self.a_high) / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    /// Overdamped Langevin (Euler–Maruyama).
    Ola,
    /// Underdamped Langevin with the exact OU step.
    Ula,
}

/// Baseline samplers as specializations of [`HrlaParams`].
///
/// OLA keeps only the position channel: `β = 1`, `σx² = 1/a`,
/// `γ = σy² = 0`, so a step is `x′ = x − h∇U(x) + √(2h/a)·ξ`. ULA drops the
/// position channel: `β = σx² = 0`, `α = 1`, `σy² = 0.1`, `b = 10`,
/// `γ = a/10`.
pub fn make_baseline(kind: BaselineKind, a: f64, h: f64) -> Result<HrlaParams> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", format!("inverse temperature must be positive, got {a}")));
    }
    let params = match kind {
        BaselineKind::Ola => HrlaParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.0,
            a,
            b: 10.0,
            sigma_x2: 1.0 / a,
            sigma_y2: 0.0,
            h,
            mode: SamplerMode::OverdampedBaseline,
        },
        BaselineKind::Ula => HrlaParams {
            alpha: 1.0,
            beta: 0.0,
            gamma: a / 10.0,
            a,
            b: 10.0,
            sigma_x2: 0.0,
            sigma_y2: 0.1,
            h,
            mode: SamplerMode::UnderdampedBaseline,
        },
    };
    params.validate()?;
    Ok(params)
}

/// A single chain advanced one iteration at a time.
pub struct Chain<'a> {
    potential: &'a dyn Potential,
    params: HrlaParams,
    kernel: TransitionKernel,
    basis: KernelBasis,
    schedule: Option<AnnealingSchedule>,
    state: ChainState,
    rng: RandomStream,
    grad: Vec<f64>,
    noise: Vec<f64>,
    iteration: usize,
    gradient_evaluations: u64,
}

impl<'a> Chain<'a> {
    /// Draws the initial state from `init` using `rng`, then owns `rng` for
    /// the transitions.
    pub fn new(
        params: HrlaParams,
        potential: &'a dyn Potential,
        init: &InitialDistribution,
        mut rng: RandomStream,
        schedule: Option<AnnealingSchedule>,
    ) -> Result<Self> {
        let d = potential.dimension();
        if init.dimension() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: init.dimension(),
            });
        }
        init.validate()?;
        params.validate()?;
        let basis = KernelBasis::new(params.alpha, params.h);
        let kernel = TransitionKernel::from_basis(&basis, &params)?;
        let state = init.sample(&mut rng);
        Ok(Self {
            potential,
            params,
            kernel,
            basis,
            schedule,
            state,
            rng,
            grad: vec![0.0; d],
            noise: vec![0.0; 2 * d],
            iteration: 0,
            gradient_evaluations: 0,
        })
    }

    /// Performs iteration `k` and returns `U(x_k)`, the value at the point
    /// the gradient was taken.
    pub fn advance(&mut self) -> Result<f64> {
        let k = self.iteration;
        if let Some(schedule) = &self.schedule {
            let a_k = schedule.at(k);
            if !(a_k > 0.0) {
                return Err(Error::invalid("a_k", format!("non-positive inverse temperature {a_k} at iteration {k}")));
            }
            self.params = self.params.retuned(a_k)?;
            if !self.basis.matches(&self.params) {
                self.basis = KernelBasis::new(self.params.alpha, self.params.h);
            }
            self.kernel = TransitionKernel::from_basis(&self.basis, &self.params)?;
        }
        let value = self.kernel.advance(
            self.potential,
            &mut self.state,
            &mut self.grad,
            &mut self.noise,
            &mut self.rng,
        );
        self.gradient_evaluations += 1;
        self.iteration += 1;
        if !value.is_finite() || !self.state.is_finite() {
            return Err(Error::Diverged { iteration: k });
        }
        Ok(value)
    }

    /// `U` at the current position.
    pub fn current_value(&self) -> f64 {
        self.potential.value(&self.state.x)
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }

    pub fn params(&self) -> &HrlaParams {
        &self.params
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn gradient_evaluations(&self) -> u64 {
        self.gradient_evaluations
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub final_state: ChainState,
    /// `U(x_0), …, U(x_K)`.
    pub values: Vec<f64>,
}

/// Runs `iterations` transitions. With a schedule, the parameters are
/// re-derived from `a_k` (within the family given by `params.mode`, at step
/// size `params.h`) before every iteration.
pub fn run_chain(
    params: &HrlaParams,
    potential: &dyn Potential,
    init: &InitialDistribution,
    iterations: usize,
    stream: RandomStream,
    schedule: Option<&AnnealingSchedule>,
) -> Result<ChainRun> {
    if iterations == 0 {
        return Err(Error::invalid("k", "at least one iteration is required"));
    }
    if let Some(s) = schedule {
        if s.iterations() != iterations {
            return Err(Error::invalid(
                "schedule",
                format!("schedule spans {} iterations, run has {iterations}", s.iterations()),
            ));
        }
    }
    let mut chain = Chain::new(*params, potential, init, stream, schedule.copied())?;
    let mut values = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        values.push(chain.advance()?);
    }
    values.push(chain.current_value());
    Ok(ChainRun {
        final_state: chain.into_state(),
        values,
    })
}
