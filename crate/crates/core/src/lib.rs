//! Global optimization of smooth nonconvex potentials by sampling their Gibbs
//! measures with a high-resolution Langevin sampler.
//!
//! The pieces, bottom up:
//!
//! * [`potentials`]: the objective `U` and built-in test functions.
//! * [`kernel`]: the exact Ornstein–Uhlenbeck transition of one step.
//! * [`samplers`]: chain drivers, baselines and annealing.
//! * [`optimizer`]: sample-and-argmin, sample-size bounds, theory constants.
//! * [`diagnostics`]: closed-form Gaussian validation and empirical
//!   hitting probabilities.
//! * [`harness`]: configuration, reproducible parallel Monte Carlo and CSV
//!   output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod optimizer;
pub mod potentials;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use kernel::{ChainState, HrlaParams, SamplerMode, TransitionKernel};
pub use potentials::{Potential, QuadraticPotential, Rastrigin};
pub use rng::RandomStream;
