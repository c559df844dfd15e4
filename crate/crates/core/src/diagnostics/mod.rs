//! Validation against closed forms, and Monte Carlo hitting probabilities.
//!
//! On a quadratic potential the sampler is a linear-Gaussian chain, so the
//! law of every iterate is Gaussian and can be propagated exactly. That gives
//! the KL profile against the Gibbs law without any sampling noise.

mod empirical;
mod gaussian;
mod recursion;

pub use empirical::{empirical_probability, terminal_stats, EmpiricalProbabilityCurve, TerminalStats};
pub use gaussian::{gaussian_kl, gaussian_w2, BlockLaw, GaussianLaw};
pub use recursion::{
    gibbs_block, kl_decay_profile, law_recursion, spectral_radius, stationary_covariance, KlProfile,
};
