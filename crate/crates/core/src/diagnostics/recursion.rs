use nalgebra::{Matrix2, Vector2};

use super::gaussian::{gaussian_kl, BlockLaw};
use crate::error::{Error, Result};
use crate::kernel::{HrlaParams, TransitionKernel};

const STATIONARY_RESIDUAL: f64 = 1e-14;
const STATIONARY_MAX_ITER: usize = 50_000_000;

fn drift_and_noise(params: &HrlaParams, curvature: f64) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    if !(curvature > 0.0 && curvature.is_finite()) {
        return Err(Error::invalid("curvature", "must be positive"));
    }
    let kernel = TransitionKernel::new_unvalidated(params)?;
    let m = kernel.linear_drift(curvature);
    let s = kernel.covariance();
    Ok((
        Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]),
        Matrix2::new(s[0][0], s[0][1], s[1][0], s[1][1]),
    ))
}

/// Largest eigenvalue modulus of a real 2×2 matrix.
pub fn spectral_radius(m: &Matrix2<f64>) -> f64 {
    let half_trace = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let det = m.determinant();
    let disc = half_trace * half_trace - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (half_trace + r).abs().max((half_trace - r).abs())
    } else {
        det.sqrt()
    }
}

/// Exact laws of the chain on `U(x) = μ‖x‖²/2`:
/// `m ← M·m`, `S ← M·S·Mᵀ + Σ`. Returns `K + 1` laws starting with `init`.
///
/// The parameters are not required to satisfy the invariant-measure
/// relations, so degenerate (noiseless) chains can be analysed too.
pub fn law_recursion(params: &HrlaParams, curvature: f64, iterations: usize, init: &BlockLaw) -> Result<Vec<BlockLaw>> {
    let (m, sigma) = drift_and_noise(params, curvature)?;
    let radius = spectral_radius(&m);
    if !(radius < 1.0) {
        return Err(Error::UnstableStep { radius });
    }
    let mut laws = Vec::with_capacity(iterations + 1);
    let mut law = *init;
    laws.push(law);
    for _ in 0..iterations {
        law = BlockLaw {
            mean: m * law.mean,
            cov: m * law.cov * m.transpose() + sigma,
        };
        laws.push(law);
    }
    Ok(laws)
}

/// Fixed point of `S = M·S·Mᵀ + Σ`, by direct iteration until the update is
/// below `1e-14` (relative to `max(1, ‖S‖)`).
pub fn stationary_covariance(params: &HrlaParams, curvature: f64) -> Result<Matrix2<f64>> {
    let (m, sigma) = drift_and_noise(params, curvature)?;
    let radius = spectral_radius(&m);
    if !(radius < 1.0) {
        return Err(Error::UnstableStep { radius });
    }
    let mt = m.transpose();
    let mut s = sigma;
    for _ in 0..STATIONARY_MAX_ITER {
        let next = m * s * mt + sigma;
        let residual = (next - s).amax();
        s = next;
        if residual <= STATIONARY_RESIDUAL * s.amax().max(1.0) {
            return Ok(s);
        }
    }
    Err(Error::UnstableStep { radius })
}

/// Per-coordinate Gibbs law `N(0, diag(1/(aμ), 1/b))` of `exp(−aU(x) − b‖y‖²/2)`.
pub fn gibbs_block(a: f64, b: f64, curvature: f64) -> BlockLaw {
    BlockLaw::new([0.0, 0.0], [[1.0 / (a * curvature), 0.0], [0.0, 1.0 / b]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlProfile {
    pub h: f64,
    /// `KL(μ̃_kh‖μ^{a,b})` for `k = 0..=K`, summed over `d` coordinates.
    pub kl: Vec<f64>,
    /// KL of the exact stationary law of the discretized chain: the limit of
    /// the profile, i.e. the discretization bias floor.
    pub floor: f64,
    /// Number of leading iterations with `KL ≥ 10·floor`.
    pub pre_floor_len: usize,
    /// Least-squares slope of `ln KL` against `k` over the pre-floor segment.
    pub log_rate: Option<f64>,
    pub r_squared: Option<f64>,
}

impl KlProfile {
    /// Terminal value of the profile.
    pub fn terminal(&self) -> f64 {
        *self.kl.last().expect("profile has at least one entry")
    }
}

fn least_squares(ys: &[f64]) -> Option<(f64, f64)> {
    let n = ys.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean_x = (nf - 1.0) / 2.0;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mean_x;
        let dy = y - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}

/// KL profile of the exact chain laws against the Gibbs law, over a
/// `dimension`-fold product of identical coordinate blocks.
pub fn kl_decay_profile(
    params: &HrlaParams,
    curvature: f64,
    iterations: usize,
    init: &BlockLaw,
    dimension: usize,
) -> Result<KlProfile> {
    params.validate()?;
    let target = gibbs_block(params.a, params.b, curvature).to_gaussian()?;
    let d = dimension as f64;
    let laws = law_recursion(params, curvature, iterations, init)?;
    let kl = laws
        .iter()
        .map(|law| Ok(d * gaussian_kl(&law.to_gaussian()?, &target)?))
        .collect::<Result<Vec<_>>>()?;
    let stationary = BlockLaw {
        mean: Vector2::zeros(),
        cov: stationary_covariance(params, curvature)?,
    };
    let floor = d * gaussian_kl(&stationary.to_gaussian()?, &target)?;
    let pre_floor_len = kl.iter().take_while(|&&v| v >= 10.0 * floor).count();
    let logs: Vec<f64> = kl[..pre_floor_len].iter().map(|v| v.ln()).collect();
    let fit = least_squares(&logs);
    Ok(KlProfile {
        h: params.h,
        kl,
        floor,
        pre_floor_len,
        log_rate: fit.map(|f| f.0),
        r_squared: fit.map(|f| f.1),
    })
}
