//! Exact one-step transition of the high-resolution Langevin system.
//!
//! With the gradient frozen at the start of a step, the system
//!
//! ```text
//! dX = (−β∇U(X_kh) + Y) dt + √(2σx²) dBˣ
//! dY = (−γ∇U(X_kh) − αY) dt + √(2σy²) dBʸ
//! ```
//!
//! is an Ornstein–Uhlenbeck process on `[kh, (k+1)h]`, so `(X, Y)` at the end
//! of the step is Gaussian with a closed-form mean and covariance. The
//! covariance blocks are scalar multiples of the identity, which lets every
//! coordinate be sampled independently through one 2×2 Cholesky factor.

use crate::error::{Error, Result};
use crate::potentials::Potential;
use crate::rng::RandomStream;

/// `αh` below which the small-argument series are used.
pub const SERIES_THRESHOLD: f64 = 1e-3;

/// Slack allowed on the covariance determinant and on the Schur complement
/// before the block is declared indefinite.
const PSD_TOLERANCE: f64 = 1e-18;

const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerMode {
    /// Both noise channels active; the full high-resolution dynamics.
    Full,
    /// `β = σx² = 0`: kinetic (underdamped) Langevin with an exact OU step.
    UnderdampedBaseline,
    /// `γ = σy² = 0`: Euler–Maruyama for overdamped Langevin.
    OverdampedBaseline,
}

/// Parameters of the dynamics and its discretization.
///
/// The invariant measure is `exp(−aU(x) − b‖y‖²/2)` when
/// `a = β/σx²`, `b = α/σy²` and `a/b = γ`; [`validate`](Self::validate)
/// enforces whichever of these the mode requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrlaParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub sigma_x2: f64,
    pub sigma_y2: f64,
    pub h: f64,
    pub mode: SamplerMode,
}

fn close(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= REL_TOL * lhs.abs().max(rhs.abs())
}

impl HrlaParams {
    /// Full-mode parameters, validated.
    #[allow(clippy::too_many_arguments)]
    pub fn full(
        alpha: f64,
        beta: f64,
        gamma: f64,
        a: f64,
        b: f64,
        sigma_x2: f64,
        sigma_y2: f64,
        h: f64,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            a,
            b,
            sigma_x2,
            sigma_y2,
            h,
            mode: SamplerMode::Full,
        };
        p.validate()?;
        Ok(p)
    }

    /// The standard mapping from an inverse temperature: `α = β = 1`,
    /// `b = 10`, `γ = a/10`, `σx² = 1/a`, `σy² = 0.1`.
    pub fn from_inverse_temperature(a: f64, h: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("inverse temperature must be positive, got {a}")));
        }
        Self::full(1.0, 1.0, a / 10.0, a, 10.0, 1.0 / a, 0.1, h)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("a", self.a),
            ("b", self.b),
            ("sigma_x2", self.sigma_x2),
            ("sigma_y2", self.sigma_y2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::invalid("h", format!("step size must be positive, got {}", self.h)));
        }
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive in {:?} mode", self.mode)))
            }
        };
        let relation = |name: &'static str, lhs: f64, rhs: f64, what: &str| {
            if close(lhs, rhs) {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("{what} violated: {lhs} vs {rhs}")))
            }
        };
        match self.mode {
            SamplerMode::Full => {
                for (name, v) in fields {
                    positive(name, v)?;
                }
                relation("a", self.a, self.beta / self.sigma_x2, "a = β/σx²")?;
                relation("b", self.b, self.alpha / self.sigma_y2, "b = α/σy²")?;
                relation("gamma", self.a / self.b, self.gamma, "a/b = γ")?;
            }
            SamplerMode::UnderdampedBaseline => {
                if self.beta != 0.0 || self.sigma_x2 != 0.0 {
                    return Err(Error::invalid("beta", "underdamped baseline requires β = σx² = 0"));
                }
                for (name, v) in [("alpha", self.alpha), ("sigma_y2", self.sigma_y2), ("a", self.a), ("b", self.b)] {
                    positive(name, v)?;
                }
                relation("b", self.b, self.alpha / self.sigma_y2, "b = α/σy²")?;
                relation("gamma", self.a / self.b, self.gamma, "a/b = γ")?;
            }
            SamplerMode::OverdampedBaseline => {
                if self.gamma != 0.0 || self.sigma_y2 != 0.0 {
                    return Err(Error::invalid("gamma", "overdamped baseline requires γ = σy² = 0"));
                }
                for (name, v) in [("beta", self.beta), ("sigma_x2", self.sigma_x2), ("a", self.a)] {
                    positive(name, v)?;
                }
                relation("a", self.a, self.beta / self.sigma_x2, "a = β/σx²")?;
            }
        }
        Ok(())
    }

    /// Same family and step size at a different inverse temperature.
    pub fn retuned(&self, a: f64) -> Result<Self> {
        match self.mode {
            SamplerMode::Full => Self::from_inverse_temperature(a, self.h),
            SamplerMode::UnderdampedBaseline => crate::samplers::make_baseline(crate::samplers::BaselineKind::Ula, a, self.h),
            SamplerMode::OverdampedBaseline => crate::samplers::make_baseline(crate::samplers::BaselineKind::Ola, a, self.h),
        }
    }
}

/// Position/momentum pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ChainState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let s = Self { x, y };
        if !s.is_finite() {
            return Err(Error::invalid("state", "components must be finite"));
        }
        Ok(s)
    }

    /// `(x, 0)`.
    pub fn at_rest(x: Vec<f64>) -> Self {
        let y = vec![0.0; x.len()];
        Self { x, y }
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

// ---------------------------------------------------------------------------
// Coefficient functions of z = αh.

/// `(1 − e^{−z})/z`, equal to 1 at `z = 0`.
fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// `(e^{−z} − 1 + z)/z²`, equal to 1/2 at `z = 0`.
fn phi2(z: f64) -> f64 {
    if z < SERIES_THRESHOLD {
        0.5 + z * (-1.0 / 6.0 + z * (1.0 / 24.0 + z * (-1.0 / 120.0 + z / 720.0)))
    } else {
        (z + (-z).exp_m1()) / (z * z)
    }
}

/// Taylor series of `2z − e^{−2z} + 4e^{−z} − 3`, terms `z³` through `z⁶`.
pub fn bracket_series(z: f64) -> f64 {
    z * z * z * (2.0 / 3.0 + z * (-0.5 + z * (7.0 / 30.0 + z * (-1.0 / 12.0))))
}

/// `2z − e^{−2z} + 4e^{−z} − 3` from the exponentials.
///
/// The expression is `Θ(z³)` for small `z` while its terms are `O(1)`, so for
/// `z < 1` the exponential is computed and combined in double-double
/// arithmetic; above that `expm1` suffices.
pub fn bracket_direct(z: f64) -> f64 {
    if z >= 1.0 {
        return 2.0 * z - (-2.0 * z).exp_m1() + 4.0 * (-z).exp_m1();
    }
    let e1 = dd::exp_neg(z);
    let e2 = e1.mul(e1);
    dd::Dd::from(2.0 * z)
        .sub(e2)
        .add(e1.mul_f64(4.0))
        .add_f64(-3.0)
        .hi
}

/// `(2z − e^{−2z} + 4e^{−z} − 3)/z³`, equal to 2/3 at `z = 0`.
fn bracket_over_cube(z: f64) -> f64 {
    if z < SERIES_THRESHOLD {
        2.0 / 3.0 + z * (-0.5 + z * (7.0 / 30.0 + z * (-1.0 / 12.0)))
    } else {
        bracket_direct(z) / (z * z * z)
    }
}

mod dd {
    //! Minimal double-double arithmetic.

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    impl From<f64> for Dd {
        fn from(hi: f64) -> Self {
            Dd { hi, lo: 0.0 }
        }
    }

    impl Dd {
        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let (s, e) = quick_two_sum(s, e + t);
            let (hi, lo) = quick_two_sum(s, e + f);
            Dd { hi, lo }
        }

        pub fn sub(self, o: Dd) -> Dd {
            self.add(Dd { hi: -o.hi, lo: -o.lo })
        }

        pub fn add_f64(self, b: f64) -> Dd {
            self.add(Dd::from(b))
        }

        pub fn mul(self, o: Dd) -> Dd {
            let p = self.hi * o.hi;
            let e = self.hi.mul_add(o.hi, -p);
            let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
            Dd { hi, lo }
        }

        pub fn mul_f64(self, b: f64) -> Dd {
            self.mul(Dd::from(b))
        }

        pub fn div_f64(self, b: f64) -> Dd {
            let q1 = self.hi / b;
            let r = self.sub(Dd::from(q1).mul_f64(b));
            let q2 = r.hi / b;
            let (hi, lo) = quick_two_sum(q1, q2);
            Dd { hi, lo }
        }
    }

    /// `e^{−z}` for `0 ≤ z ≤ 1` by its Taylor series.
    pub fn exp_neg(z: f64) -> Dd {
        let mut sum = Dd::from(1.0);
        let mut term = Dd::from(1.0);
        for n in 1..40 {
            term = term.mul_f64(-z).div_f64(n as f64);
            sum = sum.add(term);
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        sum
    }
}

// ---------------------------------------------------------------------------

/// The transcendental functions of `z = αh` shared by every kernel with the
/// same `α` and `h`. Annealing changes only `a`, so chains keep one basis and
/// rebuild the cheap linear part each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBasis {
    alpha: f64,
    h: f64,
    decay: f64,
    phi1: f64,
    phi1_double: f64,
    phi2: f64,
    bracket_over_cube: f64,
}

impl KernelBasis {
    pub fn new(alpha: f64, h: f64) -> Self {
        let z = alpha * h;
        Self {
            alpha,
            h,
            decay: (-z).exp(),
            phi1: phi1(z),
            phi1_double: phi1(2.0 * z),
            phi2: phi2(z),
            bracket_over_cube: bracket_over_cube(z),
        }
    }

    pub fn matches(&self, params: &HrlaParams) -> bool {
        self.alpha == params.alpha && self.h == params.h
    }
}

/// Per-step coefficients, fixed for a given [`HrlaParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    /// `e^{−αh}`.
    pub decay: f64,
    /// `(1 − e^{−αh})/α`.
    pub momentum_gain: f64,
    /// `(γ/α)(h − (1 − e^{−αh})/α)`.
    pub drift: f64,
    /// `βh`.
    pub beta_h: f64,
    /// `(γ/α)(1 − e^{−αh})`.
    pub momentum_drift: f64,
    pub sigma_xx: f64,
    pub sigma_yy: f64,
    pub sigma_xy: f64,
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl TransitionKernel {
    /// Validates `params` for its mode, then builds the kernel.
    pub fn new(params: &HrlaParams) -> Result<Self> {
        params.validate()?;
        Self::new_unvalidated(params)
    }

    /// Builds the kernel without checking the invariant-measure relations
    /// between the parameters (only finiteness and positive semidefiniteness
    /// are enforced). Useful for degenerate analyses such as the noiseless
    /// recursion.
    pub fn new_unvalidated(params: &HrlaParams) -> Result<Self> {
        Self::from_basis(&KernelBasis::new(params.alpha, params.h), params)
    }

    /// Builds the kernel from precomputed `(α, h)` functions. `basis` must
    /// have been computed for `params.alpha` and `params.h`.
    pub fn from_basis(basis: &KernelBasis, params: &HrlaParams) -> Result<Self> {
        debug_assert!(basis.matches(params));
        let HrlaParams {
            beta,
            gamma,
            sigma_x2,
            sigma_y2,
            h,
            ..
        } = *params;
        let decay = basis.decay;
        let momentum_gain = h * basis.phi1;
        let drift = gamma * h * h * basis.phi2;
        let momentum_drift = gamma * h * basis.phi1;

        let sigma_yy = sigma_y2 * 2.0 * h * basis.phi1_double;
        let sigma_xy = sigma_y2 * momentum_gain * momentum_gain;
        let sigma_xx = sigma_y2 * h * h * h * basis.bracket_over_cube + 2.0 * sigma_x2 * h;

        let named = [
            ("decay", decay),
            ("momentum_gain", momentum_gain),
            ("drift", drift),
            ("momentum_drift", momentum_drift),
            ("sigma_xx", sigma_xx),
            ("sigma_yy", sigma_yy),
            ("sigma_xy", sigma_xy),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(Error::NonFiniteCoefficient { name });
            }
        }

        let determinant = sigma_xx * sigma_yy - sigma_xy * sigma_xy;
        if sigma_xx < 0.0 || sigma_yy < 0.0 || determinant < -PSD_TOLERANCE {
            return Err(Error::IndefiniteCovariance { determinant });
        }

        let l11 = sigma_xx.sqrt();
        let l21 = if l11 > 0.0 { sigma_xy / l11 } else { 0.0 };
        let mut schur = sigma_yy - l21 * l21;
        if schur < 0.0 {
            if schur < -PSD_TOLERANCE {
                return Err(Error::IndefiniteCovariance { determinant });
            }
            schur = 0.0;
        }
        let l22 = schur.sqrt();

        Ok(Self {
            decay,
            momentum_gain,
            drift,
            beta_h: beta * h,
            momentum_drift,
            sigma_xx,
            sigma_yy,
            sigma_xy,
            l11,
            l21,
            l22,
        })
    }

    /// Whether the momentum receives independent noise (`ℓ₂₂ ≠ 0`).
    fn momentum_noise(&self) -> bool {
        self.l22 != 0.0
    }

    /// Advances `state` by one step in place and returns `U` at the starting
    /// position. `grad` and `noise` are scratch buffers of length `d` and
    /// `2d`. Normals are drawn as all `ξ` first, then all `η`; the `η` block
    /// is skipped when the momentum carries no independent noise.
    ///
    /// Exactly one gradient evaluation. The caller is responsible for
    /// checking the result for divergence.
    pub fn advance(
        &self,
        potential: &dyn Potential,
        state: &mut ChainState,
        grad: &mut [f64],
        noise: &mut [f64],
        rng: &mut RandomStream,
    ) -> f64 {
        let d = state.x.len();
        let value = potential.value_and_gradient(&state.x, grad);
        let (xi, eta) = noise.split_at_mut(d);
        rng.fill_standard_normal(xi);
        let eta = &mut eta[..d];
        if self.momentum_noise() {
            rng.fill_standard_normal(eta);
        } else {
            eta.fill(0.0);
        }
        let grad_x = self.beta_h + self.drift;
        for i in 0..d {
            let (x, y, g) = (state.x[i], state.y[i], grad[i]);
            state.x[i] = x + self.momentum_gain * y - grad_x * g + self.l11 * xi[i];
            state.y[i] = self.decay * y - self.momentum_drift * g + self.l21 * xi[i] + self.l22 * eta[i];
        }
        value
    }

    /// One transition from `state`, returning the new state.
    pub fn step(
        &self,
        potential: &dyn Potential,
        state: &ChainState,
        rng: &mut RandomStream,
    ) -> Result<ChainState> {
        let d = potential.dimension();
        if state.x.len() != d || state.y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: state.x.len(),
            });
        }
        let mut next = state.clone();
        let mut grad = vec![0.0; d];
        let mut noise = vec![0.0; 2 * d];
        self.advance(potential, &mut next, &mut grad, &mut noise, rng);
        if !next.is_finite() {
            return Err(Error::Diverged { iteration: 0 });
        }
        Ok(next)
    }

    /// One-step drift matrix for a quadratic `U(x) = μ‖x‖²/2`, acting on a
    /// single `(x, y)` coordinate pair.
    pub fn linear_drift(&self, curvature: f64) -> [[f64; 2]; 2] {
        [
            [1.0 - (self.beta_h + self.drift) * curvature, self.momentum_gain],
            [-self.momentum_drift * curvature, self.decay],
        ]
    }

    /// Per-coordinate covariance block `[[Σxx, Σxy], [Σxy, Σyy]]`.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        [[self.sigma_xx, self.sigma_xy], [self.sigma_xy, self.sigma_yy]]
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::potentials::{rastrigin, QuadraticPotential};

    fn section6(a: f64, h: f64) -> HrlaParams {
        HrlaParams::from_inverse_temperature(a, h).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from the closed forms evaluated at 40 significant
    // digits (mpmath), α = 1, h = 0.01, σy² = 0.1, σx² = 0.25.
    #[test]
    fn coefficients_match_extended_precision() {
        let k = TransitionKernel::new(&section6(4.0, 0.01)).unwrap();
        assert!(rel(k.sigma_yy, 1.980_132_669_324_469_8e-3) < 1e-14);
        assert!(rel(k.sigma_xy, 9.900_580_841_919_507e-6) < 1e-14);
        assert!(rel(k.sigma_xx, 5.000_066_168_991_691e-3) < 1e-14);
    }

    #[test]
    fn sigma_xx_sweep_matches_extended_precision() {
        // σy² = 0.1, σx² = 0.25 with α varied independently of the mapping.
        let cases = [
            (0.1, 1e-5, 5.000_000_000_066_666_6e-6),
            (0.1, 1e-3, 5.000_000_666_616_669e-4),
            (0.1, 1e-1, 5.006_616_899_169_121e-2),
            (1.0, 1e-5, 5.000_000_000_066_666e-6),
            (1.0, 1e-3, 5.000_000_666_166_9e-4),
            (1.0, 1e-1, 5.006_189_190_658_564e-2),
            (10.0, 1e-5, 5.000_000_000_066_662e-6),
            (10.0, 1e-3, 5.000_000_661_689_917e-4),
            (10.0, 1e-1, 5.003_361_824_814_492e-2),
        ];
        for (alpha, h, expected) in cases {
            let p = HrlaParams {
                alpha,
                beta: 1.0,
                gamma: 0.4,
                a: 4.0,
                b: alpha / 0.1,
                sigma_x2: 0.25,
                sigma_y2: 0.1,
                h,
                mode: SamplerMode::Full,
            };
            let k = TransitionKernel::new_unvalidated(&p).unwrap();
            assert!(rel(k.sigma_xx, expected) < 1e-13, "α={alpha} h={h}: {} vs {expected}", k.sigma_xx);
        }
    }

    #[test]
    fn overdamped_noise_only_on_position() {
        let p = crate::samplers::make_baseline(crate::samplers::BaselineKind::Ola, 4.0, 0.01).unwrap();
        let k = TransitionKernel::new(&p).unwrap();
        assert!(rel(k.sigma_xx, 5e-3) < 1e-15);
        assert_eq!(k.sigma_yy, 0.0);
        assert_eq!(k.sigma_xy, 0.0);
        assert_eq!((k.l21, k.l22), (0.0, 0.0));
    }

    #[test]
    fn series_and_direct_agree_at_crossover() {
        for eps in [1e-9, 1e-6, 1e-3] {
            let below = SERIES_THRESHOLD * (1.0 - eps);
            let above = SERIES_THRESHOLD * (1.0 + eps);
            let series_below = bracket_series(below);
            let direct_above = bracket_direct(above);
            // Compare both routes at the same point as well.
            assert!(rel(bracket_direct(below), series_below) <= 1e-10);
            assert!(rel(bracket_series(above), direct_above) <= 1e-10);
            // And across the threshold, after removing the smooth growth.
            let scaled_below = series_below / below.powi(3);
            let scaled_above = direct_above / above.powi(3);
            assert!(rel(scaled_below, scaled_above) <= 1e-10 + 2.0 * eps);
        }
    }

    #[test]
    fn bracket_direct_is_accurate_over_range() {
        // mpmath reference values of 2z − e^{−2z} + 4e^{−z} − 3.
        let cases = [
            (2e-3, 5.325_340_794_669_814e-9),
            (1e-2, 6.616_899_169_120_748e-7),
            (0.5, 5.824_319_767_909_137e-2),
        ];
        for (z, expected) in cases {
            assert!(rel(bracket_direct(z), expected) < 1e-14, "z={z}");
        }
    }

    #[test]
    fn cholesky_reconstructs_covariance() {
        for alpha in [0.1, 1.0, 10.0] {
            for h in [1e-5, 1e-4, 1e-3, 1e-2, 1e-1] {
                for mode in [SamplerMode::Full, SamplerMode::UnderdampedBaseline] {
                    let p = match mode {
                        SamplerMode::Full => HrlaParams::full(alpha, 1.0, 0.4, 4.0, 10.0, 0.25, alpha / 10.0, h).unwrap(),
                        _ => HrlaParams {
                            beta: 0.0,
                            sigma_x2: 0.0,
                            mode,
                            ..HrlaParams::full(alpha, 1.0, 0.4, 4.0, 10.0, 0.25, alpha / 10.0, h).unwrap()
                        },
                    };
                    let k = TransitionKernel::new(&p).unwrap();
                    assert!(k.sigma_xx >= 0.0 && k.sigma_yy >= 0.0);
                    assert!(k.sigma_xx * k.sigma_yy - k.sigma_xy * k.sigma_xy >= -1e-18);
                    assert!(rel(k.l11 * k.l11, k.sigma_xx) <= 1e-12);
                    assert!(rel(k.l11 * k.l21, k.sigma_xy) <= 1e-12);
                    assert!(rel(k.l21 * k.l21 + k.l22 * k.l22, k.sigma_yy) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn pure_noise_step_has_zero_mean_shift() {
        // At the Rastrigin minimizer with y = 0 the mean stays put.
        let p = rastrigin(3).unwrap();
        let k = TransitionKernel::new(&section6(4.0, 0.01)).unwrap();
        let mut state = ChainState::at_rest(vec![0.0; 3]);
        let mut grad = vec![0.0; 3];
        let mut noise = vec![0.0; 6];
        let mut rng = RandomStream::substream(3, 0, 0);
        let mut rng2 = rng.clone();
        k.advance(&p, &mut state, &mut grad, &mut noise, &mut rng);
        let mut draws = vec![0.0; 6];
        rng2.fill_standard_normal(&mut draws);
        for i in 0..3 {
            assert_eq!(state.x[i], k.l11 * draws[i]);
            assert_eq!(state.y[i], k.l21 * draws[i] + k.l22 * draws[3 + i]);
        }
    }

    #[test]
    fn step_is_deterministic() {
        let p = rastrigin(5).unwrap();
        let k = TransitionKernel::new(&section6(2.0, 0.01)).unwrap();
        let s = ChainState::new(vec![0.3, -1.2, 2.0, 0.0, 0.7], vec![0.1; 5]).unwrap();
        let a = k.step(&p, &s, &mut RandomStream::substream(9, 1, 2)).unwrap();
        let b = k.step(&p, &s, &mut RandomStream::substream(9, 1, 2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_step_descends_quadratic() {
        let params = HrlaParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.4,
            a: 4.0,
            b: 10.0,
            sigma_x2: 0.0,
            sigma_y2: 0.0,
            h: 0.01,
            mode: SamplerMode::Full,
        };
        let k = TransitionKernel::new_unvalidated(&params).unwrap();
        assert_eq!((k.l11, k.l21, k.l22), (0.0, 0.0, 0.0));
        let q = QuadraticPotential::isotropic(1.0, 2).unwrap();
        let mut state = ChainState::at_rest(vec![1.5, -0.5]);
        let mut rng = RandomStream::substream(0, 0, 0);

        // Deterministic recursion run independently as the oracle.
        let (e, c1) = ((-0.01f64).exp(), 1.0 - (-0.01f64).exp());
        let (mut ox, mut oy) = (vec![1.5, -0.5], vec![0.0, 0.0]);
        let mut previous = q.value(&state.x);
        for _ in 0..100 {
            state = k.step(&q, &state, &mut rng).unwrap();
            for i in 0..2 {
                let g = ox[i];
                let nx = ox[i] - 0.01 * g + c1 * oy[i] - 0.4 * (0.01 - c1) * g;
                let ny = e * oy[i] - 0.4 * c1 * g;
                ox[i] = nx;
                oy[i] = ny;
                assert!((state.x[i] - ox[i]).abs() < 1e-13);
                assert!((state.y[i] - oy[i]).abs() < 1e-13);
            }
            let u = q.value(&state.x);
            assert!(u <= previous);
            previous = u;
        }
    }

    #[test]
    fn validation_rejects_broken_relations() {
        assert!(HrlaParams::full(1.0, 1.0, 0.4, 4.0, 10.0, 0.3, 0.1, 0.01).is_err());
        assert!(HrlaParams::full(1.0, 1.0, 0.5, 4.0, 10.0, 0.25, 0.1, 0.01).is_err());
        assert!(HrlaParams::full(1.0, 1.0, 0.4, 4.0, 10.0, 0.25, 0.1, 0.0).is_err());
        assert!(HrlaParams::from_inverse_temperature(0.0, 0.01).is_err());
        let mut p = section6(4.0, 0.01);
        p.mode = SamplerMode::OverdampedBaseline;
        assert!(p.validate().is_err());
    }

    #[test]
    fn diverged_step_is_reported() {
        let q = QuadraticPotential::isotropic(1.0, 1).unwrap();
        let k = TransitionKernel::new(&section6(4.0, 0.01)).unwrap();
        let s = ChainState { x: vec![f64::MAX], y: vec![f64::MAX] };
        let err = k.step(&q, &s, &mut RandomStream::substream(0, 0, 0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }
}
