//! Potentials `U: R^d -> R` and the built-in test functions.
//!
//! Implementors must be twice differentiable with a Lipschitz, bounded
//! Hessian. That assumption is not checked here; it is the caller's
//! obligation for user-supplied potentials.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub trait Potential: Send + Sync {
    fn dimension(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    /// Writes `∇U(x)` into `grad` and returns `U(x)`.
    ///
    /// The default calls [`value`](Self::value) and
    /// [`gradient`](Self::gradient) separately; implementors that share work
    /// between the two should override it.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(x, grad);
        self.value(x)
    }

    /// Global minimum value `U*`, when known.
    fn known_minimum(&self) -> Option<f64> {
        None
    }

    /// Smoothness constant `L` (an upper bound on the Hessian norm).
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Inverse temperature `a₀` above which `exp(-aU)` is integrable.
    fn integrability_threshold(&self) -> f64 {
        1.0
    }
}

/// Evaluates `U(x)` after checking the dimension and finiteness of `x`.
pub fn evaluate(p: &dyn Potential, x: &[f64]) -> Result<f64> {
    check_point(p.dimension(), x)?;
    Ok(p.value(x))
}

/// Gradient counterpart of [`evaluate`].
pub fn evaluate_gradient(p: &dyn Potential, x: &[f64]) -> Result<Vec<f64>> {
    check_point(p.dimension(), x)?;
    let mut g = vec![0.0; x.len()];
    p.gradient(x, &mut g);
    Ok(g)
}

fn check_point(dimension: usize, x: &[f64]) -> Result<()> {
    if x.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    Ok(())
}

/// `U(x) = d + ‖x‖² − Σ cos(2π xᵢ)`, minimized at the origin with `U* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rastrigin {
    dimension: usize,
}

/// Upper estimate of `sup |∂²U/∂xᵢ²| = 2 + 4π²` for the Rastrigin function.
pub const RASTRIGIN_SMOOTHNESS: f64 = 2.0 + 4.0 * PI * PI;

pub fn rastrigin(d: usize) -> Result<Rastrigin> {
    Rastrigin::new(d)
}

impl Rastrigin {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("d", "dimension must be positive"));
        }
        Ok(Self { dimension })
    }
}

impl Potential for Rastrigin {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut u = self.dimension as f64;
        for &xi in x {
            u += xi * xi - (2.0 * PI * xi).cos();
        }
        u
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for (g, &xi) in grad.iter_mut().zip(x) {
            *g = 2.0 * xi + 2.0 * PI * (2.0 * PI * xi).sin();
        }
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut u = self.dimension as f64;
        for (g, &xi) in grad.iter_mut().zip(x) {
            let (s, c) = (2.0 * PI * xi).sin_cos();
            u += xi * xi - c;
            *g = 2.0 * xi + 2.0 * PI * s;
        }
        u
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }

    fn smoothness(&self) -> Option<f64> {
        Some(RASTRIGIN_SMOOTHNESS)
    }
}

/// Isotropic quadratic `U(x) = μ‖x − c‖²/2`. Its Gibbs measure at inverse
/// temperature `a` is `N(c, I/(aμ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPotential {
    curvature: f64,
    center: Vec<f64>,
}

impl QuadraticPotential {
    pub fn new(curvature: f64, center: Vec<f64>) -> Result<Self> {
        if !(curvature > 0.0 && curvature.is_finite()) {
            return Err(Error::invalid("curvature", "must be positive and finite"));
        }
        if center.is_empty() {
            return Err(Error::invalid("center", "dimension must be positive"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("center", "components must be finite"));
        }
        Ok(Self { curvature, center })
    }

    /// Centered at the origin.
    pub fn isotropic(curvature: f64, dimension: usize) -> Result<Self> {
        Self::new(curvature, vec![0.0; dimension])
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Potential for QuadraticPotential {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let sq: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum();
        0.5 * self.curvature * sq
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.center) {
            *g = self.curvature * (xi - ci);
        }
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.curvature)
    }
}

/// Built-in potentials addressable by name in experiment configs.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Rastrigin { dimension: usize },
    Quadratic { curvature: f64, dimension: usize },
}

impl PotentialSpec {
    pub fn from_name(name: &str, dimension: usize, curvature: f64) -> Result<Self> {
        match name {
            "rastrigin" => Ok(Self::Rastrigin { dimension }),
            "quadratic" => Ok(Self::Quadratic {
                curvature,
                dimension,
            }),
            other => Err(Error::invalid(
                "potential",
                format!("unknown potential `{other}` (expected `rastrigin` or `quadratic`)"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rastrigin { .. } => "rastrigin",
            Self::Quadratic { .. } => "quadratic",
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            Self::Rastrigin { dimension } | Self::Quadratic { dimension, .. } => dimension,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Potential>> {
        Ok(match *self {
            Self::Rastrigin { dimension } => Box::new(Rastrigin::new(dimension)?),
            Self::Quadratic {
                curvature,
                dimension,
            } => Box::new(QuadraticPotential::isotropic(curvature, dimension)?),
        })
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={})", self.name(), self.dimension())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn central_difference(p: &dyn Potential, x: &[f64], i: usize) -> f64 {
        let step = 1e-5 * x[i].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += step;
        xm[i] -= step;
        (p.value(&xp) - p.value(&xm)) / (2.0 * step)
    }

    fn assert_gradient_matches(p: &dyn Potential, x: &[f64]) {
        let mut g = vec![0.0; x.len()];
        p.gradient(x, &mut g);
        let mut g2 = vec![0.0; x.len()];
        let u = p.value_and_gradient(x, &mut g2);
        assert_eq!(u, p.value(x));
        for i in 0..x.len() {
            assert_eq!(g[i], g2[i]);
            let fd = central_difference(p, x, i);
            let scale = g[i].abs().max(1.0);
            assert!(
                (fd - g[i]).abs() / scale <= 1e-5,
                "component {i}: analytic {} vs finite difference {fd}",
                g[i]
            );
        }
    }

    #[test]
    fn rastrigin_reference_values() {
        let p = rastrigin(10).unwrap();
        let zero = vec![0.0; 10];
        assert_eq!(p.value(&zero), 0.0);
        let g = evaluate_gradient(&p, &zero).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));

        let ones = vec![1.0; 10];
        assert_relative_eq!(p.value(&ones), 10.0, epsilon = 1e-12);

        let mut half = vec![0.0; 10];
        half[0] = 0.5;
        assert_relative_eq!(p.value(&half), 2.25, epsilon = 1e-12);

        let p1 = rastrigin(1).unwrap();
        assert_relative_eq!(evaluate(&p1, &[0.25]).unwrap(), 1.0625, epsilon = 1e-12);
    }

    #[test]
    fn rastrigin_metadata() {
        let p = rastrigin(3).unwrap();
        assert_eq!(p.known_minimum(), Some(0.0));
        assert_relative_eq!(p.smoothness().unwrap(), 2.0 + 4.0 * PI * PI);
        assert_eq!(p.integrability_threshold(), 1.0);
    }

    #[test]
    fn rastrigin_rejects_zero_dimension() {
        assert!(matches!(rastrigin(0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn quadratic_reference_values() {
        let q = QuadraticPotential::isotropic(1.0, 2).unwrap();
        assert_eq!(evaluate(&q, &[0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(evaluate(&q, &[3.0, 4.0]).unwrap(), 12.5);
        let q = QuadraticPotential::new(2.0, vec![1.0, -1.0]).unwrap();
        let mut g = [0.0; 2];
        q.gradient(&[2.0, 0.5], &mut g);
        assert_eq!(g, [2.0, 3.0]);
        assert_eq!(q.value(&[1.0, -1.0]), 0.0);
    }

    #[test]
    fn evaluate_checks_input() {
        let p = rastrigin(3).unwrap();
        assert!(matches!(
            evaluate(&p, &[0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            evaluate(&p, &[0.0, f64::NAN, 0.0]),
            Err(Error::NonFiniteInput { index: 1 })
        ));
        assert!(matches!(
            evaluate(&p, &[f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFiniteInput { index: 0 })
        ));
    }

    #[test]
    fn spec_lookup() {
        let s = PotentialSpec::from_name("rastrigin", 4, 1.0).unwrap();
        assert_eq!(s.build().unwrap().dimension(), 4);
        assert!(PotentialSpec::from_name("rosenbrock", 4, 1.0).is_err());
    }

    fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-5.0f64..5.0, d)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn rastrigin_gradient_matches_finite_differences(x in point(6)) {
            assert_gradient_matches(&rastrigin(6).unwrap(), &x);
        }

        #[test]
        fn quadratic_gradient_matches_finite_differences(x in point(4), mu in 0.1f64..10.0) {
            let q = QuadraticPotential::new(mu, vec![0.5, -1.0, 2.0, 0.0]).unwrap();
            assert_gradient_matches(&q, &x);
        }

        #[test]
        fn rastrigin_is_even(x in point(5)) {
            let p = rastrigin(5).unwrap();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(p.value(&x), p.value(&neg));
        }

        #[test]
        fn rastrigin_lower_bounds(x in point(7)) {
            let p = rastrigin(7).unwrap();
            let u = p.value(&x);
            let norm2: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!(u >= norm2 - 7.0);
            prop_assert!(u >= -1e-9);
        }
    }
}
