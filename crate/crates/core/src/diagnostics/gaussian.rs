use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// A multivariate normal law with a positive definite covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianLaw {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: cov.nrows(),
            });
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::invalid("cov", "covariance must be symmetric"));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("cov", "entries must be finite"));
        }
        let eig = cov.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::SingularCovariance);
        }
        Ok(Self { mean, cov })
    }

    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        Self::new(DVector::from_element(1, mean), DMatrix::from_element(1, 1, variance))
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// `KL(p‖q) = ½(tr(S_q⁻¹S_p) + Δmᵀ S_q⁻¹ Δm − n + ln det S_q − ln det S_p)`.
pub fn gaussian_kl(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    if p.dimension() != q.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: q.dimension(),
        });
    }
    let chol_q = q.cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let chol_p = p.cov.clone().cholesky().ok_or(Error::SingularCovariance)?;
    let n = p.dimension() as f64;
    let trace = chol_q.solve(&p.cov).trace();
    let dm = &q.mean - &p.mean;
    let maha = dm.dot(&chol_q.solve(&dm));
    let logdet = |l: &DMatrix<f64>| 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let kl = 0.5 * (trace + maha - n + logdet(&chol_q.l()) - logdet(&chol_p.l()));
    // Round-off can push an exact zero slightly negative.
    Ok(kl.max(0.0))
}

fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    let root = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose()
}

/// Wasserstein-2 distance between Gaussians (Bures form).
pub fn gaussian_w2(p: &GaussianLaw, q: &GaussianLaw) -> Result<f64> {
    if p.dimension() != q.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p.dimension(),
            got: q.dimension(),
        });
    }
    let root_q = sqrt_psd(&q.cov);
    let cross = sqrt_psd(&(&root_q * &p.cov * &root_q));
    let bures = (p.cov.trace() + q.cov.trace() - 2.0 * cross.trace()).max(0.0);
    Ok(((&p.mean - &q.mean).norm_squared() + bures).sqrt())
}

/// Law of one `(x, y)` coordinate pair. The full chain state is a `d`-fold
/// product of identical blocks when the potential is isotropic and the
/// initial law is too. The covariance may be singular (e.g. a deterministic
/// chain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockLaw {
    pub mean: Vector2<f64>,
    pub cov: Matrix2<f64>,
}

impl BlockLaw {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Self {
        Self {
            mean: Vector2::new(mean[0], mean[1]),
            cov: Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]),
        }
    }

    pub fn to_gaussian(&self) -> Result<GaussianLaw> {
        GaussianLaw::new(
            DVector::from_column_slice(self.mean.as_slice()),
            DMatrix::from_column_slice(2, 2, self.cov.as_slice()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn normal_pdf(x: f64, m: f64, v: f64) -> f64 {
        (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
    }

    /// Composite Simpson quadrature of p·ln(p/q) on [lo, hi].
    fn kl_quadrature(mp: f64, vp: f64, mq: f64, vq: f64, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let f = |x: f64| {
            let p = normal_pdf(x, mp, vp);
            if p == 0.0 {
                0.0
            } else {
                p * (p / normal_pdf(x, mq, vq)).ln()
            }
        };
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * step);
        }
        s * step / 3.0
    }

    #[test]
    fn kl_of_identical_laws_is_zero() {
        let p = BlockLaw::new([0.3, -1.0], [[2.0, 0.3], [0.3, 0.5]]).to_gaussian().unwrap();
        assert!(gaussian_kl(&p, &p).unwrap().abs() < 1e-15);
        assert!(gaussian_w2(&p, &p).unwrap() < 1e-7);
    }

    #[test]
    fn kl_unit_shift() {
        let p = GaussianLaw::univariate(1.0, 1.0).unwrap();
        let q = GaussianLaw::univariate(0.0, 1.0).unwrap();
        let closed = gaussian_kl(&p, &q).unwrap();
        let quad = kl_quadrature(1.0, 1.0, 0.0, 1.0, -10.0, 12.0);
        assert!((quad - 0.5).abs() < 1e-10);
        assert!((closed - quad).abs() < 1e-10);
    }

    #[test]
    fn kl_matches_quadrature_with_variance_change() {
        let p = GaussianLaw::univariate(0.5, 2.0).unwrap();
        let q = GaussianLaw::univariate(-0.25, 0.7).unwrap();
        let quad = kl_quadrature(0.5, 2.0, -0.25, 0.7, -20.0, 20.0);
        assert!((gaussian_kl(&p, &q).unwrap() - quad).abs() < 1e-9);
    }

    #[test]
    fn kl_is_asymmetric() {
        let p = GaussianLaw::univariate(0.0, 1.0).unwrap();
        let q = GaussianLaw::univariate(1.0, 4.0).unwrap();
        let pq = gaussian_kl(&p, &q).unwrap();
        let qp = gaussian_kl(&q, &p).unwrap();
        assert!((pq - qp).abs() > 0.1, "{pq} vs {qp}");
    }

    #[test]
    fn w2_closed_forms() {
        // Univariate: W2² = Δm² + (σp − σq)².
        let p = GaussianLaw::univariate(1.0, 4.0).unwrap();
        let q = GaussianLaw::univariate(-1.0, 1.0).unwrap();
        assert!((gaussian_w2(&p, &q).unwrap() - (4.0f64 + 1.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn singular_covariance_is_rejected() {
        let law = BlockLaw::new([0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(law.to_gaussian(), Err(Error::SingularCovariance)));
        assert!(GaussianLaw::univariate(0.0, 0.0).is_err());
    }

    fn pd_block() -> impl Strategy<Value = BlockLaw> {
        (-3.0f64..3.0, -3.0f64..3.0, 0.1f64..3.0, 0.1f64..3.0, -0.9f64..0.9).prop_map(|(m1, m2, s1, s2, r)| {
            let c = r * (s1 * s2).sqrt();
            BlockLaw::new([m1, m2], [[s1, c], [c, s2]])
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kl_is_nonnegative(p in pd_block(), q in pd_block()) {
            let kl = gaussian_kl(&p.to_gaussian().unwrap(), &q.to_gaussian().unwrap()).unwrap();
            prop_assert!(kl >= 0.0);
        }
    }
}
