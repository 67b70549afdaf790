//! Multivariate normal targets with precomputed precision.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::precondition::cholesky_factor;
use crate::rng::RngStream;
use crate::target::Target;

/// `N(0, C)` with dense precomputed precision; `U(x) = x' C^{-1} x / 2`.
#[derive(Clone, Debug)]
pub struct MvnTarget {
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    chol_cov_lower: DMatrix<f64>,
}

impl MvnTarget {
    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        let chol = cholesky_factor(cov)?;
        let n = cov.nrows();
        let mut precision = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            precision.set_column(j, &chol.solve_lt(&chol.solve_l(&e)));
        }
        let precision = (&precision + precision.transpose()) * 0.5;
        Ok(Self {
            covariance: cov.clone(),
            precision,
            chol_cov_lower: chol.chol_lower().clone(),
        })
    }

    /// Standard normal in `k` dimensions.
    pub fn standard(k: usize) -> Self {
        Self {
            covariance: DMatrix::identity(k, k),
            precision: DMatrix::identity(k, k),
            chol_cov_lower: DMatrix::identity(k, k),
        }
    }

    /// `N(0, gamma^{-1} I)`.
    pub fn isotropic(k: usize, gamma: f64) -> Self {
        assert!(gamma > 0.0, "gamma must be positive");
        Self {
            covariance: DMatrix::identity(k, k) / gamma,
            precision: DMatrix::identity(k, k) * gamma,
            chol_cov_lower: DMatrix::identity(k, k) / gamma.sqrt(),
        }
    }

    /// AR(1)-structured covariance `C[i, j] = rho^|i - j|`.
    pub fn ar1(k: usize, rho: f64) -> Self {
        let cov = DMatrix::from_fn(k, k, |i, j| rho.powi((i as i32 - j as i32).abs()));
        Self::from_covariance(&cov).expect("AR(1) covariance is positive definite")
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Exact draw from the target, for starting chains in stationarity.
    pub fn sample(&self, rng: &mut RngStream) -> Result<DVector<f64>> {
        let z = rng.standard_normal_vector(self.dim())?;
        Ok(&self.chol_cov_lower * z)
    }
}

impl Target for MvnTarget {
    fn dim(&self) -> usize {
        self.precision.nrows()
    }
    fn potential(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.precision * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.precision * x
    }
    fn potential_and_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let g = &self.precision * x;
        (0.5 * x.dot(&g), g)
    }
    fn expected_hessian(&self) -> Option<DMatrix<f64>> {
        Some(self.precision.clone())
    }
}
