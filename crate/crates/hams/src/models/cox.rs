//! Log-Gaussian Cox model on an `m x m` grid: latent and parameter
//! conditionals.
//!
//! Cell `(i, j)` (row-major, zero-based) carries a latent Gaussian value
//! with covariance `sigma^2 exp(-d / (m beta))` in the Euclidean grid
//! distance `d`, and an independent Poisson count with mean
//! `exp(x_ij + mu) / n`, `n = m^2`. Parameters are sampled on the log scale
//! `(phi1, phi2) = (log sigma^2, log beta)` with independent Gamma(2, 1/2)
//! priors on the natural scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::guarded_exp;
use crate::precondition::cholesky_factor;
use crate::rng::RngStream;
use crate::target::Target;

fn grid_distance(m: usize, p: usize, q: usize) -> f64 {
    let (pi, pj) = ((p / m) as f64, (p % m) as f64);
    let (qi, qj) = ((q / m) as f64, (q % m) as f64);
    ((pi - qi).powi(2) + (pj - qj).powi(2)).sqrt()
}

/// Dense grid covariance `C[p, q] = sigma^2 exp(-d(p, q) / (m beta))`.
pub fn cox_covariance(m: usize, sigma2: f64, beta: f64) -> Result<DMatrix<f64>> {
    if m == 0 || !(sigma2 > 0.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "need m >= 1, sigma2 > 0, beta > 0; got ({m}, {sigma2}, {beta})"
        )));
    }
    let n = m * m;
    let scale = 1.0 / (m as f64 * beta);
    Ok(DMatrix::from_fn(n, n, |p, q| sigma2 * (-grid_distance(m, p, q) * scale).exp()))
}

/// `dC/dphi2`: elementwise `C ∘ d / (m beta)`.
fn cox_dc_dphi2(m: usize, sigma2: f64, beta: f64) -> DMatrix<f64> {
    let n = m * m;
    let scale = 1.0 / (m as f64 * beta);
    DMatrix::from_fn(n, n, |p, q| {
        let d = grid_distance(m, p, q);
        sigma2 * d * scale * (-d * scale).exp()
    })
}

/// Conditional target of the latent field given data and parameters.
pub struct CoxLatentTarget {
    m: usize,
    mu: f64,
    sigma2: f64,
    y: DVector<f64>,
    cinv: DMatrix<f64>,
}

impl CoxLatentTarget {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn new(m: usize, sigma2: f64, beta: f64, mu: f64, y: &DVector<f64>) -> Result<Self> {
        let n = m * m;
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "grid {m}x{m} needs {n} observations, got {}",
                y.len()
            )));
        }
        let cov = cox_covariance(m, sigma2, beta)?;
        let chol = cholesky_factor(&cov)?;
        let mut cinv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            cinv.set_column(j, &chol.solve_lt(&chol.solve_l(&e)));
        }
        let cinv = (&cinv + cinv.transpose()) * 0.5;
        Ok(Self { m, mu, sigma2, y: y.clone(), cinv })
    }

    pub fn grid_side(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let n = x.len();
        let ninv = 1.0 / n as f64;
        let cx = &self.cinv * x;
        let mut pot = 0.5 * x.dot(&cx) - self.y.dot(x);
        let mut grad = cx - &self.y;
        for i in 0..n {
            let rate = ninv * guarded_exp(x[i] + self.mu)?;
            pot += rate;
            grad[i] += rate;
        }
        Ok((pot, grad))
    }
}

impl Target for CoxLatentTarget {
    fn dim(&self) -> usize {
        self.m * self.m
    }
    fn potential(&self, x: &DVector<f64>) -> f64 {
        self.eval(x).map(|(p, _)| p).unwrap_or(f64::INFINITY)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x).map(|(_, g)| g).unwrap_or_else(|_| DVector::zeros(x.len()))
    }
    fn potential_and_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.eval(x).unwrap_or_else(|_| (f64::INFINITY, DVector::zeros(x.len())))
    }
    /// `C^{-1} + D` with `D = exp(mu + sigma^2/2) / n` on the diagonal.
    fn expected_hessian(&self) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let d = (self.mu + 0.5 * self.sigma2).exp() / n as f64;
        let mut m = self.cinv.clone();
        for i in 0..n {
            m[(i, i)] += d;
        }
        Some(m)
    }
}

/// Conditional target of `(phi1, phi2)` given data and the latent field.
///
/// Each evaluation rebuilds and factors the dense covariance, so the grid
/// side is capped at 16.
pub struct CoxParamTarget {
    m: usize,
    x: DVector<f64>,
}

impl CoxParamTarget {
    pub fn new(m: usize, x: &DVector<f64>) -> Result<Self> {
        if m > 16 {
            return Err(Error::Domain(format!(
                "parameter conditional refactors a dense {0}x{0} covariance per \
                 evaluation; grid side is capped at 16, got {m}",
                m * m
            )));
        }
        if x.len() != m * m {
            return Err(Error::DimensionMismatch("latent field size".into()));
        }
        Ok(Self { m, x: x.clone() })
    }

    fn eval(&self, phi: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let (phi1, phi2) = (phi[0], phi[1]);
        let sigma2 = guarded_exp(phi1)?;
        let beta = guarded_exp(phi2)?;
        let n = self.m * self.m;

        let cov = cox_covariance(self.m, sigma2, beta)?;
        let chol = cholesky_factor(&cov)?;
        let half_logdet: f64 = (0..n).map(|i| chol.chol_lower()[(i, i)].ln()).sum();
        let cix = chol.solve_lt(&chol.solve_l(&self.x));
        let quad = self.x.dot(&cix);

        let pot = 0.5 * (sigma2 + beta) - 2.0 * (phi1 + phi2) + 0.5 * quad + half_logdet;

        let d1 = 0.5 * sigma2 - 2.0 + 0.5 * n as f64 - 0.5 * quad;

        let dc = cox_dc_dphi2(self.m, sigma2, beta);
        // tr(C^{-1} dC) = sum_ij (C^{-1})_ij dC_ij by symmetry
        let mut cinv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            cinv.set_column(j, &chol.solve_lt(&chol.solve_l(&e)));
        }
        let trace: f64 = cinv.iter().zip(dc.iter()).map(|(a, b)| a * b).sum();
        let d2 = 0.5 * beta - 2.0 + 0.5 * trace - 0.5 * cix.dot(&(&dc * &cix));

        Ok((pot, DVector::from_row_slice(&[d1, d2])))
    }
}

/// Potential and gradient of the parameter conditional at `(phi1, phi2)`.
pub fn cox_param_potential_grad(
    phi1: f64,
    phi2: f64,
    model: &CoxParamTarget,
) -> Result<(f64, DVector<f64>)> {
    model.eval(&DVector::from_row_slice(&[phi1, phi2]))
}

/// Expected curvature of the parameter conditional: the Gaussian Fisher
/// information in `(phi1, phi2)` plus the prior curvature diag(e^phi / 2).
pub fn cox_param_expected_hessian(phi1: f64, phi2: f64, m: usize) -> Result<DMatrix<f64>> {
    let sigma2 = guarded_exp(phi1)?;
    let beta = guarded_exp(phi2)?;
    let n = m * m;
    let cov = cox_covariance(m, sigma2, beta)?;
    let chol = cholesky_factor(&cov)?;
    let dc = cox_dc_dphi2(m, sigma2, beta);
    // W = C^{-1} dC, column by column
    let mut w = DMatrix::zeros(n, n);
    for j in 0..n {
        let col = dc.column(j).into_owned();
        w.set_column(j, &chol.solve_lt(&chol.solve_l(&col)));
    }
    let tr_w: f64 = (0..n).map(|i| w[(i, i)]).sum();
    let tr_ww: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += w[(i, j)] * w[(j, i)];
            }
        }
        s
    };
    let mut h = DMatrix::zeros(2, 2);
    h[(0, 0)] = 0.5 * (sigma2 + n as f64);
    h[(0, 1)] = 0.5 * tr_w;
    h[(1, 0)] = 0.5 * tr_w;
    h[(1, 1)] = 0.5 * (beta + tr_ww);
    Ok(h)
}

impl Target for CoxParamTarget {
    fn dim(&self) -> usize {
        2
    }
    fn potential(&self, phi: &DVector<f64>) -> f64 {
        self.eval(phi).map(|(p, _)| p).unwrap_or(f64::INFINITY)
    }
    fn gradient(&self, phi: &DVector<f64>) -> DVector<f64> {
        self.eval(phi).map(|(_, g)| g).unwrap_or_else(|_| DVector::zeros(2))
    }
    fn potential_and_grad(&self, phi: &DVector<f64>) -> (f64, DVector<f64>) {
        self.eval(phi).unwrap_or_else(|_| (f64::INFINITY, DVector::zeros(2)))
    }
}

/// Draw `(x, y)` from the generative model.
pub fn simulate_cox_data(
    m: usize,
    sigma2: f64,
    beta: f64,
    mu: f64,
    rng: &mut RngStream,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let cov = cox_covariance(m, sigma2, beta)?;
    let chol = cholesky_factor(&cov)?;
    let n = m * m;
    let x = chol.chol_lower() * rng.standard_normal_vector(n)?;
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let lambda = guarded_exp(x[i] + mu)? / n as f64;
        y[i] = rng.poisson(lambda)? as f64;
    }
    Ok((x, y))
}
