//! Mass-matrix preconditioning.
//!
//! A preconditioner holds a symmetric positive-definite `M` (an approximate
//! inverse target variance) together with its lower Cholesky factor
//! `M = L L'`. All samplers keep unit-mass momentum; preconditioning acts by
//! the change of variables `x~ = L' x`, under which a target that is roughly
//! `N(0, M^{-1})` becomes roughly standard normal.
//!
//! [`hams_precond_step`] is the computation-minimized preconditioned
//! variant-A/B step: per iteration it performs exactly two triangular solves
//! (`(L')^{-1} x~*` and `L^{-1} grad U(x*)`) plus one inner product for the
//! acceptance ratio, caching the transformed position and gradient between
//! iterations. Its arithmetic is equivalent, step for step, to running the
//! plain kernel on the transformed target (the reference route used by the
//! equivalence tests, available through [`precond_wrap`]).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::params::{AbConfig, Variant};
use crate::rng::RngStream;
use crate::samplers::{accept_with, StepOutcome};
use crate::target::{AugmentedState, Target};

/// SPD mass matrix with its lower Cholesky factor and solve routines.
#[derive(Clone, Debug)]
pub struct Preconditioner {
    m: DMatrix<f64>,
    l: DMatrix<f64>,
    identity: bool,
}

/// Cholesky-factor `m` into a [`Preconditioner`].
///
/// Errors name the first non-positive leading minor, and reject asymmetric
/// input outright.
pub fn cholesky_factor(m: &DMatrix<f64>) -> Result<Preconditioner> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "mass matrix must be square and nonempty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-8 * scale {
                return Err(Error::Domain(format!(
                    "mass matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::Decomposition(format!(
                "leading minor of order {} is not positive definite",
                j + 1
            )));
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(Preconditioner { m: m.clone(), l, identity: false })
}

impl Preconditioner {
    /// Build from the mass matrix `M` (approximate inverse target variance).
    pub fn from_mass(m: DMatrix<f64>) -> Result<Self> {
        cholesky_factor(&m)
    }

    /// Build from a covariance `Sigma`, i.e. with `M = Sigma^{-1}`.
    pub fn from_covariance(sigma: &DMatrix<f64>) -> Result<Self> {
        let chol = cholesky_factor(sigma)?;
        let n = sigma.nrows();
        // Sigma^{-1} = L_s^{-T} L_s^{-1}, assembled column by column.
        let mut inv = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let col = chol.solve_lt(&chol.solve_l(&e));
            inv.set_column(j, &col);
        }
        // symmetrize roundoff
        let inv = (&inv + inv.transpose()) * 0.5;
        cholesky_factor(&inv)
    }

    /// The identity preconditioner; solves and products short-circuit.
    pub fn identity(k: usize) -> Self {
        Self { m: DMatrix::identity(k, k), l: DMatrix::identity(k, k), identity: true }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Solve `L z = v`.
    pub fn solve_l(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        let n = v.len();
        let mut z = v.clone();
        for i in 0..n {
            let mut s = z[i];
            for k in 0..i {
                s -= self.l[(i, k)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        z
    }

    /// Solve `L' z = v`.
    pub fn solve_lt(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        let n = v.len();
        let mut z = v.clone();
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * z[k];
            }
            z[i] = s / self.l[(i, i)];
        }
        z
    }

    /// `L' v`.
    pub fn mul_lt(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        self.l.tr_mul(v)
    }

    /// `L v`.
    pub fn mul_l(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        &self.l * v
    }

    /// `Sigma v = M^{-1} v` via two triangular solves.
    pub fn sigma_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        self.solve_lt(&self.solve_l(v))
    }

    /// Map a standard-normal vector to an `N(0, Sigma)` draw (`L^{-T} zeta`).
    pub fn sigma_half_mul(&self, zeta: &DVector<f64>) -> DVector<f64> {
        self.solve_lt(zeta)
    }

    /// Quadratic form `v' M v = |L' v|^2`.
    pub fn mass_quad(&self, v: &DVector<f64>) -> f64 {
        if self.identity {
            return v.norm_squared();
        }
        self.mul_lt(v).norm_squared()
    }
}

/// View of a target under the change of variables `x~ = L' x`.
///
/// The wrapped potential is `U~(x~) = U((L')^{-1} x~)` with gradient
/// `L^{-1} grad U(x)`; running any unit-mass sampler on it realizes the
/// preconditioned sampler in the original space.
pub struct TransformedTarget<'a> {
    inner: &'a dyn Target,
    p: &'a Preconditioner,
}

/// Wrap `target` in the transformed-space view defined by `p`.
pub fn precond_wrap<'a>(target: &'a dyn Target, p: &'a Preconditioner) -> Result<TransformedTarget<'a>> {
    if target.dim() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target dim {} vs preconditioner dim {}",
            target.dim(),
            p.dim()
        )));
    }
    Ok(TransformedTarget { inner: target, p })
}

impl Target for TransformedTarget<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn potential(&self, x_tilde: &DVector<f64>) -> f64 {
        self.inner.potential(&self.p.solve_lt(x_tilde))
    }
    fn gradient(&self, x_tilde: &DVector<f64>) -> DVector<f64> {
        self.p.solve_l(&self.inner.gradient(&self.p.solve_lt(x_tilde)))
    }
    fn potential_and_grad(&self, x_tilde: &DVector<f64>) -> (f64, DVector<f64>) {
        let x = self.p.solve_lt(x_tilde);
        let (pot, grad) = self.inner.potential_and_grad(&x);
        (pot, self.p.solve_l(&grad))
    }
}

/// Per-chain cache for [`hams_precond_step`]: the current position, its
/// transform, the transformed-space gradient, and the potential. Rejected
/// steps reuse it unchanged, so they cost no new evaluations.
#[derive(Clone, Debug)]
pub struct PrecondCache {
    x: DVector<f64>,
    x_tilde: DVector<f64>,
    grad_tilde: DVector<f64>,
    potential: f64,
}

impl PrecondCache {
    pub fn new(target: &dyn Target, p: &Preconditioner, state: &AugmentedState) -> Result<Self> {
        if state.dim() != target.dim() || p.dim() != target.dim() {
            return Err(Error::DimensionMismatch("cache init: dimensions disagree".into()));
        }
        let (potential, grad) = target.potential_and_grad(&state.x);
        Ok(Self {
            x: state.x.clone(),
            x_tilde: p.mul_lt(&state.x),
            grad_tilde: p.solve_l(&grad),
            potential,
        })
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }
}

/// One preconditioned variant-A/B transition with explicit noise.
///
/// `cache` must describe `state.x` (initialized once per chain via
/// [`PrecondCache::new`] and then threaded through); a stale cache is a
/// contract violation.
pub fn hams_precond_step_with_noise(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    p: &Preconditioner,
    zeta: &DVector<f64>,
    w: f64,
    cache: &mut PrecondCache,
) -> Result<StepOutcome> {
    if state.dim() != target.dim() || zeta.len() != target.dim() || p.dim() != target.dim() {
        return Err(Error::DimensionMismatch("preconditioned step: dimensions disagree".into()));
    }
    if cache.x != state.x {
        return Err(Error::ContractViolation(
            "preconditioner cache does not describe the current state".into(),
        ));
    }

    let (a, b) = (cfg.a, cfg.b);
    let two_a = 2.0 - a;
    let sab = cfg.sqrt_ab();
    let noise = cfg.noise_coeff();
    let bco = (b * (2.0 - a - b)).max(0.0).sqrt();

    let xi = sab * &state.u + noise * zeta;
    let x_tilde_star = &cache.x_tilde - a * &cache.grad_tilde + &xi;
    let x_star = p.solve_lt(&x_tilde_star);
    let (pot_star, grad_star) = target.potential_and_grad(&x_star);
    let grad_tilde_star = p.solve_l(&grad_star);
    let xi_tilde = &grad_tilde_star + &cache.grad_tilde;

    let log_rho =
        cache.potential - pot_star + (xi_tilde.dot(&(&xi - (a / 2.0) * &xi_tilde))) / two_a;

    let u_star = match cfg.variant {
        Variant::A => {
            (2.0 * b / two_a - 1.0) * &state.u + (2.0 * bco / two_a) * zeta
                - (sab / two_a) * &xi_tilde
        }
        Variant::B => &state.u - (sab / two_a) * &xi_tilde,
    };

    let proposal = AugmentedState { x: x_star, u: u_star };
    let accepted = accept_with(w, log_rho);
    let next = if accepted {
        cache.x = proposal.x.clone();
        cache.x_tilde = x_tilde_star;
        cache.grad_tilde = grad_tilde_star;
        cache.potential = pot_star;
        proposal.clone()
    } else {
        state.flip_momentum()
    };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One preconditioned variant-A/B transition. Draws `k` normals then one
/// uniform, matching the plain kernel's stream consumption.
pub fn hams_precond_step(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    p: &Preconditioner,
    rng: &mut RngStream,
    cache: &mut PrecondCache,
) -> Result<StepOutcome> {
    let zeta = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    hams_precond_step_with_noise(state, cfg, target, p, &zeta, w, cache)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MvnTarget;
    use crate::samplers::hams_ab_step_with_noise;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn identity_factorization() {
        let p = cholesky_factor(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(p.chol_lower(), &DMatrix::identity(3, 3));
    }

    #[test]
    fn hand_checked_two_by_two() {
        let m = dmatrix![4.0, 2.0; 2.0, 3.0];
        let p = cholesky_factor(&m).unwrap();
        let l = p.chol_lower();
        assert_relative_eq!(l[(0, 0)], 2.0, max_relative = 1e-15);
        assert_relative_eq!(l[(1, 0)], 1.0, max_relative = 1e-15);
        assert_relative_eq!(l[(1, 1)], 2f64.sqrt(), max_relative = 1e-15);
        let residual = (l * l.transpose() - &m).norm() / m.norm();
        assert!(residual <= 1e-10);
    }

    #[test]
    fn indefinite_matrix_names_failed_minor() {
        let m = dmatrix![1.0, 2.0; 2.0, 1.0];
        let err = cholesky_factor(&m).unwrap_err();
        assert!(err.to_string().contains("order 2"), "{err}");
    }

    #[test]
    fn triangular_solves_invert_products() {
        let m = dmatrix![4.0, 1.0, 0.5; 1.0, 3.0, 0.2; 0.5, 0.2, 2.0];
        let p = cholesky_factor(&m).unwrap();
        let mut rng = crate::RngStream::new(3, 0);
        for _ in 0..10 {
            let v = rng.standard_normal_vector(3).unwrap();
            assert!((p.solve_l(&p.mul_l(&v)) - &v).norm() <= 1e-10);
            assert!((p.solve_lt(&p.mul_lt(&v)) - &v).norm() <= 1e-10);
        }
    }

    #[test]
    fn identity_preconditioner_reproduces_plain_kernel() {
        let target = MvnTarget::isotropic(4, 2.5);
        let p = Preconditioner::identity(4);
        let mut rng = crate::RngStream::new(21, 0);
        for variant in [Variant::A, Variant::B] {
            let cfg = AbConfig::with_default_carryover(variant, 0.7).unwrap();
            let mut s_plain = AugmentedState::new(
                rng.standard_normal_vector(4).unwrap(),
                rng.standard_normal_vector(4).unwrap(),
            )
            .unwrap();
            let mut s_pre = s_plain.clone();
            let mut cache = PrecondCache::new(&target, &p, &s_pre).unwrap();
            let mut noise_rng = rng.substream(77);
            for _ in 0..200 {
                let zeta = noise_rng.standard_normal_vector(4).unwrap();
                let w = noise_rng.uniform();
                let a = hams_ab_step_with_noise(&s_plain, &cfg, &target, &zeta, w).unwrap();
                let b =
                    hams_precond_step_with_noise(&s_pre, &cfg, &target, &p, &zeta, w, &mut cache)
                        .unwrap();
                assert!((&a.next.x - &b.next.x).norm() <= 1e-12);
                assert!((&a.next.u - &b.next.u).norm() <= 1e-12);
                assert!((a.log_rho - b.log_rho).abs() <= 1e-12);
                s_plain = a.next;
                s_pre = b.next;
            }
        }
    }

    #[test]
    fn rejection_free_on_matched_normal_target() {
        // Target N(0, M^{-1}) with the preconditioner built from M.
        let m = dmatrix![2.0, 0.6, 0.0; 0.6, 1.5, -0.3; 0.0, -0.3, 1.1];
        let p = Preconditioner::from_mass(m.clone()).unwrap();
        let sigma = {
            let pm = cholesky_factor(&m).unwrap();
            let mut inv = DMatrix::zeros(3, 3);
            for j in 0..3 {
                let mut e = DVector::zeros(3);
                e[j] = 1.0;
                inv.set_column(j, &pm.solve_lt(&pm.solve_l(&e)));
            }
            (&inv + inv.transpose()) * 0.5
        };
        let target = MvnTarget::from_covariance(&sigma).unwrap();
        let cfg = AbConfig::with_default_carryover(Variant::A, 0.9).unwrap();
        let mut rng = crate::RngStream::new(22, 0);
        let mut s = AugmentedState::new(
            rng.standard_normal_vector(3).unwrap(),
            rng.standard_normal_vector(3).unwrap(),
        )
        .unwrap();
        let mut cache = PrecondCache::new(&target, &p, &s).unwrap();
        for _ in 0..2000 {
            let out = hams_precond_step(&s, &cfg, &target, &p, &mut rng, &mut cache).unwrap();
            assert!(out.accepted);
            assert!(out.log_rho.abs() <= 1e-8, "{}", out.log_rho);
            s = out.next;
        }
    }

    #[test]
    fn stale_cache_is_a_contract_violation() {
        let target = MvnTarget::standard(2);
        let p = Preconditioner::identity(2);
        let s = AugmentedState::new(DVector::zeros(2), DVector::zeros(2)).unwrap();
        let mut cache = PrecondCache::new(&target, &p, &s).unwrap();
        let other =
            AugmentedState::new(DVector::from_element(2, 1.0), DVector::zeros(2)).unwrap();
        let mut rng = crate::RngStream::new(1, 0);
        let cfg = AbConfig::new(Variant::A, 0.5, 0.5).unwrap();
        assert!(hams_precond_step(&other, &cfg, &target, &p, &mut rng, &mut cache).is_err());
    }

    #[test]
    fn wrapped_target_preserves_hamiltonian() {
        let m = dmatrix![3.0, 0.4; 0.4, 2.0];
        let p = Preconditioner::from_mass(m).unwrap();
        let target = MvnTarget::ar1(2, 0.5);
        let wrapped = precond_wrap(&target, &p).unwrap();
        let mut rng = crate::RngStream::new(23, 0);
        for _ in 0..10 {
            let x = rng.standard_normal_vector(2).unwrap();
            let x_tilde = p.mul_lt(&x);
            assert_relative_eq!(
                wrapped.potential(&x_tilde),
                target.potential(&x),
                max_relative = 1e-12
            );
        }
    }
}
