//! Target distributions on the augmented position/momentum space.
//!
//! A target is known through its potential `U(x)` (negative log density up to
//! an additive constant) and gradient. Momentum is always unit-mass: the
//! augmented density is `exp(-U(x) - u'u/2)`, and non-identity mass matrices
//! are realized by transforming `x` (see [`crate::precondition`]) rather than
//! by changing the momentum distribution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A target distribution `pi(x) ∝ exp(-U(x))` with gradient access.
///
/// Implementations must be immutable after construction so chains can share
/// them across threads. Potentials may return `f64::INFINITY` outside the
/// support (samplers then reject the proposal); gradients at such points are
/// unused.
pub trait Target: Sync {
    fn dim(&self) -> usize;

    /// Potential energy `U(x)`, in nats, up to an additive constant.
    fn potential(&self, x: &DVector<f64>) -> f64;

    /// Gradient of the potential.
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Potential and gradient together; override when they share work.
    fn potential_and_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.potential(x), self.gradient(x))
    }

    /// Optional symmetric positive-definite approximation to the inverse
    /// target variance, used to build preconditioners.
    fn expected_hessian(&self) -> Option<DMatrix<f64>> {
        None
    }
}

impl<T: Target + ?Sized> Target for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn potential(&self, x: &DVector<f64>) -> f64 {
        (**self).potential(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn potential_and_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (**self).potential_and_grad(x)
    }
    fn expected_hessian(&self) -> Option<DMatrix<f64>> {
        (**self).expected_hessian()
    }
}

/// A target assembled from closures, for tests and ad-hoc densities.
pub struct FnTarget<U, G>
where
    U: Fn(&DVector<f64>) -> f64 + Sync,
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    dim: usize,
    potential: U,
    gradient: G,
}

impl<U, G> FnTarget<U, G>
where
    U: Fn(&DVector<f64>) -> f64 + Sync,
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    pub fn new(dim: usize, potential: U, gradient: G) -> Self {
        Self { dim, potential, gradient }
    }
}

impl<U, G> Target for FnTarget<U, G>
where
    U: Fn(&DVector<f64>) -> f64 + Sync,
    G: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn potential(&self, x: &DVector<f64>) -> f64 {
        (self.potential)(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }
}

/// Position and unit-mass momentum, both length `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedState {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
}

impl AugmentedState {
    /// Errors unless `x` and `u` have identical nonzero length.
    pub fn new(x: DVector<f64>, u: DVector<f64>) -> Result<Self> {
        if x.len() != u.len() {
            return Err(Error::DimensionMismatch(format!(
                "position has length {} but momentum has length {}",
                x.len(),
                u.len()
            )));
        }
        if x.is_empty() {
            return Err(Error::DimensionMismatch("state must have length >= 1".into()));
        }
        Ok(Self { x, u })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The state with momentum negated.
    pub fn flip_momentum(&self) -> Self {
        Self { x: self.x.clone(), u: -&self.u }
    }
}

/// Total energy `H(x, u) = U(x) + u'u / 2` under unit mass.
pub fn hamiltonian(state: &AugmentedState, target: &dyn Target) -> Result<f64> {
    if state.dim() != target.dim() {
        return Err(Error::ContractViolation(format!(
            "state dimension {} does not match target dimension {}",
            state.dim(),
            target.dim()
        )));
    }
    Ok(target.potential(&state.x) + 0.5 * state.u.norm_squared())
}

/// Central finite-difference check of a target's gradient at `x`.
///
/// Returns the relative error `||fd - grad|| / max(||grad||, 1)` at
/// perturbation `h`.
pub fn gradient_fd_error(target: &dyn Target, x: &DVector<f64>, h: f64) -> f64 {
    let k = x.len();
    let grad = target.gradient(x);
    let mut fd = DVector::zeros(k);
    let mut xp = x.clone();
    for i in 0..k {
        let xi = x[i];
        xp[i] = xi + h;
        let up = target.potential(&xp);
        xp[i] = xi - h;
        let um = target.potential(&xp);
        xp[i] = xi;
        fd[i] = (up - um) / (2.0 * h);
    }
    (&fd - &grad).norm() / grad.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MvnTarget;
    use approx::assert_relative_eq;

    #[test]
    fn hamiltonian_zero_state_is_zero() {
        let t = MvnTarget::standard(2);
        let s = AugmentedState::new(DVector::zeros(2), DVector::zeros(2)).unwrap();
        assert_eq!(hamiltonian(&s, &t).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_unit_state_on_standard_normal() {
        // U(x) = x'x/2: H((1),(1)) = 1/2 + 1/2
        let t = MvnTarget::standard(1);
        let s = AugmentedState::new(DVector::from_element(1, 1.0), DVector::from_element(1, 1.0))
            .unwrap();
        assert_relative_eq!(hamiltonian(&s, &t).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn hamiltonian_scaled_normal() {
        // N(0, 1/4) in 1D: U(x) = 2 x^2, so H(0.5, 1.0) = 0.5 + 0.5
        let t = MvnTarget::isotropic(1, 4.0);
        let s = AugmentedState::new(DVector::from_element(1, 0.5), DVector::from_element(1, 1.0))
            .unwrap();
        assert_relative_eq!(hamiltonian(&s, &t).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn hamiltonian_rejects_dimension_mismatch() {
        let t = MvnTarget::standard(3);
        let s = AugmentedState::new(DVector::zeros(2), DVector::zeros(2)).unwrap();
        assert!(hamiltonian(&s, &t).is_err());
    }

    #[test]
    fn state_requires_matching_lengths() {
        assert!(AugmentedState::new(DVector::zeros(2), DVector::zeros(3)).is_err());
    }

    #[test]
    fn kinetic_part_is_exactly_additive() {
        let t = MvnTarget::standard(4);
        let mut rng = crate::RngStream::new(9, 0);
        for _ in 0..20 {
            let x = rng.standard_normal_vector(4).unwrap();
            let u = rng.standard_normal_vector(4).unwrap();
            let with_u = hamiltonian(&AugmentedState::new(x.clone(), u.clone()).unwrap(), &t).unwrap();
            let without =
                hamiltonian(&AugmentedState::new(x.clone(), DVector::zeros(4)).unwrap(), &t).unwrap();
            assert_relative_eq!(with_u - without, 0.5 * u.norm_squared(), max_relative = 1e-15);
        }
    }
}
