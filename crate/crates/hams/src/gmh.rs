//! Generalized Metropolis–Hastings sampling.
//!
//! Given a target that is invariant under an orthogonal (or orthogonal-like)
//! map `J`, the generalized acceptance rule compares the forward proposal
//! density with the same density evaluated along the backward transition
//! `J^{-1} y* -> J y0`, and a rejected proposal moves to `J y0` instead of
//! staying put. With `J = I` this is plain Metropolis–Hastings; with `J` the
//! momentum flip it recovers the HAMS kernels; with a binary lifting
//! variable it recovers the irreversible jump sampler.
//!
//! `G2MS` is the gradient-guided instance: a VAR(1)-shaped proposal
//! `y* = y0 - B grad U(y0) + Z` with `B = I - (I - A) J` and noise variance
//! `2A - A^2`, rejection-free on a standard-normal target for any valid
//! `(A, J)` pair.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::precondition::{cholesky_factor, Preconditioner};
use crate::rng::RngStream;
use crate::target::Target;

const ORTHO_TOL: f64 = 1e-10;

/// An invertible map the target is invariant under.
pub struct InvarianceMap {
    dim: usize,
    forward: Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Sync + Send>,
    inverse: Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Sync + Send>,
    is_orthogonal_like: bool,
    matrix: Option<DMatrix<f64>>,
}

impl InvarianceMap {
    /// The identity map (plain Metropolis–Hastings).
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            forward: Box::new(|y| y.clone()),
            inverse: Box::new(|y| y.clone()),
            is_orthogonal_like: false,
            matrix: Some(DMatrix::identity(dim, dim)),
        }
    }

    /// An explicit orthogonal matrix; orthogonality is verified numerically
    /// rather than trusted.
    pub fn orthogonal(j: DMatrix<f64>) -> Result<Self> {
        let n = j.nrows();
        if j.ncols() != n || n == 0 {
            return Err(Error::DimensionMismatch("J must be square and nonempty".into()));
        }
        let residual = (j.transpose() * &j - DMatrix::identity(n, n)).norm();
        if residual > ORTHO_TOL {
            return Err(Error::Domain(format!(
                "J is not orthogonal: ||J'J - I|| = {residual:.3e}"
            )));
        }
        let jf = j.clone();
        let jt = j.transpose();
        Ok(Self {
            dim: n,
            forward: Box::new(move |y| &jf * y),
            inverse: Box::new(move |y| &jt * y),
            is_orthogonal_like: false,
            matrix: Some(j),
        })
    }

    /// Negate the second half of the coordinates (the momentum block of an
    /// augmented state of total dimension `2k`).
    pub fn momentum_flip(k: usize) -> Self {
        let mut j = DMatrix::identity(2 * k, 2 * k);
        for i in k..2 * k {
            j[(i, i)] = -1.0;
        }
        Self::orthogonal(j).expect("diagonal sign matrix is orthogonal")
    }

    /// Negate every coordinate.
    pub fn sign_flip(dim: usize) -> Self {
        Self::orthogonal(DMatrix::identity(dim, dim) * -1.0).expect("-I is orthogonal")
    }

    /// A discrete or otherwise non-matrix map (e.g. flipping a lifting
    /// variable). Inverse consistency is probed at seeded random points;
    /// the orthogonality check is bypassed via the marker.
    pub fn orthogonal_like(
        dim: usize,
        forward: impl Fn(&DVector<f64>) -> DVector<f64> + Sync + Send + 'static,
        inverse: impl Fn(&DVector<f64>) -> DVector<f64> + Sync + Send + 'static,
    ) -> Result<Self> {
        let mut rng = RngStream::new(0x696e76_u64, 0);
        for _ in 0..8 {
            let y = rng.standard_normal_vector(dim)?;
            let back = inverse(&forward(&y));
            if (&back - &y).norm() > 1e-12 * y.norm().max(1.0) {
                return Err(Error::Domain("inverse(forward(y)) != y".into()));
            }
        }
        Ok(Self {
            dim,
            forward: Box::new(forward),
            inverse: Box::new(inverse),
            is_orthogonal_like: true,
            matrix: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_orthogonal_like(&self) -> bool {
        self.is_orthogonal_like
    }

    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.forward)(y)
    }

    pub fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.inverse)(y)
    }

    /// The matrix form, when the map was built from one.
    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        self.matrix.as_ref()
    }
}

/// Probe `U(J^{-1} y) = U(y)` at seeded random points; run this before
/// sampling with any `(target, J)` pair.
pub fn check_target_invariance(target: &dyn Target, j: &InvarianceMap) -> Result<()> {
    if target.dim() != j.dim() {
        return Err(Error::DimensionMismatch("target dim vs map dim".into()));
    }
    let mut rng = RngStream::new(0x696e76, 1);
    for _ in 0..20 {
        let y = rng.standard_normal_vector(target.dim())?;
        let u0 = target.potential(&y);
        let u1 = target.potential(&j.apply_inverse(&y));
        if (u0 - u1).abs() > 1e-10 * u0.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "target is not invariant under J: U(J^-1 y) - U(y) = {}",
                u1 - u0
            )));
        }
    }
    Ok(())
}

/// A proposal kernel that can both sample and evaluate its own density.
/// (Kernels that cannot evaluate their density cannot implement this trait,
/// which is the registration requirement for generalized MH.)
pub trait ProposalKernel {
    fn sample(&self, from: &DVector<f64>, rng: &mut RngStream) -> DVector<f64>;
    /// Log density of moving `from -> to`, up to a constant shared by all
    /// evaluations of this kernel.
    fn log_density(&self, to: &DVector<f64>, from: &DVector<f64>) -> f64;
}

/// Result of a generalized-MH transition on a plain vector state.
#[derive(Clone, Debug)]
pub struct GmhOutcome {
    pub next: DVector<f64>,
    pub accepted: bool,
    pub log_rho: f64,
    pub proposal: DVector<f64>,
}

/// One generalized Metropolis–Hastings transition: accept `y*` with
/// probability `min(1, pi(J^{-1} y*) Q(J y0 | J^{-1} y*) / (pi(y0) Q(y* |
/// y0)))`, otherwise move to `J y0`.
pub fn gmh_step(
    y0: &DVector<f64>,
    kernel: &dyn ProposalKernel,
    j: &InvarianceMap,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<GmhOutcome> {
    if y0.len() != target.dim() || j.dim() != target.dim() {
        return Err(Error::DimensionMismatch("gmh dimensions disagree".into()));
    }
    let y_star = kernel.sample(y0, rng);
    let w = rng.uniform();
    gmh_decide(y0, y_star, kernel, j, target, w)
}

fn gmh_decide(
    y0: &DVector<f64>,
    y_star: DVector<f64>,
    kernel: &dyn ProposalKernel,
    j: &InvarianceMap,
    target: &dyn Target,
    w: f64,
) -> Result<GmhOutcome> {
    let log_fwd = kernel.log_density(&y_star, y0);
    if log_fwd == f64::NEG_INFINITY {
        return Err(Error::ContractViolation(
            "forward proposal density is zero at a sampled point".into(),
        ));
    }
    let j_inv_star = j.apply_inverse(&y_star);
    let log_bwd = kernel.log_density(&j.apply(y0), &j_inv_star);
    let log_rho = target.potential(y0) - target.potential(&j_inv_star) + log_bwd - log_fwd;
    let accepted = crate::samplers::accept_with(w, log_rho);
    let next = if accepted { y_star.clone() } else { j.apply(y0) };
    Ok(GmhOutcome { next, accepted, log_rho, proposal: y_star })
}

// ---------------------------------------------------------------------------
// G2MS: gradient-guided instance
// ---------------------------------------------------------------------------

/// Validated configuration for the gradient-guided kernel.
pub struct G2msConfig {
    b: DMatrix<f64>,
    j: InvarianceMap,
    /// Cholesky of the (nonsingular) noise variance `2A - A^2`.
    noise_chol: Preconditioner,
}

impl G2msConfig {
    /// Checks `0 <= A <= 2I`, that `J` has matrix form, the algebraic
    /// identity `B + B' - B B' = 2A - A^2`, nonsingularity of the noise
    /// variance, and the target-invariance guard.
    pub fn new(a: DMatrix<f64>, j: InvarianceMap, target: &dyn Target) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || n != j.dim() || n != target.dim() {
            return Err(Error::DimensionMismatch("G2MS dimensions disagree".into()));
        }
        if (&a - a.transpose()).norm() > 1e-10 * a.norm().max(1.0) {
            return Err(Error::Domain("A must be symmetric".into()));
        }
        let eigs = a.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = (eigs.min(), eigs.max());
        if lo < -1e-12 || hi > 2.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "A must satisfy 0 <= A <= 2I; eigenvalues span [{lo}, {hi}]"
            )));
        }
        let jm = j.matrix().ok_or_else(|| {
            Error::Config("G2MS needs a matrix-form invariance map".into())
        })?;
        let b = DMatrix::identity(n, n) - (DMatrix::identity(n, n) - &a) * jm;
        let v = 2.0 * &a - &a * &a;
        let v = (&v + v.transpose()) * 0.5;
        let identity_residual = (&b + b.transpose() - &b * b.transpose() - &v).norm();
        if identity_residual > 1e-10 * v.norm().max(1.0) {
            return Err(Error::Domain(format!(
                "B + B' - BB' != 2A - A^2 (residual {identity_residual:.3e}); J is not orthogonal \
                 enough for this A"
            )));
        }
        let noise_chol = cholesky_factor(&v).map_err(|e| {
            Error::Config(format!(
                "noise variance 2A - A^2 is singular ({e}); restrict A to the open constraint set"
            ))
        })?;
        check_target_invariance(target, &j)?;
        Ok(Self { b, j, noise_chol })
    }

    pub fn invariance(&self) -> &InvarianceMap {
        &self.j
    }
}

/// One G2MS transition with explicit standard-normal noise and uniform.
pub fn g2ms_step_with_noise(
    y0: &DVector<f64>,
    cfg: &G2msConfig,
    target: &dyn Target,
    zeta: &DVector<f64>,
    w: f64,
) -> Result<GmhOutcome> {
    let z = cfg.noise_chol.mul_l(zeta);
    let y_star = y0 - &cfg.b * target.gradient(y0) + &z;
    let j_inv_star = cfg.j.apply_inverse(&y_star);
    let z_star = cfg.j.apply(y0) - (&j_inv_star - &cfg.b * target.gradient(&j_inv_star));
    let quad = |v: &DVector<f64>| cfg.noise_chol.solve_l(v).norm_squared();
    let log_rho =
        target.potential(y0) - target.potential(&y_star) + 0.5 * quad(&z) - 0.5 * quad(&z_star);
    let accepted = crate::samplers::accept_with(w, log_rho);
    let next = if accepted { y_star.clone() } else { cfg.j.apply(y0) };
    Ok(GmhOutcome { next, accepted, log_rho, proposal: y_star })
}

/// One G2MS transition. Draws `k` normals then one uniform.
pub fn g2ms_step(
    y0: &DVector<f64>,
    cfg: &G2msConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<GmhOutcome> {
    let zeta = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    g2ms_step_with_noise(y0, cfg, target, &zeta, w)
}

/// Split a VAR(1) coefficient `I - Btilde` into `(I - Atilde) Jtilde` with
/// `Atilde` symmetric and `Jtilde` orthogonal, via the SVD.
///
/// Requires `Btilde + Btilde' - Btilde Btilde'` (the implied noise variance)
/// to be positive semi-definite.
pub fn decompose_var1(btilde: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = btilde.nrows();
    if btilde.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch("Btilde must be square".into()));
    }
    let v = btilde + btilde.transpose() - btilde * btilde.transpose();
    let v = (&v + v.transpose()) * 0.5;
    let min_eig = v.clone().symmetric_eigen().eigenvalues.min();
    if min_eig < -1e-10 * v.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "implied noise variance is not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    let i_minus_b = DMatrix::identity(n, n) - btilde;
    let svd = i_minus_b.svd(true, true);
    let o1 = svd.u.ok_or_else(|| Error::Decomposition("SVD produced no U".into()))?;
    let o2 = svd.v_t.ok_or_else(|| Error::Decomposition("SVD produced no V'".into()))?;
    let lambda = DMatrix::from_diagonal(&svd.singular_values);
    let atilde = DMatrix::identity(n, n) - &o1 * &lambda * o1.transpose();
    let jtilde = &o1 * &o2;
    Ok((atilde, jtilde))
}

// ---------------------------------------------------------------------------
// I-Jump: lifting with a binary direction variable
// ---------------------------------------------------------------------------

/// State of the irreversible jump sampler: position plus a direction flag.
#[derive(Clone, Debug, PartialEq)]
pub struct IjumpState {
    pub x: DVector<f64>,
    /// `+1` proposes from the first kernel, `-1` from the second.
    pub s: i8,
}

#[derive(Clone, Debug)]
pub struct IjumpOutcome {
    pub next: IjumpState,
    pub accepted: bool,
    pub log_rho: f64,
    pub proposal: DVector<f64>,
}

/// One irreversible-jump transition: with `s = +1` propose from `f` and
/// evaluate the backward density under `g` (and vice versa); rejection keeps
/// the position and flips `s`.
pub fn ijump_step(
    state: &IjumpState,
    f: &dyn ProposalKernel,
    g: &dyn ProposalKernel,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<IjumpOutcome> {
    if state.s != 1 && state.s != -1 {
        return Err(Error::Domain(format!("direction flag must be +1 or -1, got {}", state.s)));
    }
    if state.x.len() != target.dim() {
        return Err(Error::DimensionMismatch("ijump state vs target".into()));
    }
    let (fwd, bwd): (&dyn ProposalKernel, &dyn ProposalKernel) =
        if state.s == 1 { (f, g) } else { (g, f) };
    let x_star = fwd.sample(&state.x, rng);
    let w = rng.uniform();
    let log_fwd = fwd.log_density(&x_star, &state.x);
    if log_fwd == f64::NEG_INFINITY {
        return Err(Error::ContractViolation(
            "forward proposal density is zero at a sampled point".into(),
        ));
    }
    let log_bwd = bwd.log_density(&state.x, &x_star);
    let log_rho =
        target.potential(&state.x) - target.potential(&x_star) + log_bwd - log_fwd;
    let accepted = crate::samplers::accept_with(w, log_rho);
    let next = if accepted {
        IjumpState { x: x_star.clone(), s: state.s }
    } else {
        IjumpState { x: state.x.clone(), s: -state.s }
    };
    Ok(IjumpOutcome { next, accepted, log_rho, proposal: x_star })
}
