//! The HAMS transition kernels.
//!
//! The general kernel proposes a joint gradient step on `(x, u)` driven by
//! the coefficient matrix `A = [[a1 I, a2 I], [a2 I, a3 I]]` with noise
//! variance `2A - A^2`, then accepts against the backward transition taken
//! from the momentum-flipped proposal. Variants A and B are the two
//! single-noise specializations (`A` singular, resp. `2I - A` singular) with
//! the momentum-correction coefficient already folded into their updates.
//!
//! Rejections flip the momentum; accepted moves keep it, which is what makes
//! the chains irreversible. On a standard-normal target the acceptance ratio
//! is identically one.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::params::{AbConfig, GeneralConfig, Variant};
use crate::rng::RngStream;
use crate::samplers::{accept_with, StepOutcome};
use crate::target::{AugmentedState, Target};

// ---------------------------------------------------------------------------
// Variants A and B (single noise vector)
// ---------------------------------------------------------------------------

/// Deterministic part of a variant-A/B transition: the proposal and the
/// backward noise implied by a given `zeta`.
#[derive(Clone, Debug)]
pub struct AbProposal {
    pub x_star: DVector<f64>,
    pub u_star: DVector<f64>,
    pub zeta_star: DVector<f64>,
}

struct AbCore {
    proposal: AbProposal,
    log_rho: f64,
}

fn ab_core(
    state: &AugmentedState,
    pot0: f64,
    grad0: &DVector<f64>,
    cfg: &AbConfig,
    target: &dyn Target,
    zeta: &DVector<f64>,
) -> AbCore {
    let (a, b) = (cfg.a, cfg.b);
    let sab = cfg.sqrt_ab();
    let noise = cfg.noise_coeff();
    let two_a = 2.0 - a;

    let x_star = &state.x - a * grad0 + sab * &state.u + noise * zeta;
    let (pot_star, grad_star) = target.potential_and_grad(&x_star);
    let grad_sum = grad0 + &grad_star;

    // sqrt(b (2 - a - b)) shares the boundary roundoff guard with the
    // position-noise coefficient.
    let bco = (b * (2.0 - a - b)).max(0.0).sqrt();

    let (u_star, zeta_star) = match cfg.variant {
        Variant::A => {
            let u_star = (2.0 * b / two_a - 1.0) * &state.u - (sab / two_a) * &grad_sum
                + (2.0 * bco / two_a) * zeta;
            let zeta_star = (1.0 - 2.0 * b / two_a) * zeta - (noise / two_a) * &grad_sum
                + (2.0 * bco / two_a) * &state.u;
            (u_star, zeta_star)
        }
        Variant::B => {
            let u_star = &state.u - (sab / two_a) * &grad_sum;
            let zeta_star = zeta - (noise / two_a) * &grad_sum;
            (u_star, zeta_star)
        }
    };

    let log_rho = (pot0 + 0.5 * state.u.norm_squared()) - (pot_star + 0.5 * u_star.norm_squared())
        + 0.5 * zeta.norm_squared()
        - 0.5 * zeta_star.norm_squared();

    AbCore { proposal: AbProposal { x_star, u_star, zeta_star }, log_rho }
}

fn check_ab_dims(state: &AugmentedState, target: &dyn Target, zeta: &DVector<f64>) -> Result<()> {
    if state.dim() != target.dim() || zeta.len() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {}, noise dim {}, target dim {}",
            state.dim(),
            zeta.len(),
            target.dim()
        )));
    }
    Ok(())
}

/// Forward map of the variant-A/B kernel with explicit noise.
pub fn hams_ab_forward(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    zeta: &DVector<f64>,
) -> Result<AbProposal> {
    check_ab_dims(state, target, zeta)?;
    let (pot0, grad0) = target.potential_and_grad(&state.x);
    Ok(ab_core(state, pot0, &grad0, cfg, target, zeta).proposal)
}

/// One variant-A/B transition with explicit noise and acceptance variate.
pub fn hams_ab_step_with_noise(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    zeta: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    check_ab_dims(state, target, zeta)?;
    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let core = ab_core(state, pot0, &grad0, cfg, target, zeta);
    Ok(finish_ab(state, core, w))
}

fn finish_ab(state: &AugmentedState, core: AbCore, w: f64) -> StepOutcome {
    let proposal = AugmentedState { x: core.proposal.x_star, u: core.proposal.u_star };
    let accepted = accept_with(w, core.log_rho);
    let next = if accepted { proposal.clone() } else { state.flip_momentum() };
    StepOutcome { next, accepted, log_rho: core.log_rho, proposal }
}

/// One variant-A/B transition. Draws `k` normals then one uniform.
pub fn hams_ab_step(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let zeta = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    hams_ab_step_with_noise(state, cfg, target, &zeta, w)
}

/// Variant-A transition; errors if `cfg` selects variant B.
pub fn hams_a_step(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    if cfg.variant != Variant::A {
        return Err(Error::Config("hams_a_step requires a variant-A config".into()));
    }
    hams_ab_step(state, cfg, target, rng)
}

/// Variant-B transition; errors if `cfg` selects variant A.
pub fn hams_b_step(
    state: &AugmentedState,
    cfg: &AbConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    if cfg.variant != Variant::B {
        return Err(Error::Config("hams_b_step requires a variant-B config".into()));
    }
    hams_ab_step(state, cfg, target, rng)
}

// ---------------------------------------------------------------------------
// General kernel (two noise vectors)
// ---------------------------------------------------------------------------

/// Forward map of the general kernel: proposal plus the backward noises.
#[derive(Clone, Debug)]
pub struct GeneralProposal {
    pub x_star: DVector<f64>,
    pub u_star: DVector<f64>,
    pub z1_star: DVector<f64>,
    pub z2_star: DVector<f64>,
}

/// Forward map of the general kernel with explicit noises `(z1, z2)`.
pub fn hams_general_forward(
    state: &AugmentedState,
    cfg: &GeneralConfig,
    target: &dyn Target,
    z1: &DVector<f64>,
    z2: &DVector<f64>,
) -> Result<GeneralProposal> {
    if state.dim() != target.dim() || z1.len() != target.dim() || z2.len() != target.dim() {
        return Err(Error::DimensionMismatch("general forward: dimensions disagree".into()));
    }
    let grad0 = target.gradient(&state.x);
    Ok(general_forward_inner(state, cfg, target, &grad0, z1, z2).0)
}

fn general_forward_inner(
    state: &AugmentedState,
    cfg: &GeneralConfig,
    target: &dyn Target,
    grad0: &DVector<f64>,
    z1: &DVector<f64>,
    z2: &DVector<f64>,
) -> (GeneralProposal, f64) {
    let (a1, a2, a3, phi) = (cfg.a1, cfg.a2, cfg.a3, cfg.phi);
    let zt1 = z1 - a1 * grad0 + a2 * &state.u;
    let zt2 = z2 - a2 * grad0 + a3 * &state.u;
    let x_star = &state.x + &zt1;
    let (pot_star, grad_star) = target.potential_and_grad(&x_star);
    let u_star = -&state.u + &zt2 + phi * (&zt1 + grad0 - &grad_star);
    let z1_star = &zt1 - a1 * &grad_star - a2 * &u_star;
    let z2_star = &zt2 - a2 * &grad_star - a3 * &u_star;
    (GeneralProposal { x_star, u_star, z1_star, z2_star }, pot_star)
}

/// One general-kernel transition with explicit noises and uniform.
///
/// Requires a strictly nonsingular noise variance (`a1 a3 > a2^2` and
/// `a1 + a3 < 2`); the singular boundary cases are exactly what variants
/// A and B implement with a single noise vector.
pub fn hams_general_step_with_noise(
    state: &AugmentedState,
    cfg: &GeneralConfig,
    target: &dyn Target,
    z1: &DVector<f64>,
    z2: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    if !cfg.is_nonsingular() {
        return Err(Error::Config(
            "noise variance 2A - A^2 is singular; use the variant-A/B kernels, \
             which are built for the singular cases"
                .into(),
        ));
    }
    if state.dim() != target.dim() || z1.len() != target.dim() || z2.len() != target.dim() {
        return Err(Error::DimensionMismatch("general step: dimensions disagree".into()));
    }

    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let (prop, pot_star) = general_forward_inner(state, cfg, target, &grad0, z1, z2);

    // Per-coordinate quadratic forms under the 2x2 block inverse of 2A - A^2.
    let [v11, v12, v22] = cfg.noise_variance_2x2();
    let det = v11 * v22 - v12 * v12;
    let quad = |p: &DVector<f64>, q: &DVector<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..p.len() {
            s += v22 * p[i] * p[i] - 2.0 * v12 * p[i] * q[i] + v11 * q[i] * q[i];
        }
        s / det
    };

    let log_rho = (pot0 + 0.5 * state.u.norm_squared())
        - (pot_star + 0.5 * prop.u_star.norm_squared())
        + 0.5 * quad(z1, z2)
        - 0.5 * quad(&prop.z1_star, &prop.z2_star);

    let proposal = AugmentedState { x: prop.x_star, u: prop.u_star };
    let accepted = accept_with(w, log_rho);
    let next = if accepted { proposal.clone() } else { state.flip_momentum() };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One general-kernel transition. Draws `2k` normals then one uniform.
///
/// The noises are sampled through the per-coordinate 2x2 Cholesky factor of
/// the blocks of `2A - A^2`, so sampling is O(k) rather than O(k^2).
pub fn hams_general_step(
    state: &AugmentedState,
    cfg: &GeneralConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    if !cfg.is_nonsingular() {
        return Err(Error::Config(
            "noise variance 2A - A^2 is singular; use the variant-A/B kernels, \
             which are built for the singular cases"
                .into(),
        ));
    }
    let k = target.dim();
    let [v11, v12, v22] = cfg.noise_variance_2x2();
    let l11 = v11.sqrt();
    let l21 = v12 / l11;
    let l22 = (v22 - l21 * l21).sqrt();

    let e1 = rng.standard_normal_vector(k)?;
    let e2 = rng.standard_normal_vector(k)?;
    let z1 = l11 * &e1;
    let z2 = l21 * &e1 + l22 * &e2;
    let w = rng.uniform();
    hams_general_step_with_noise(state, cfg, target, &z1, &z2, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MvnTarget;
    use approx::assert_relative_eq;

    fn state(x: &[f64], u: &[f64]) -> AugmentedState {
        AugmentedState::new(DVector::from_row_slice(x), DVector::from_row_slice(u)).unwrap()
    }

    // Frozen from a line-by-line transcription of the update formulas,
    // evaluated independently before this module was written.
    const X_STAR: f64 = -0.5378679656440357;
    const A_U_STAR: f64 = -0.5000000000000001;
    const A_ZETA_STAR: f64 = -0.3000000000000001;
    const A_LOG_RHO: f64 = 1.4213961030678928;
    const B_U_STAR: f64 = -0.11617604580795238;
    const B_ZETA_STAR: f64 = -0.5714045207910319;
    const B_LOG_RHO: f64 = 1.4213961030678925;

    #[test]
    fn variant_a_matches_frozen_transcription() {
        let target = MvnTarget::isotropic(1, 4.0);
        let cfg = AbConfig::new(Variant::A, 0.5, 0.5).unwrap();
        let s = state(&[1.0], &[0.5]);
        let zeta = DVector::from_row_slice(&[0.3]);
        let out = hams_ab_step_with_noise(&s, &cfg, &target, &zeta, 0.5).unwrap();
        assert_relative_eq!(out.proposal.x[0], X_STAR, max_relative = 1e-14);
        assert_relative_eq!(out.proposal.u[0], A_U_STAR, max_relative = 1e-14);
        assert_relative_eq!(out.log_rho, A_LOG_RHO, max_relative = 1e-13);
        let prop = hams_ab_forward(&s, &cfg, &target, &zeta).unwrap();
        assert_relative_eq!(prop.zeta_star[0], A_ZETA_STAR, max_relative = 1e-14);
    }

    #[test]
    fn variant_b_matches_frozen_transcription() {
        let target = MvnTarget::isotropic(1, 4.0);
        let cfg = AbConfig::new(Variant::B, 0.5, 0.5).unwrap();
        let s = state(&[1.0], &[0.5]);
        let zeta = DVector::from_row_slice(&[0.3]);
        let out = hams_ab_step_with_noise(&s, &cfg, &target, &zeta, 0.5).unwrap();
        assert_relative_eq!(out.proposal.x[0], X_STAR, max_relative = 1e-14);
        assert_relative_eq!(out.proposal.u[0], B_U_STAR, max_relative = 1e-14);
        assert_relative_eq!(out.log_rho, B_LOG_RHO, max_relative = 1e-13);
        let prop = hams_ab_forward(&s, &cfg, &target, &zeta).unwrap();
        assert_relative_eq!(prop.zeta_star[0], B_ZETA_STAR, max_relative = 1e-14);
    }

    #[test]
    fn rejection_free_on_standard_normal() {
        let target = MvnTarget::standard(5);
        let mut rng = crate::RngStream::new(11, 0);
        for variant in [Variant::A, Variant::B] {
            let cfg = AbConfig::with_default_carryover(variant, 0.8).unwrap();
            let mut s = state(&[0.3, -1.0, 0.2, 0.0, 2.0], &[0.1, 0.0, -0.4, 1.0, 0.0]);
            for _ in 0..2000 {
                let out = hams_ab_step(&s, &cfg, &target, &mut rng).unwrap();
                assert!(out.accepted);
                assert!(out.log_rho.abs() <= 1e-8, "variant {variant}: {}", out.log_rho);
                s = out.next;
            }
        }
    }

    #[test]
    fn general_rejection_free_on_standard_normal() {
        let target = MvnTarget::standard(5);
        let cfg = GeneralConfig::new(0.7, 0.3, 0.6, 0.25).unwrap();
        let mut rng = crate::RngStream::new(12, 0);
        let mut s = state(&[0.5; 5], &[0.0; 5]);
        for _ in 0..2000 {
            let out = hams_general_step(&s, &cfg, &target, &mut rng).unwrap();
            assert!(out.accepted);
            assert!(out.log_rho.abs() <= 1e-8);
            s = out.next;
        }
    }

    #[test]
    fn general_singular_config_is_rejected_with_guidance() {
        let target = MvnTarget::standard(2);
        // a1 a3 = a2^2 exactly: singular
        let cfg = GeneralConfig::new(0.5, 0.5, 0.5, 0.0).unwrap();
        let s = state(&[0.0, 0.0], &[0.0, 0.0]);
        let mut rng = crate::RngStream::new(1, 0);
        let err = hams_general_step(&s, &cfg, &target, &mut rng).unwrap_err();
        assert!(err.to_string().contains("variant-A/B"));
    }

    #[test]
    fn general_reverse_map_is_an_involution() {
        let target = MvnTarget::isotropic(3, 0.7);
        let cfg = GeneralConfig::new(0.9, 0.2, 0.5, 0.4).unwrap();
        let mut rng = crate::RngStream::new(13, 0);
        for _ in 0..200 {
            let s = AugmentedState::new(
                rng.standard_normal_vector(3).unwrap(),
                rng.standard_normal_vector(3).unwrap(),
            )
            .unwrap();
            let z1 = rng.standard_normal_vector(3).unwrap();
            let z2 = rng.standard_normal_vector(3).unwrap();
            let fwd = hams_general_forward(&s, &cfg, &target, &z1, &z2).unwrap();
            let flipped = AugmentedState::new(fwd.x_star.clone(), -&fwd.u_star).unwrap();
            let back =
                hams_general_forward(&flipped, &cfg, &target, &(-&fwd.z1_star), &(-&fwd.z2_star))
                    .unwrap();
            assert!((&back.x_star - &s.x).norm() <= 1e-10);
            assert!((&back.u_star + &s.u).norm() <= 1e-10);
        }
    }

    #[test]
    fn general_with_zero_cross_term_matches_gradient_marginal() {
        // a2 = 0, phi = 0: the x-update is x - a1 grad + Z1 with
        // Var(Z1) = (2 a1 - a1^2) I = 0.75 I at a1 = 0.5.
        let target = MvnTarget::standard(4);
        let cfg = GeneralConfig::new(0.5, 0.0, 0.5, 0.0).unwrap();
        let mut rng = crate::RngStream::new(14, 0);
        let s = AugmentedState::new(
            rng.standard_normal_vector(4).unwrap(),
            rng.standard_normal_vector(4).unwrap(),
        )
        .unwrap();
        let z1 = rng.standard_normal_vector(4).unwrap();
        let z2 = rng.standard_normal_vector(4).unwrap();
        let fwd = hams_general_forward(&s, &cfg, &target, &z1, &z2).unwrap();
        let expect = &s.x - 0.5 * target.gradient(&s.x) + &z1;
        assert!((fwd.x_star - expect).norm() < 1e-14);
        let [v11, _, _] = cfg.noise_variance_2x2();
        assert_relative_eq!(v11, 0.75, max_relative = 1e-15);
    }

    #[test]
    fn a_zero_boundary_runs_momentum_autoregression() {
        let target = MvnTarget::standard(3);
        let cfg = AbConfig::new(Variant::A, 0.0, 0.6).unwrap();
        let mut rng = crate::RngStream::new(15, 0);
        let mut s = state(&[0.4, -0.2, 1.0], &[0.0, 0.5, -0.5]);
        let x0 = s.x.clone();
        for _ in 0..200 {
            let out = hams_ab_step(&s, &cfg, &target, &mut rng).unwrap();
            assert!(out.accepted);
            assert!(out.log_rho.abs() <= 1e-12);
            s = out.next;
        }
        assert_eq!(s.x, x0);
    }
}
