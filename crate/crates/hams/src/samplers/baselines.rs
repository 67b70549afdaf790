//! Baseline kernels: random walk, Langevin-type position updates, and the
//! leapfrog-based momentum samplers (HMC, UDL, GMC).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::params::step_to_a;
use crate::precondition::Preconditioner;
use crate::rng::RngStream;
use crate::samplers::{accept_with, BaselineConfig, BaselineKind, StepOutcome};
use crate::target::{AugmentedState, Target};

// ---------------------------------------------------------------------------
// Position-only kernels: RWM, pMALA, pMALA*, pCNL
// ---------------------------------------------------------------------------

/// Gradient coefficient `kappa` for the position-only kernels: 0 for RWM,
/// `eps^2 / 2` for pMALA, `eps^2 / (1 + sqrt(1 - eps^2))` for pMALA*/pCNL.
fn langevin_kappa(cfg: &BaselineConfig) -> Result<f64> {
    Ok(match cfg.kind {
        BaselineKind::Rwm => 0.0,
        BaselineKind::Pmala => cfg.epsilon * cfg.epsilon / 2.0,
        BaselineKind::PmalaStar | BaselineKind::Pcnl => step_to_a(cfg.epsilon)?,
        _ => {
            return Err(Error::Config(format!(
                "{:?} is not a position-only kernel",
                cfg.kind
            )))
        }
    })
}

/// One position-only transition with explicit noise and uniform.
///
/// Proposes `x* = x0 - kappa Sigma grad U(x0) + eps L_Sigma z` and accepts by
/// the plain Metropolis–Hastings ratio with the Gaussian proposal density
/// `N(x* | x0 - kappa Sigma grad U(x0), eps^2 Sigma)`. `precond` carries
/// `Sigma` through its mass representation `M = Sigma^{-1}` (identity when
/// absent); pCNL is this kernel with `Sigma` fixed to the prior covariance.
/// The momentum component is passed through untouched.
pub fn grad_langevin_step_with_noise(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    precond: Option<&Preconditioner>,
    z: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    let k = target.dim();
    if state.dim() != k || z.len() != k {
        return Err(Error::DimensionMismatch("langevin step: dimensions disagree".into()));
    }
    let ident = Preconditioner::identity(k);
    let p = precond.unwrap_or(&ident);
    if p.dim() != k {
        return Err(Error::Config(format!(
            "preconditioner dim {} does not match target dim {}",
            p.dim(),
            k
        )));
    }
    let kappa = langevin_kappa(cfg)?;
    let eps = cfg.epsilon;

    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let drift0 = if kappa == 0.0 { DVector::zeros(k) } else { kappa * p.sigma_mul(&grad0) };
    let mean0 = &state.x - &drift0;
    let x_star = &mean0 + eps * p.sigma_half_mul(z);

    let log_rho = if cfg.kind == BaselineKind::Rwm {
        // symmetric proposal: densities cancel
        pot0 - target.potential(&x_star)
    } else {
        let (pot_star, grad_star) = target.potential_and_grad(&x_star);
        let mean_star = &x_star - kappa * p.sigma_mul(&grad_star);
        // forward exponent: x* - mean0 = eps L^{-T} z, so |L'(x* - mean0)|^2
        // equals eps^2 |z|^2 exactly
        let back = p.mass_quad(&(&state.x - &mean_star));
        pot0 - pot_star - back / (2.0 * eps * eps) + 0.5 * z.norm_squared()
    };

    let proposal = AugmentedState { x: x_star, u: state.u.clone() };
    let accepted = accept_with(w, log_rho);
    let next = if accepted { proposal.clone() } else { state.clone() };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One position-only transition. Draws `k` normals then one uniform.
pub fn grad_langevin_step(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    precond: Option<&Preconditioner>,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let z = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    grad_langevin_step_with_noise(state, cfg, target, precond, &z, w)
}

// ---------------------------------------------------------------------------
// Leapfrog and the momentum kernels
// ---------------------------------------------------------------------------

/// `nsteps` leapfrog iterations under unit mass: half kick, drift, half kick.
pub fn leapfrog(
    state: &AugmentedState,
    epsilon: f64,
    nsteps: usize,
    target: &dyn Target,
) -> AugmentedState {
    let grad0 = target.gradient(&state.x);
    let (x, u, _) = leapfrog_cached(&state.x, &state.u, &grad0, epsilon, nsteps, target);
    AugmentedState { x, u }
}

/// Leapfrog reusing a precomputed gradient at the initial position; returns
/// the final position, momentum, and gradient.
pub(crate) fn leapfrog_cached(
    x0: &DVector<f64>,
    u0: &DVector<f64>,
    grad0: &DVector<f64>,
    epsilon: f64,
    nsteps: usize,
    target: &dyn Target,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let half = epsilon / 2.0;
    let mut x = x0.clone();
    let mut u = u0.clone();
    let mut grad = grad0.clone();
    for _ in 0..nsteps {
        u -= half * &grad;
        x += epsilon * &u;
        grad = target.gradient(&x);
        u -= half * &grad;
    }
    (x, u, grad)
}

/// One HMC transition with an explicit fresh momentum and uniform.
pub fn hmc_step_with_noise(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    fresh_momentum: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    if cfg.kind != BaselineKind::Hmc {
        return Err(Error::Config("hmc_step requires an HMC config".into()));
    }
    if state.dim() != target.dim() || fresh_momentum.len() != target.dim() {
        return Err(Error::DimensionMismatch("hmc step: dimensions disagree".into()));
    }
    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let u0 = fresh_momentum.clone();
    let (x_star, u_star, _) =
        leapfrog_cached(&state.x, &u0, &grad0, cfg.epsilon, cfg.nleap.max(1), target);
    let pot_star = target.potential(&x_star);
    let log_rho =
        (pot0 + 0.5 * u0.norm_squared()) - (pot_star + 0.5 * u_star.norm_squared());
    let proposal = AugmentedState { x: x_star, u: u_star };
    let accepted = accept_with(w, log_rho);
    let next = if accepted {
        proposal.clone()
    } else {
        AugmentedState { x: state.x.clone(), u: -&u0 }
    };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One HMC transition: resample momentum, `nleap` leapfrogs, accept on the
/// energy difference, momentum flip on rejection. Draws `k` normals then one
/// uniform.
pub fn hmc_step(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let momentum = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    hmc_step_with_noise(state, cfg, target, &momentum, w)
}

/// One UDL transition with explicit noises `(z1, z2)` and uniform.
///
/// Two partial momentum refreshes with carryover `sqrt(c)` sandwich a single
/// leapfrog; the acceptance ratio is `H(x0, u+) - H(x*, u-)`. Rejection
/// returns `(x0, -u0)` with the pre-refresh momentum.
pub fn udl_step_with_noise(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    z1: &DVector<f64>,
    z2: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    if cfg.kind != BaselineKind::Udl {
        return Err(Error::Config("udl_step requires a UDL config".into()));
    }
    if state.dim() != target.dim() || z1.len() != target.dim() || z2.len() != target.dim() {
        return Err(Error::DimensionMismatch("udl step: dimensions disagree".into()));
    }
    let sc = cfg.c.sqrt();
    let sr = (1.0 - cfg.c).max(0.0).sqrt();
    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let u_plus = sc * &state.u + sr * z1;
    let (x_star, u_minus, _) = leapfrog_cached(&state.x, &u_plus, &grad0, cfg.epsilon, 1, target);
    let pot_star = target.potential(&x_star);
    let log_rho =
        (pot0 + 0.5 * u_plus.norm_squared()) - (pot_star + 0.5 * u_minus.norm_squared());
    let u_star = sc * &u_minus + sr * z2;
    let proposal = AugmentedState { x: x_star, u: u_star };
    let accepted = accept_with(w, log_rho);
    let next = if accepted { proposal.clone() } else { state.flip_momentum() };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One UDL transition. Draws `2k` normals then one uniform.
pub fn udl_step(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let z1 = rng.standard_normal_vector(target.dim())?;
    let z2 = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    udl_step_with_noise(state, cfg, target, &z1, &z2, w)
}

/// One GMC transition with an explicit noise and uniform.
///
/// Single refresh `u+`, one leapfrog, accept `(x*, u-)` on the energy
/// difference; rejection returns `(x0, -u+)` with the refreshed momentum
/// flipped.
pub fn gmc_step_with_noise(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    z1: &DVector<f64>,
    w: f64,
) -> Result<StepOutcome> {
    if cfg.kind != BaselineKind::Gmc {
        return Err(Error::Config("gmc_step requires a GMC config".into()));
    }
    if state.dim() != target.dim() || z1.len() != target.dim() {
        return Err(Error::DimensionMismatch("gmc step: dimensions disagree".into()));
    }
    let sc = cfg.c.sqrt();
    let sr = (1.0 - cfg.c).max(0.0).sqrt();
    let (pot0, grad0) = target.potential_and_grad(&state.x);
    let u_plus = sc * &state.u + sr * z1;
    let (x_star, u_minus, _) = leapfrog_cached(&state.x, &u_plus, &grad0, cfg.epsilon, 1, target);
    let pot_star = target.potential(&x_star);
    let log_rho =
        (pot0 + 0.5 * u_plus.norm_squared()) - (pot_star + 0.5 * u_minus.norm_squared());
    let proposal = AugmentedState { x: x_star, u: u_minus };
    let accepted = accept_with(w, log_rho);
    let next = if accepted {
        proposal.clone()
    } else {
        AugmentedState { x: state.x.clone(), u: -&u_plus }
    };
    Ok(StepOutcome { next, accepted, log_rho, proposal })
}

/// One GMC transition. Draws `k` normals then one uniform.
pub fn gmc_step(
    state: &AugmentedState,
    cfg: &BaselineConfig,
    target: &dyn Target,
    rng: &mut RngStream,
) -> Result<StepOutcome> {
    let z1 = rng.standard_normal_vector(target.dim())?;
    let w = rng.uniform();
    gmc_step_with_noise(state, cfg, target, &z1, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MvnTarget;
    use crate::target::FnTarget;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn state(x: &[f64], u: &[f64]) -> AugmentedState {
        AugmentedState::new(DVector::from_row_slice(x), DVector::from_row_slice(u)).unwrap()
    }

    #[test]
    fn rwm_on_flat_potential_always_accepts() {
        let flat = FnTarget::new(2, |_x| 0.0, |x| DVector::zeros(x.len()));
        let cfg = BaselineConfig::rwm(0.5).unwrap();
        let mut rng = crate::RngStream::new(31, 0);
        let s = state(&[0.0, 0.0], &[0.0, 0.0]);
        for _ in 0..50 {
            let out = grad_langevin_step(&s, &cfg, &flat, None, &mut rng).unwrap();
            assert!(out.accepted);
            assert_eq!(out.log_rho, 0.0);
        }
    }

    #[test]
    fn pmala_hand_evaluation() {
        // N(0,1), eps = 0.5, x0 = 1, z = 0: x* = 0.875, and the MH ratio
        // evaluates to 0.00732421875 (frozen from a manual density check).
        let target = MvnTarget::standard(1);
        let cfg = BaselineConfig::pmala(0.5).unwrap();
        let s = state(&[1.0], &[0.0]);
        let z = DVector::from_row_slice(&[0.0]);
        let out = grad_langevin_step_with_noise(&s, &cfg, &target, None, &z, 0.5).unwrap();
        assert_relative_eq!(out.proposal.x[0], 0.875, max_relative = 1e-15);
        assert_relative_eq!(out.log_rho, 0.00732421875, max_relative = 1e-12);
    }

    #[test]
    fn pmala_star_is_rejection_free_on_matched_normal() {
        let sigma = dmatrix![1.0, 0.6; 0.6, 1.4];
        let target = MvnTarget::from_covariance(&sigma).unwrap();
        let p = Preconditioner::from_covariance(&sigma).unwrap();
        let cfg = BaselineConfig::pmala_star(0.8).unwrap();
        let mut rng = crate::RngStream::new(32, 0);
        let mut s = state(&[1.0, -1.0], &[0.0, 0.0]);
        for _ in 0..2000 {
            let out = grad_langevin_step(&s, &cfg, &target, Some(&p), &mut rng).unwrap();
            assert!(out.accepted);
            assert!(out.log_rho.abs() <= 1e-8, "{}", out.log_rho);
            s = out.next;
        }
    }

    #[test]
    fn leapfrog_free_particle_drifts() {
        let flat = FnTarget::new(2, |_x| 0.0, |x| DVector::zeros(x.len()));
        let s = state(&[0.0, 1.0], &[1.0, -2.0]);
        let out = leapfrog(&s, 0.1, 7, &flat);
        assert_relative_eq!(out.x[0], 0.7, max_relative = 1e-14);
        assert_relative_eq!(out.x[1], 1.0 - 1.4, max_relative = 1e-14);
        assert_eq!(out.u, s.u);
    }

    #[test]
    fn leapfrog_harmonic_single_step() {
        let target = MvnTarget::standard(1);
        let s = state(&[1.0], &[0.0]);
        let out = leapfrog(&s, 0.1, 1, &target);
        assert_relative_eq!(out.x[0], 0.995, max_relative = 1e-15);
        assert_relative_eq!(out.u[0], -0.09975, max_relative = 1e-15);
    }

    #[test]
    fn leapfrog_energy_drift_is_bounded() {
        let target = MvnTarget::standard(1);
        let s = state(&[1.0], &[0.3]);
        let h0 = crate::hamiltonian(&s, &target).unwrap();
        let out = leapfrog(&s, 0.1, 100, &target);
        let h1 = crate::hamiltonian(&out, &target).unwrap();
        assert!((h1 - h0).abs() <= 1e-2, "drift {}", h1 - h0);
    }

    #[test]
    fn hmc_acceptance_approaches_one_as_eps_shrinks() {
        let target = MvnTarget::standard(3);
        let mut rng = crate::RngStream::new(33, 0);
        let s = state(&[1.0, 0.5, -0.2], &[0.0, 0.0, 0.0]);
        let cfg = BaselineConfig::hmc(1e-4, 3).unwrap();
        let out = hmc_step(&s, &cfg, &target, &mut rng).unwrap();
        assert!(out.log_rho.abs() < 1e-6);
        assert!(out.accepted);
    }

    #[test]
    fn hmc_small_eps_acceptance_rate() {
        let target = MvnTarget::standard(2);
        let cfg = BaselineConfig::hmc(0.05, 5).unwrap();
        let mut rng = crate::RngStream::new(34, 0);
        let mut s = state(&[0.5, -0.5], &[0.0, 0.0]);
        let mut accepted = 0usize;
        let n = 10_000;
        for _ in 0..n {
            let out = hmc_step(&s, &cfg, &target, &mut rng).unwrap();
            accepted += out.accepted as usize;
            s = out.next;
        }
        assert!(accepted as f64 / n as f64 >= 0.95);
    }

    #[test]
    fn hmc_single_leapfrog_matches_udl_without_carryover() {
        let target = MvnTarget::ar1(3, 0.4);
        let mut rng = crate::RngStream::new(35, 0);
        let s = AugmentedState::new(
            rng.standard_normal_vector(3).unwrap(),
            rng.standard_normal_vector(3).unwrap(),
        )
        .unwrap();
        let z1 = rng.standard_normal_vector(3).unwrap();
        let z2 = rng.standard_normal_vector(3).unwrap();
        let hmc_cfg = BaselineConfig::hmc(0.3, 1).unwrap();
        let udl_cfg = BaselineConfig::udl(0.3, 0.0).unwrap();
        let a = hmc_step_with_noise(&s, &hmc_cfg, &target, &z1, 0.4).unwrap();
        let b = udl_step_with_noise(&s, &udl_cfg, &target, &z1, &z2, 0.4).unwrap();
        assert!((&a.proposal.x - &b.proposal.x).norm() <= 1e-14);
        assert!((a.log_rho - b.log_rho).abs() <= 1e-14);
        assert_eq!(a.accepted, b.accepted);
    }

    #[test]
    fn udl_full_carryover_is_metropolized_leapfrog() {
        let target = MvnTarget::standard(2);
        let s = state(&[0.8, -0.6], &[0.4, 0.1]);
        let z1 = DVector::from_row_slice(&[9.0, -9.0]); // must be ignored at c=1
        let z2 = DVector::from_row_slice(&[7.0, 7.0]);
        let cfg = BaselineConfig::udl(0.3, 1.0).unwrap();
        let out = udl_step_with_noise(&s, &cfg, &target, &z1, &z2, 0.2).unwrap();
        let lf = leapfrog(&s, 0.3, 1, &target);
        assert!((&out.proposal.x - &lf.x).norm() <= 1e-14);
        assert!((&out.proposal.u - &lf.u).norm() <= 1e-14);
    }

    #[test]
    fn gmc_matches_udl_at_full_carryover() {
        let target = MvnTarget::ar1(2, 0.3);
        let s = state(&[0.5, 0.5], &[-0.3, 0.2]);
        let z1 = DVector::from_row_slice(&[1.0, -1.0]);
        let z2 = DVector::from_row_slice(&[0.3, 0.3]);
        let udl_cfg = BaselineConfig::udl(0.4, 1.0).unwrap();
        let gmc_cfg = BaselineConfig::gmc(0.4, 1.0).unwrap();
        let a = udl_step_with_noise(&s, &udl_cfg, &target, &z1, &z2, 0.9).unwrap();
        let b = gmc_step_with_noise(&s, &gmc_cfg, &target, &z1, 0.9).unwrap();
        assert!((&a.proposal.x - &b.proposal.x).norm() <= 1e-14);
        assert!((a.log_rho - b.log_rho).abs() <= 1e-14);
    }

    #[test]
    fn gmc_rejection_flips_refreshed_momentum() {
        // a steep quadratic with a huge step forces rejection
        let target = MvnTarget::isotropic(1, 50.0);
        let cfg = BaselineConfig::gmc(1.9, 0.5).unwrap();
        let s = state(&[2.0], &[0.7]);
        let z1 = DVector::from_row_slice(&[0.2]);
        let out = gmc_step_with_noise(&s, &cfg, &target, &z1, 0.999999).unwrap();
        assert!(!out.accepted);
        let u_plus = 0.5f64.sqrt() * 0.7 + 0.5f64.sqrt() * 0.2;
        assert_relative_eq!(out.next.u[0], -u_plus, max_relative = 1e-14);
        assert_eq!(out.next.x[0], 2.0);
    }

    #[test]
    fn gmc_long_run_mean_is_centered() {
        let target = MvnTarget::standard(1);
        let cfg = BaselineConfig::gmc(0.9, 0.5).unwrap();
        let mut rng = crate::RngStream::new(36, 0);
        let mut s = state(&[0.0], &[0.0]);
        s.x[0] = rng.standard_normal();
        s.u[0] = rng.standard_normal();
        let n = 200_000;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let out = gmc_step(&s, &cfg, &target, &mut rng).unwrap();
            s = out.next;
            draws.push(s.x[0]);
        }
        let mean = draws.iter().sum::<f64>() / n as f64;
        let se = crate::diagnostics::batch_means_stderr(&draws).unwrap();
        assert!(mean.abs() <= 3.0 * se, "mean {mean}, 3se {}", 3.0 * se);
    }
}
