//! One-step transition kernels.
//!
//! Every kernel here is a pure function of `(state, config, target, rng)`:
//! it draws its noise and acceptance variates from the stream in a fixed,
//! documented order (noise first, then one uniform) and returns the next
//! state plus step metadata. Chains are folds over these steps; parallelism
//! happens at the whole-chain level with disjoint rng streams.
//!
//! Each kernel also has a `*_with_noise` companion taking the variates
//! explicitly, which is what the shared-noise equivalence tests and the
//! reverse-map checks drive.

mod baselines;
pub mod driver;
mod hams;

pub use baselines::{
    gmc_step, gmc_step_with_noise, grad_langevin_step, grad_langevin_step_with_noise, hmc_step,
    hmc_step_with_noise, leapfrog, udl_step, udl_step_with_noise,
};
pub use hams::{
    hams_a_step, hams_ab_forward, hams_ab_step, hams_ab_step_with_noise, hams_b_step,
    hams_general_forward, hams_general_step, hams_general_step_with_noise, AbProposal,
    GeneralProposal,
};

use crate::target::AugmentedState;

/// Result of one transition: the accepted-or-fallback state plus metadata.
///
/// `log_rho` is the unclamped log of the ratio inside `min(1, ·)` (it may
/// exceed zero); the acceptance test compares `min(0, log_rho)` against the
/// log of a uniform variate. On rejection the next state is the momentum
/// flip `(x, -u)` for the augmented kernels (GMC flips the refreshed
/// momentum), and the unchanged state for the position-only kernels.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: AugmentedState,
    pub accepted: bool,
    pub log_rho: f64,
    pub proposal: AugmentedState,
}

/// Baseline kernel selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Rwm,
    Pmala,
    PmalaStar,
    Pcnl,
    Hmc,
    Udl,
    Gmc,
}

/// Configuration for the baseline kernels of this module.
///
/// `epsilon` is the step size (required positive; the pMALA*/pCNL gradient
/// coefficient additionally needs `epsilon <= 1`). `c` is the momentum
/// carryover for UDL/GMC, `nleap` the leapfrog count for HMC.
#[derive(Clone, Copy, Debug)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub epsilon: f64,
    pub c: f64,
    pub nleap: usize,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, epsilon: f64, c: f64, nleap: usize) -> crate::Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(crate::Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        if matches!(kind, BaselineKind::PmalaStar | BaselineKind::Pcnl) && epsilon > 1.0 {
            return Err(crate::Error::Domain(format!(
                "epsilon must be in (0, 1] for this kernel, got {epsilon}"
            )));
        }
        if matches!(kind, BaselineKind::Udl | BaselineKind::Gmc) && !(0.0..=1.0).contains(&c) {
            return Err(crate::Error::Domain(format!("carryover c must be in [0, 1], got {c}")));
        }
        if kind == BaselineKind::Hmc && nleap == 0 {
            return Err(crate::Error::Domain("nleap must be >= 1".into()));
        }
        Ok(Self { kind, epsilon, c, nleap })
    }

    pub fn rwm(epsilon: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::Rwm, epsilon, 0.0, 0)
    }
    pub fn pmala(epsilon: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::Pmala, epsilon, 0.0, 0)
    }
    pub fn pmala_star(epsilon: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::PmalaStar, epsilon, 0.0, 0)
    }
    pub fn pcnl(epsilon: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::Pcnl, epsilon, 0.0, 0)
    }
    pub fn hmc(epsilon: f64, nleap: usize) -> crate::Result<Self> {
        Self::new(BaselineKind::Hmc, epsilon, 0.0, nleap)
    }
    pub fn udl(epsilon: f64, c: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::Udl, epsilon, c, 0)
    }
    pub fn gmc(epsilon: f64, c: f64) -> crate::Result<Self> {
        Self::new(BaselineKind::Gmc, epsilon, c, 0)
    }
}

/// Accept iff `log w < min(0, log_rho)`; a NaN ratio rejects.
pub(crate) fn accept_with(w: f64, log_rho: f64) -> bool {
    w.ln() < log_rho.min(0.0)
}
