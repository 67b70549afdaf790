//! Chain driving: a uniform interface over every kernel in this crate, with
//! optional preconditioning and per-chain caching.
//!
//! The single-noise HAMS variants run through the cached preconditioned step
//! (the identity preconditioner short-circuits, so the unpreconditioned path
//! is the same code). The leapfrog kernels and the general HAMS kernel run
//! in the transformed space of the preconditioner; the position-only kernels
//! take the covariance route directly.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::params::{carryover_to_b, default_b, step_to_a, AbConfig, GeneralConfig, Variant};
use crate::precondition::{precond_wrap, hams_precond_step, PrecondCache, Preconditioner};
use crate::rng::RngStream;
use crate::samplers::{
    gmc_step, grad_langevin_step, hams_general_step, hmc_step, udl_step, BaselineConfig,
    StepOutcome,
};
use crate::target::{AugmentedState, Target};

/// Sampler selector for experiment configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    HamsA,
    HamsB,
    HamsGeneral,
    Rwm,
    Pmala,
    PmalaStar,
    Pcnl,
    Hmc,
    Udl,
    Gmc,
}

impl Method {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "hams_a" => Method::HamsA,
            "hams_b" => Method::HamsB,
            "hams_general" => Method::HamsGeneral,
            "rwm" => Method::Rwm,
            "pmala" => Method::Pmala,
            "pmala_star" => Method::PmalaStar,
            "pcnl" => Method::Pcnl,
            "hmc" => Method::Hmc,
            "udl" => Method::Udl,
            "gmc" => Method::Gmc,
            other => {
                return Err(Error::Config(format!(
                    "unknown method '{other}' (expected one of hams_a, hams_b, hams_general, \
                     rwm, pmala, pmala_star, pcnl, hmc, udl, gmc)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::HamsA => "hams_a",
            Method::HamsB => "hams_b",
            Method::HamsGeneral => "hams_general",
            Method::Rwm => "rwm",
            Method::Pmala => "pmala",
            Method::PmalaStar => "pmala_star",
            Method::Pcnl => "pcnl",
            Method::Hmc => "hmc",
            Method::Udl => "udl",
            Method::Gmc => "gmc",
        }
    }

    /// Everything except the random walk uses gradients.
    pub fn is_gradient_based(&self) -> bool {
        *self != Method::Rwm
    }
}

/// A method with its tunables.
///
/// `carryover = None` selects the default translation: the variant's own
/// formula for HAMS-A/B, and the variant-A formula for UDL/GMC (used when
/// preconditioning makes the default meaningful). `Some(c)` pins the
/// carryover, the usual choice without preconditioning.
#[derive(Clone, Debug)]
pub struct MethodConfig {
    pub method: Method,
    pub epsilon: f64,
    pub carryover: Option<f64>,
    pub nleap: usize,
    pub general: Option<GeneralConfig>,
}

impl MethodConfig {
    pub fn new(method: Method, epsilon: f64) -> Self {
        Self { method, epsilon, carryover: None, nleap: 50, general: None }
    }

    pub fn with_carryover(mut self, c: f64) -> Self {
        self.carryover = Some(c);
        self
    }

    pub fn with_nleap(mut self, nleap: usize) -> Self {
        self.nleap = nleap;
        self
    }

    pub fn with_general(mut self, general: GeneralConfig) -> Self {
        self.general = Some(general);
        self
    }

    /// `(a, b)` for the single-noise HAMS kernels at the current epsilon.
    pub fn ab_config(&self) -> Result<AbConfig> {
        let variant = match self.method {
            Method::HamsA => Variant::A,
            Method::HamsB => Variant::B,
            _ => return Err(Error::Config(format!("{} has no (a, b) form", self.method.name()))),
        };
        let a = step_to_a(self.epsilon)?;
        let b = match self.carryover {
            Some(c) => carryover_to_b(a, c)?,
            None => default_b(a, variant)?,
        };
        AbConfig::new(variant, a, b)
    }

    /// Carryover for UDL/GMC: pinned, or translated from epsilon through the
    /// variant-A default.
    pub fn effective_carryover(&self) -> Result<f64> {
        match self.carryover {
            Some(c) => Ok(c),
            None => {
                let a = step_to_a(self.epsilon)?;
                Ok(default_b(a, Variant::A)? / (2.0 - a))
            }
        }
    }

    fn baseline(&self, kind: crate::samplers::BaselineKind) -> Result<BaselineConfig> {
        BaselineConfig::new(kind, self.epsilon, self.effective_carryover().unwrap_or(0.0), self.nleap)
    }
}

enum PrecondHolder<'a> {
    Borrowed(&'a Preconditioner),
    Identity(Preconditioner),
}

impl PrecondHolder<'_> {
    fn get(&self) -> &Preconditioner {
        match self {
            PrecondHolder::Borrowed(p) => p,
            PrecondHolder::Identity(p) => p,
        }
    }
}

enum ChainKind {
    /// Single-noise HAMS with the cached preconditioned step.
    HamsAb { cache: PrecondCache },
    /// Kernels run on the transformed target; the state holds `x~ = L' x`.
    Transformed,
    /// Position-only kernels with the covariance carried by the mass
    /// representation.
    Langevin,
}

/// Metadata from one driven step.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo {
    pub accepted: bool,
    pub log_rho: f64,
}

/// A single chain bound to a method, target, and optional preconditioner.
pub struct ChainDriver<'a> {
    cfg: MethodConfig,
    target: &'a dyn Target,
    p: PrecondHolder<'a>,
    kind: ChainKind,
    /// Original-space state for HamsAb/Langevin; transformed-space for
    /// Transformed kinds.
    state: AugmentedState,
}

impl<'a> ChainDriver<'a> {
    /// For pCNL, `precond` must carry the prior covariance (the kernel is
    /// the modified-coefficient Langevin step with that fixed covariance).
    pub fn new(
        cfg: MethodConfig,
        target: &'a dyn Target,
        precond: Option<&'a Preconditioner>,
        init: AugmentedState,
    ) -> Result<Self> {
        if init.dim() != target.dim() {
            return Err(Error::DimensionMismatch("initial state vs target".into()));
        }
        if cfg.method == Method::Pcnl && precond.is_none() {
            return Err(Error::Config(
                "pcnl needs its prior covariance supplied as the preconditioner".into(),
            ));
        }
        if cfg.method == Method::HamsGeneral && cfg.general.is_none() {
            return Err(Error::Config("hams_general needs explicit coefficients".into()));
        }
        let p = match precond {
            Some(p) => {
                if p.dim() != target.dim() {
                    return Err(Error::DimensionMismatch("preconditioner vs target".into()));
                }
                PrecondHolder::Borrowed(p)
            }
            None => PrecondHolder::Identity(Preconditioner::identity(target.dim())),
        };
        let (kind, state) = match cfg.method {
            Method::HamsA | Method::HamsB => {
                let cache = PrecondCache::new(target, p.get(), &init)?;
                (ChainKind::HamsAb { cache }, init)
            }
            Method::Hmc | Method::Udl | Method::Gmc | Method::HamsGeneral => {
                let x_tilde = p.get().mul_lt(&init.x);
                (ChainKind::Transformed, AugmentedState { x: x_tilde, u: init.u })
            }
            Method::Rwm | Method::Pmala | Method::PmalaStar | Method::Pcnl => {
                (ChainKind::Langevin, init)
            }
        };
        Ok(Self { cfg, target, p, kind, state })
    }

    pub fn method(&self) -> Method {
        self.cfg.method
    }

    pub fn epsilon(&self) -> f64 {
        self.cfg.epsilon
    }

    /// Retune the step size; the carryover policy is re-applied on the next
    /// step.
    pub fn set_epsilon(&mut self, epsilon: f64) {
        self.cfg.epsilon = epsilon;
    }

    /// Current position in the original space.
    pub fn current_x(&self) -> DVector<f64> {
        match self.kind {
            ChainKind::Transformed => self.p.get().solve_lt(&self.state.x),
            _ => self.state.x.clone(),
        }
    }

    /// Current state in the original space.
    pub fn current_state(&self) -> AugmentedState {
        AugmentedState { x: self.current_x(), u: self.state.u.clone() }
    }

    pub fn step(&mut self, rng: &mut RngStream) -> Result<StepInfo> {
        let out: StepOutcome = match &mut self.kind {
            ChainKind::HamsAb { cache } => {
                let ab = self.cfg.ab_config()?;
                hams_precond_step(&self.state, &ab, self.target, self.p.get(), rng, cache)?
            }
            ChainKind::Transformed => {
                let p = self.p.get();
                let wrapped = precond_wrap(self.target, p)?;
                match self.cfg.method {
                    Method::Hmc => {
                        let cfg = self.cfg.baseline(crate::samplers::BaselineKind::Hmc)?;
                        hmc_step(&self.state, &cfg, &wrapped, rng)?
                    }
                    Method::Udl => {
                        let cfg = self.cfg.baseline(crate::samplers::BaselineKind::Udl)?;
                        udl_step(&self.state, &cfg, &wrapped, rng)?
                    }
                    Method::Gmc => {
                        let cfg = self.cfg.baseline(crate::samplers::BaselineKind::Gmc)?;
                        gmc_step(&self.state, &cfg, &wrapped, rng)?
                    }
                    Method::HamsGeneral => {
                        let cfg = self.cfg.general.as_ref().expect("checked in new");
                        hams_general_step(&self.state, cfg, &wrapped, rng)?
                    }
                    _ => unreachable!(),
                }
            }
            ChainKind::Langevin => {
                let kind = match self.cfg.method {
                    Method::Rwm => crate::samplers::BaselineKind::Rwm,
                    Method::Pmala => crate::samplers::BaselineKind::Pmala,
                    Method::PmalaStar => crate::samplers::BaselineKind::PmalaStar,
                    Method::Pcnl => crate::samplers::BaselineKind::Pcnl,
                    _ => unreachable!(),
                };
                let cfg = self.cfg.baseline(kind)?;
                let p = match &self.p {
                    PrecondHolder::Borrowed(p) => Some(*p),
                    PrecondHolder::Identity(_) => None,
                };
                grad_langevin_step(&self.state, &cfg, self.target, p, rng)?
            }
        };
        let info = StepInfo { accepted: out.accepted, log_rho: out.log_rho };
        self.state = out.next;
        Ok(info)
    }

    /// Tear down into the original-space state.
    pub fn into_state(self) -> AugmentedState {
        self.current_state()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::MvnTarget;

    #[test]
    fn every_method_advances_and_stays_finite() {
        let target = MvnTarget::ar1(4, 0.5);
        let p = Preconditioner::from_mass(target.precision().clone()).unwrap();
        let mut rng = crate::RngStream::new(91, 0);
        let init = AugmentedState::new(
            rng.standard_normal_vector(4).unwrap(),
            rng.standard_normal_vector(4).unwrap(),
        )
        .unwrap();
        let methods = [
            Method::HamsA,
            Method::HamsB,
            Method::HamsGeneral,
            Method::Rwm,
            Method::Pmala,
            Method::PmalaStar,
            Method::Pcnl,
            Method::Hmc,
            Method::Udl,
            Method::Gmc,
        ];
        for method in methods {
            let mut cfg = MethodConfig::new(method, 0.6).with_nleap(3);
            if method == Method::HamsGeneral {
                cfg = cfg.with_general(GeneralConfig::new(0.6, 0.2, 0.5, 0.3).unwrap());
            }
            let mut driver = ChainDriver::new(cfg, &target, Some(&p), init.clone()).unwrap();
            let mut accepted = 0usize;
            for _ in 0..200 {
                let info = driver.step(&mut rng).unwrap();
                accepted += info.accepted as usize;
                assert!(info.log_rho.is_finite() || info.log_rho == f64::NEG_INFINITY);
            }
            let x = driver.current_x();
            assert!(x.iter().all(|v| v.is_finite()), "{method:?}");
            assert!(accepted > 0, "{method:?} never accepted");
        }
    }

    #[test]
    fn preconditioned_hams_driver_is_rejection_free_on_matched_target() {
        let target = MvnTarget::ar1(6, 0.8);
        let p = Preconditioner::from_mass(target.precision().clone()).unwrap();
        let mut rng = crate::RngStream::new(92, 0);
        let init = AugmentedState::new(
            target.sample(&mut rng).unwrap(),
            rng.standard_normal_vector(6).unwrap(),
        )
        .unwrap();
        let cfg = MethodConfig::new(Method::HamsA, 0.9);
        let mut driver = ChainDriver::new(cfg, &target, Some(&p), init).unwrap();
        for _ in 0..500 {
            let info = driver.step(&mut rng).unwrap();
            assert!(info.accepted);
            assert!(info.log_rho.abs() <= 1e-8);
        }
    }

    #[test]
    fn pcnl_requires_a_prior() {
        let target = MvnTarget::standard(2);
        let init = AugmentedState::new(DVector::zeros(2), DVector::zeros(2)).unwrap();
        assert!(ChainDriver::new(MethodConfig::new(Method::Pcnl, 0.5), &target, None, init).is_err());
    }
}
