//! Alternating Gibbs driver for latent-variable posteriors.
//!
//! A run has four stages. Stage 1 tunes the step sizes without
//! preconditioning; stage 2 holds them fixed and collects crude parameter
//! estimates; the preconditioning matrices are then evaluated once at the
//! stage-2 means and frozen; stage 3 re-tunes with preconditioning; stage 4
//! collects working draws. Both conditionals advance once per sweep, and
//! their momenta persist across sweeps.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{
    cox_param_expected_hessian, sv_param_expected_hessian, CoxLatentTarget, CoxParamTarget,
    SvLatentTarget, SvParamTarget, SvParams,
};
use crate::precondition::Preconditioner;
use crate::rng::RngStream;
use crate::samplers::driver::{ChainDriver, Method, MethodConfig};
use crate::target::{AugmentedState, Target};
use crate::tuning::{adapt_step_size, TuningPolicy};

/// A posterior with a latent block and a parameter block.
pub trait LatentParamModel: Sync {
    fn latent_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn theta_names(&self) -> Vec<String>;

    /// The latent conditional at the given (unconstrained) parameters.
    fn latent_target(&self, theta: &DVector<f64>) -> Result<Box<dyn Target>>;
    /// The parameter conditional at the given latents.
    fn param_target(&self, x: &DVector<f64>) -> Result<Box<dyn Target>>;

    /// Mass matrix for the latent block at `theta`.
    fn latent_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>>;
    /// Mass matrix for the parameter block at `theta`.
    fn param_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// Dispersed starting parameters (unconstrained scale).
    fn sample_initial_theta(&self, rng: &mut RngStream) -> DVector<f64>;
    fn initial_latent(&self) -> DVector<f64> {
        DVector::zeros(self.latent_dim())
    }

    /// Map unconstrained parameters to their natural reporting scale.
    fn theta_to_natural(&self, theta: &DVector<f64>) -> DVector<f64>;
}

// ---------------------------------------------------------------------------
// Stochastic volatility posterior
// ---------------------------------------------------------------------------

/// SV posterior over `(beta, alpha, gamma)` with `phi = tanh(alpha)`,
/// `sigma = exp(gamma)`.
pub struct SvPosterior {
    pub y: DVector<f64>,
}

impl LatentParamModel for SvPosterior {
    fn latent_dim(&self) -> usize {
        self.y.len()
    }
    fn param_dim(&self) -> usize {
        3
    }
    fn theta_names(&self) -> Vec<String> {
        vec!["beta".into(), "sigma".into(), "phi".into()]
    }
    fn latent_target(&self, theta: &DVector<f64>) -> Result<Box<dyn Target>> {
        let params = SvParams::new(theta[0], theta[2].exp(), theta[1].tanh())?;
        Ok(Box::new(SvLatentTarget::new(&self.y, &params)?))
    }
    fn param_target(&self, x: &DVector<f64>) -> Result<Box<dyn Target>> {
        Ok(Box::new(SvParamTarget::new(&self.y, x)?))
    }
    fn latent_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let params = SvParams::new(theta[0], theta[2].exp(), theta[1].tanh())?;
        let t = SvLatentTarget::new(&self.y, &params)?;
        Ok(t.expected_hessian().expect("latent hessian"))
    }
    fn param_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(sv_param_expected_hessian(theta[0], theta[1], theta[2], self.y.len()))
    }
    fn sample_initial_theta(&self, rng: &mut RngStream) -> DVector<f64> {
        let beta = 0.5 + 1.5 * rng.uniform();
        let sigma = 0.1 + 0.9 * rng.uniform();
        let phi = 0.3 * rng.uniform();
        DVector::from_row_slice(&[beta, phi.atanh(), sigma.ln()])
    }
    fn theta_to_natural(&self, theta: &DVector<f64>) -> DVector<f64> {
        DVector::from_row_slice(&[theta[0], theta[2].exp(), theta[1].tanh()])
    }
}

// ---------------------------------------------------------------------------
// Log-Gaussian Cox posterior
// ---------------------------------------------------------------------------

/// Cox posterior over `(phi1, phi2) = (log sigma^2, log beta)`.
pub struct CoxPosterior {
    pub m: usize,
    pub mu: f64,
    pub y: DVector<f64>,
}

impl LatentParamModel for CoxPosterior {
    fn latent_dim(&self) -> usize {
        self.m * self.m
    }
    fn param_dim(&self) -> usize {
        2
    }
    fn theta_names(&self) -> Vec<String> {
        vec!["sigma2".into(), "beta".into()]
    }
    fn latent_target(&self, theta: &DVector<f64>) -> Result<Box<dyn Target>> {
        Ok(Box::new(CoxLatentTarget::new(
            self.m,
            theta[0].exp(),
            theta[1].exp(),
            self.mu,
            &self.y,
        )?))
    }
    fn param_target(&self, x: &DVector<f64>) -> Result<Box<dyn Target>> {
        Ok(Box::new(CoxParamTarget::new(self.m, x)?))
    }
    fn latent_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let t = CoxLatentTarget::new(self.m, theta[0].exp(), theta[1].exp(), self.mu, &self.y)?;
        Ok(t.expected_hessian().expect("latent hessian"))
    }
    fn param_mass(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        cox_param_expected_hessian(theta[0], theta[1], self.m)
    }
    fn sample_initial_theta(&self, rng: &mut RngStream) -> DVector<f64> {
        let sigma2 = 0.25 + 3.75 * rng.uniform();
        let beta = 0.05 + 0.95 * rng.uniform();
        DVector::from_row_slice(&[sigma2.ln(), beta.ln()])
    }
    fn theta_to_natural(&self, theta: &DVector<f64>) -> DVector<f64> {
        DVector::from_row_slice(&[theta[0].exp(), theta[1].exp()])
    }
}

// ---------------------------------------------------------------------------
// The driver
// ---------------------------------------------------------------------------

/// Sweep counts for the four stages.
#[derive(Clone, Copy, Debug)]
pub struct GibbsSchedule {
    pub stage1_tune: usize,
    pub stage2_estimate: usize,
    pub stage3_tune: usize,
    pub stage4_collect: usize,
}

impl GibbsSchedule {
    fn validate(&self, window: usize) -> Result<()> {
        if self.stage1_tune < window || self.stage3_tune < window {
            return Err(Error::Config(format!(
                "tuning stages must cover at least one window ({window} sweeps)"
            )));
        }
        if self.stage2_estimate == 0 || self.stage4_collect == 0 {
            return Err(Error::Config("collection stages must be nonempty".into()));
        }
        Ok(())
    }
}

/// Gibbs-run configuration: one method per block plus the schedule.
pub struct GibbsConfig {
    pub latent: MethodConfig,
    /// `None` disables parameter updates (latent-only sampling at the
    /// initial parameters).
    pub param: Option<MethodConfig>,
    pub schedule: GibbsSchedule,
    pub policy: TuningPolicy,
    /// Fixed carryover used while unpreconditioned (stages 1-2).
    pub unpreconditioned_carryover: f64,
    /// Override the dispersed starting parameters.
    pub initial_theta: Option<DVector<f64>>,
}

/// Record of a Gibbs run.
#[derive(Clone, Debug)]
pub struct GibbsRecord {
    /// Natural-scale parameter draws from stage 4.
    pub theta_draws: Vec<DVector<f64>>,
    /// Natural-scale parameter trace over every sweep.
    pub theta_trace: Vec<DVector<f64>>,
    /// Cumulative sweep counts at the end of each stage.
    pub stage_bounds: [usize; 4],
    pub latent_acceptance: f64,
    pub param_acceptance: f64,
    pub epsilon_latent: f64,
    pub epsilon_param: f64,
    /// Number of times the preconditioners were evaluated (always 1).
    pub freeze_count: usize,
    pub final_latent: DVector<f64>,
}

struct BlockState {
    cfg: MethodConfig,
    epsilon: f64,
    state: AugmentedState,
    window_accepts: usize,
    window_steps: usize,
    stage_accepts: usize,
    stage_steps: usize,
}

impl BlockState {
    fn new(cfg: MethodConfig, x: DVector<f64>, rng: &mut RngStream) -> Result<Self> {
        let u = rng.standard_normal_vector(x.len())?;
        let epsilon = cfg.epsilon;
        Ok(Self {
            cfg,
            epsilon,
            state: AugmentedState::new(x, u)?,
            window_accepts: 0,
            window_steps: 0,
            stage_accepts: 0,
            stage_steps: 0,
        })
    }

    /// One step of the block's conditional; `precond = None` means identity.
    fn step(
        &mut self,
        target: &dyn Target,
        precond: Option<&Preconditioner>,
        fixed_carryover: Option<f64>,
        rng: &mut RngStream,
    ) -> Result<bool> {
        let mut cfg = self.cfg.clone();
        cfg.epsilon = self.epsilon;
        if let Some(c) = fixed_carryover {
            if matches!(cfg.method, Method::HamsA | Method::HamsB | Method::Udl | Method::Gmc) {
                cfg.carryover = Some(c);
            }
        } else if matches!(cfg.method, Method::HamsA | Method::HamsB | Method::Udl | Method::Gmc) {
            cfg.carryover = None; // default translation from epsilon
        }
        let mut driver = ChainDriver::new(cfg, target, precond, self.state.clone())?;
        let info = driver.step(rng)?;
        self.state = driver.into_state();
        self.window_accepts += info.accepted as usize;
        self.window_steps += 1;
        self.stage_accepts += info.accepted as usize;
        self.stage_steps += 1;
        Ok(info.accepted)
    }

    fn maybe_adapt(&mut self, policy: &TuningPolicy) {
        if self.window_steps >= policy.window {
            let rate = self.window_accepts as f64 / self.window_steps as f64;
            self.epsilon = adapt_step_size(self.epsilon, rate, policy);
            self.window_accepts = 0;
            self.window_steps = 0;
        }
    }

    fn reset_stage_counters(&mut self) {
        self.stage_accepts = 0;
        self.stage_steps = 0;
        self.window_accepts = 0;
        self.window_steps = 0;
    }

    fn stage_rate(&self) -> f64 {
        if self.stage_steps == 0 {
            0.0
        } else {
            self.stage_accepts as f64 / self.stage_steps as f64
        }
    }
}

/// Run the four-stage alternating scheme.
pub fn gibbs_run(
    model: &dyn LatentParamModel,
    cfg: &GibbsConfig,
    rng: &mut RngStream,
) -> Result<GibbsRecord> {
    cfg.policy.validate()?;
    cfg.schedule.validate(cfg.policy.window)?;
    if cfg.latent.method == Method::Pcnl || cfg.param.as_ref().is_some_and(|p| p.method == Method::Pcnl)
    {
        return Err(Error::Config(
            "pcnl is not supported inside the Gibbs driver (its prior covariance would need \
             refactoring every sweep)"
                .into(),
        ));
    }

    let mut theta = match &cfg.initial_theta {
        Some(t) => t.clone(),
        None => model.sample_initial_theta(rng),
    };
    let mut latent = BlockState::new(cfg.latent.clone(), model.initial_latent(), rng)?;
    let mut param = match &cfg.param {
        Some(pc) => Some(BlockState::new(pc.clone(), theta.clone(), rng)?),
        None => None,
    };

    let mut theta_trace = Vec::new();
    let mut theta_draws = Vec::new();
    let fixed_c = Some(cfg.unpreconditioned_carryover);

    let sweep = |latent: &mut BlockState,
                     param: &mut Option<BlockState>,
                     theta: &mut DVector<f64>,
                     p_lat: Option<&Preconditioner>,
                     p_par: Option<&Preconditioner>,
                     fc: Option<f64>,
                     rng: &mut RngStream|
     -> Result<()> {
        let lt = model.latent_target(theta)?;
        latent.step(&*lt, p_lat, fc, rng)?;
        if let Some(par) = param.as_mut() {
            let pt = model.param_target(&latent.state.x)?;
            par.step(&*pt, p_par, fc, rng)?;
            *theta = par.state.x.clone();
        }
        Ok(())
    };

    // stage 1: tune, no preconditioning
    for _ in 0..cfg.schedule.stage1_tune {
        sweep(&mut latent, &mut param, &mut theta, None, None, fixed_c, rng)?;
        latent.maybe_adapt(&cfg.policy);
        if let Some(par) = param.as_mut() {
            par.maybe_adapt(&cfg.policy);
        }
        theta_trace.push(model.theta_to_natural(&theta));
    }
    let b1 = theta_trace.len();

    // stage 2: fixed step sizes, crude estimates
    latent.reset_stage_counters();
    if let Some(par) = param.as_mut() {
        par.reset_stage_counters();
    }
    let mut theta_sum = DVector::zeros(theta.len());
    for _ in 0..cfg.schedule.stage2_estimate {
        sweep(&mut latent, &mut param, &mut theta, None, None, fixed_c, rng)?;
        theta_sum += &theta;
        theta_trace.push(model.theta_to_natural(&theta));
    }
    let theta_hat = theta_sum / cfg.schedule.stage2_estimate as f64;
    let b2 = theta_trace.len();

    // freeze: evaluate both preconditioners exactly once
    let p_lat = Preconditioner::from_mass(model.latent_mass(&theta_hat)?)?;
    let p_par = match &param {
        Some(_) => Some(Preconditioner::from_mass(model.param_mass(&theta_hat)?)?),
        None => None,
    };
    let freeze_count = 1;

    // stage 3: tune with preconditioning (default carryover translation).
    // The transform changes the step-size scale entirely, so adaptation
    // restarts from the configured initial value rather than the
    // unpreconditioned equilibrium.
    latent.reset_stage_counters();
    latent.epsilon = cfg.latent.epsilon;
    if let Some(par) = param.as_mut() {
        par.reset_stage_counters();
        par.epsilon = cfg.param.as_ref().expect("param config").epsilon;
    }
    for _ in 0..cfg.schedule.stage3_tune {
        sweep(&mut latent, &mut param, &mut theta, Some(&p_lat), p_par.as_ref(), None, rng)?;
        latent.maybe_adapt(&cfg.policy);
        if let Some(par) = param.as_mut() {
            par.maybe_adapt(&cfg.policy);
        }
        theta_trace.push(model.theta_to_natural(&theta));
    }
    let b3 = theta_trace.len();

    // stage 4: collect
    latent.reset_stage_counters();
    if let Some(par) = param.as_mut() {
        par.reset_stage_counters();
    }
    for _ in 0..cfg.schedule.stage4_collect {
        sweep(&mut latent, &mut param, &mut theta, Some(&p_lat), p_par.as_ref(), None, rng)?;
        let nat = model.theta_to_natural(&theta);
        theta_trace.push(nat.clone());
        theta_draws.push(nat);
    }
    let b4 = theta_trace.len();

    Ok(GibbsRecord {
        theta_draws,
        theta_trace,
        stage_bounds: [b1, b2, b3, b4],
        latent_acceptance: latent.stage_rate(),
        param_acceptance: param.as_ref().map(|p| p.stage_rate()).unwrap_or(0.0),
        epsilon_latent: latent.epsilon,
        epsilon_param: param.as_ref().map(|p| p.epsilon).unwrap_or(0.0),
        freeze_count,
        final_latent: latent.state.x,
    })
}
