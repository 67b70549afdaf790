//! Experiment targets: correlated multivariate normal, stochastic-volatility
//! latent/parameter conditionals, log-Gaussian Cox latent/parameter
//! conditionals, their data simulators, and the alternating Gibbs driver.

mod cox;
mod data_io;
mod gibbs;
mod mvn;
mod sv;

pub use cox::{
    cox_covariance, cox_param_expected_hessian, cox_param_potential_grad, simulate_cox_data,
    CoxLatentTarget, CoxParamTarget,
};
pub use data_io::{read_column_file, write_column_file};
pub use gibbs::{
    gibbs_run, CoxPosterior, GibbsConfig, GibbsRecord, GibbsSchedule, LatentParamModel,
    SvPosterior,
};
pub use mvn::MvnTarget;
pub use sv::{
    simulate_sv_data, sv_closed_form_covariance, sv_latent_potential_grad,
    sv_param_expected_hessian, sv_param_potential_grad, SvLatentTarget, SvParamTarget, SvParams,
};

/// Largest exponent argument the models will evaluate; beyond this the
/// potential is reported as infinite instead of silently saturating.
pub(crate) const EXP_ARG_LIMIT: f64 = 700.0;

pub(crate) fn guarded_exp(arg: f64) -> crate::Result<f64> {
    if arg.abs() > EXP_ARG_LIMIT {
        return Err(crate::Error::Domain(format!(
            "exp argument {arg} exceeds the overflow guard ({EXP_ARG_LIMIT})"
        )));
    }
    Ok(arg.exp())
}
