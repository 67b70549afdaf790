//! Every kernel in the crate on one correlated Gaussian target, tuned to its
//! target acceptance rate during burn-in, compared by effective sample size.

use hams::diagnostics::summarize_chain;
use hams::models::MvnTarget;
use hams::params::GeneralConfig;
use hams::precondition::Preconditioner;
use hams::samplers::driver::{ChainDriver, Method, MethodConfig};
use hams::target::AugmentedState;
use hams::tuning::{tune_chain, TuningPolicy};
use hams::RngStream;

fn main() -> hams::Result<()> {
    let k = 30;
    let target = MvnTarget::ar1(k, 0.9);
    // a deliberately imperfect preconditioner, built as if the correlation
    // had been estimated at 0.8: an exact one would make every kernel in
    // the HAMS family rejection-free here and leave nothing to compare
    let precond = Preconditioner::from_mass(MvnTarget::ar1(k, 0.8).precision().clone())?;
    let (burn_in, n) = (3000, 8000);

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
    println!(
        "{:>13}  {:>7} {:>7}  {:>8} {:>8} {:>8}",
        "method", "eps", "accept", "ess min", "median", "max"
    );
    for (mi, method) in methods.into_iter().enumerate() {
        let mut cfg = MethodConfig::new(method, 0.5).with_nleap(10);
        if method == Method::HamsGeneral {
            cfg = cfg.with_general(GeneralConfig::new(0.7, 0.25, 0.6, 0.3)?);
        }
        let mut rng = RngStream::new(61, mi as u64);
        let init = AugmentedState::new(
            target.sample(&mut rng)?,
            rng.standard_normal_vector(k)?,
        )?;
        // pCNL reads the target covariance as its prior; everything else
        // uses the expected-Hessian mass matrix
        let mut driver = ChainDriver::new(cfg, &target, Some(&precond), init)?;

        let policy = if method == Method::Rwm {
            TuningPolicy { band_halfwidth: 0.1, ..TuningPolicy::rwm() }
        } else {
            TuningPolicy { band_halfwidth: 0.1, ..Default::default() }
        };
        // the general kernel has fixed coefficients; skip adaptation
        let epsilon = if method == Method::HamsGeneral {
            driver.epsilon()
        } else {
            let outcome = tune_chain(
                |eps, r| {
                    driver.set_epsilon(eps);
                    driver.step(r).map(|i| i.accepted)
                },
                &policy,
                0.5,
                burn_in,
                &mut rng,
            )?;
            driver.set_epsilon(outcome.epsilon);
            outcome.epsilon
        };

        let mut draws = Vec::with_capacity(n);
        let mut accepted = 0usize;
        for _ in 0..n {
            accepted += driver.step(&mut rng)?.accepted as usize;
            draws.push(driver.current_x());
        }
        let report = summarize_chain(&draws, 0.0, 3000)?;
        println!(
            "{:>13}  {:>7.3} {:>7.3}  {:>8.0} {:>8.0} {:>8.0}",
            method.name(),
            epsilon,
            accepted as f64 / n as f64,
            report.min,
            report.median,
            report.max
        );
    }
    Ok(())
}
