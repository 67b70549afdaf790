//! Burn-in step-size adaptation: the acceptance rate is measured every 250
//! iterations and the step size is nudged through a pair of inverse
//! mappings until the rate settles in the target band.

use hams::models::{simulate_sv_data, SvLatentTarget, SvParams};
use hams::precondition::Preconditioner;
use hams::samplers::driver::{ChainDriver, Method, MethodConfig};
use hams::target::{AugmentedState, Target};
use hams::tuning::{tune_chain, TuningPolicy};
use hams::RngStream;
use nalgebra::DVector;

fn main() -> hams::Result<()> {
    let t_len = 200;
    let params = SvParams::new(0.65, 0.15, 0.98)?;
    let mut rng = RngStream::new(21, 0);
    let (_x, y) = simulate_sv_data(t_len, params.beta, params.sigma, params.phi, &mut rng)?;
    let target = SvLatentTarget::new(&y, &params)?;
    let precond = Preconditioner::from_mass(target.expected_hessian().unwrap())?;

    let init = AugmentedState::new(DVector::zeros(t_len), rng.standard_normal_vector(t_len)?)?;
    let mut driver =
        ChainDriver::new(MethodConfig::new(Method::HamsA, 0.2), &target, Some(&precond), init)?;

    let policy = TuningPolicy { band_halfwidth: 0.1, ..Default::default() };
    let outcome = tune_chain(
        |eps, r| {
            driver.set_epsilon(eps);
            driver.step(r).map(|i| i.accepted)
        },
        &policy,
        0.2,
        5000,
        &mut rng,
    )?;

    println!("window  epsilon  rate");
    for (i, (eps, rate)) in outcome.trace.iter().enumerate() {
        let marker = if (rate - policy.target_rate).abs() <= policy.band_halfwidth {
            "  <- in band"
        } else {
            ""
        };
        println!("{i:>6}  {eps:<7.4}  {rate:.3}{marker}");
    }
    println!("frozen step size: {:.4}", outcome.epsilon);
    Ok(())
}
