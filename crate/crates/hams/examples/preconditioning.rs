//! Mass-matrix preconditioning on the stochastic-volatility latent field.
//!
//! The latent conditional has precision roughly C^{-1} + I/2, which is badly
//! scaled when the volatility process is persistent. Preconditioning with
//! that matrix turns the kernel nearly rejection-free and lifts the worst
//! coordinate's effective sample size by an order of magnitude, at the cost
//! of two triangular solves per iteration.

use hams::diagnostics::summarize_chain;
use hams::models::{simulate_sv_data, SvLatentTarget, SvParams};
use hams::precondition::Preconditioner;
use hams::samplers::driver::{ChainDriver, Method, MethodConfig};
use hams::target::{AugmentedState, Target};
use hams::RngStream;
use nalgebra::DVector;

fn main() -> hams::Result<()> {
    let t_len = 200;
    let params = SvParams::new(0.65, 0.15, 0.98)?;
    let mut rng = RngStream::new(11, 0);
    let (_x, y) = simulate_sv_data(t_len, params.beta, params.sigma, params.phi, &mut rng)?;
    let target = SvLatentTarget::new(&y, &params)?;
    let precond = Preconditioner::from_mass(target.expected_hessian().unwrap())?;

    let n = 4000;
    for (label, p, eps) in [
        ("without preconditioning", None, 0.05),
        ("with preconditioning", Some(&precond), 0.95),
    ] {
        let cfg = MethodConfig::new(Method::HamsA, eps);
        let mut chain_rng = RngStream::new(11, 1);
        let init = AugmentedState::new(
            DVector::zeros(t_len),
            chain_rng.standard_normal_vector(t_len)?,
        )?;
        let mut driver = ChainDriver::new(cfg, &target, p, init)?;
        // short warm-up, then collect
        for _ in 0..1000 {
            driver.step(&mut chain_rng)?;
        }
        let mut draws = Vec::with_capacity(n);
        let mut accepted = 0usize;
        for _ in 0..n {
            accepted += driver.step(&mut chain_rng)?.accepted as usize;
            draws.push(driver.current_x());
        }
        let report = summarize_chain(&draws, 0.0, 3000)?;
        println!(
            "{label:<25} eps {eps:<5} accept {:.2}  ess (min, median, max) = ({:.0}, {:.0}, {:.0})",
            accepted as f64 / n as f64,
            report.min,
            report.median,
            report.max
        );
    }
    Ok(())
}
