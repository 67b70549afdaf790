//! The defining property of the HAMS family: on a standard-normal target
//! every proposal is accepted exactly, for any valid coefficients, while the
//! chain still moves. The same holds for the gradient-guided generalized-MH
//! kernel under any orthogonal invariance map.

use hams::gmh::{g2ms_step, G2msConfig, InvarianceMap};
use hams::models::MvnTarget;
use hams::params::{AbConfig, GeneralConfig, Variant};
use hams::samplers::{hams_ab_step, hams_general_step};
use hams::target::AugmentedState;
use hams::RngStream;
use nalgebra::DMatrix;

fn main() -> hams::Result<()> {
    let k = 20;
    let target = MvnTarget::standard(k);
    let mut rng = RngStream::new(1, 0);
    let steps = 20_000;

    for variant in [Variant::A, Variant::B] {
        let cfg = AbConfig::with_default_carryover(variant, 0.9)?;
        let mut s = AugmentedState::new(
            target.sample(&mut rng)?,
            rng.standard_normal_vector(k)?,
        )?;
        let mut worst: f64 = 0.0;
        let mut moved = 0.0;
        for _ in 0..steps {
            let out = hams_ab_step(&s, &cfg, &target, &mut rng)?;
            assert!(out.accepted);
            worst = worst.max(out.log_rho.abs());
            moved += (&out.next.x - &s.x).norm();
            s = out.next;
        }
        println!(
            "variant {variant}: {steps} steps, all accepted, max |log rho| = {worst:.2e}, \
             mean move = {:.2}",
            moved / steps as f64
        );
    }

    let cfg = GeneralConfig::new(0.8, 0.25, 0.6, 0.3)?;
    let mut s =
        AugmentedState::new(target.sample(&mut rng)?, rng.standard_normal_vector(k)?)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let out = hams_general_step(&s, &cfg, &target, &mut rng)?;
        assert!(out.accepted);
        worst = worst.max(out.log_rho.abs());
        s = out.next;
    }
    println!("general kernel: {steps} steps, all accepted, max |log rho| = {worst:.2e}");

    // gradient-guided generalized MH with a random rotation as the map
    let g = DMatrix::from_fn(k, k, |_, _| rng.standard_normal());
    let q = g.qr().q();
    let j = InvarianceMap::orthogonal(q)?;
    let a = DMatrix::identity(k, k) * 0.7;
    let cfg = G2msConfig::new(a, j, &target)?;
    let mut y = target.sample(&mut rng)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let out = g2ms_step(&y, &cfg, &target, &mut rng)?;
        assert!(out.accepted);
        worst = worst.max(out.log_rho.abs());
        y = out.next;
    }
    println!("g2ms with rotation map: {steps} steps, all accepted, max |log rho| = {worst:.2e}");
    Ok(())
}
