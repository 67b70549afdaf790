//! The generalized Metropolis–Hastings framework: a sign-flip-invariant
//! bimodal target sampled by the gradient-guided kernel with J = -I, plus
//! the VAR(1) decomposition that writes any valid autoregressive proposal
//! as (symmetric step) x (orthogonal map).

use hams::gmh::{decompose_var1, g2ms_step, G2msConfig, InvarianceMap};
use hams::target::FnTarget;
use hams::RngStream;
use nalgebra::{DMatrix, DVector};

fn main() -> hams::Result<()> {
    // equal mixture of N(+m, I) and N(-m, I): invariant under y -> -y
    let m = DVector::from_row_slice(&[1.5, 0.0]);
    let mc = m.clone();
    let target = FnTarget::new(
        2,
        move |y: &DVector<f64>| {
            let a = -0.5 * (y - &m).norm_squared();
            let b = -0.5 * (y + &m).norm_squared();
            let hi = a.max(b);
            -(hi + ((a - hi).exp() + (b - hi).exp()).ln())
        },
        move |y: &DVector<f64>| {
            let a = -0.5 * (y - &mc).norm_squared();
            let b = -0.5 * (y + &mc).norm_squared();
            let wa = 1.0 / (1.0 + (b - a).exp());
            (y - &mc) * wa + (y + &mc) * (1.0 - wa)
        },
    );

    let j = InvarianceMap::sign_flip(2);
    let a = DMatrix::identity(2, 2) * 0.5;
    let cfg = G2msConfig::new(a, j, &target)?;

    let mut rng = RngStream::new(31, 0);
    let mut y = DVector::from_row_slice(&[1.5, 0.0]);
    let n = 100_000;
    let (mut e1, mut e11, mut e22, mut crossings) = (0.0, 0.0, 0.0, 0usize);
    let mut last_sign = y[0] > 0.0;
    for _ in 0..n {
        let out = g2ms_step(&y, &cfg, &target, &mut rng)?;
        y = out.next;
        e1 += y[0];
        e11 += y[0] * y[0];
        e22 += y[1] * y[1];
        let sign = y[0] > 0.0;
        crossings += (sign != last_sign) as usize;
        last_sign = sign;
    }
    let nf = n as f64;
    println!("bimodal target, {n} kernel steps:");
    println!("  E[y1]   = {:+.4}   (truth  0)", e1 / nf);
    println!("  E[y1^2] = {:.4}   (truth  {:.2})", e11 / nf, 1.0 + 1.5f64 * 1.5);
    println!("  E[y2^2] = {:.4}   (truth  1.00)", e22 / nf);
    println!("  mode crossings: {crossings}");

    // any VAR(1) coefficient with a valid implied noise variance factors
    // into a symmetric A and an orthogonal J
    let btilde = DMatrix::from_row_slice(3, 3, &[
        0.9, 0.3, 0.0, //
        -0.2, 0.8, 0.1, //
        0.0, -0.1, 0.7,
    ]);
    let (atilde, jtilde) = decompose_var1(&btilde)?;
    let recon = (DMatrix::identity(3, 3) - &atilde) * &jtilde;
    println!(
        "var(1) split: ||(I-A)J - (I-B)|| = {:.2e}, ||J'J - I|| = {:.2e}",
        (recon - (DMatrix::identity(3, 3) - &btilde)).norm(),
        (jtilde.transpose() * &jtilde - DMatrix::identity(3, 3)).norm()
    );
    Ok(())
}
