//! Bartlett-window effective sample size on synthetic AR(1) series, against
//! the closed form computed from the theoretical autocorrelations. Negative
//! correlation drives the estimate above the raw draw count.

use hams::diagnostics::{acf, batch_means_stderr, ess_bartlett};
use hams::RngStream;

fn main() -> hams::Result<()> {
    let n = 100_000;
    let k = 3000;
    println!("{:>6}  {:>10}  {:>10}  {:>7}", "phi", "ess", "closed", "rho(1)");
    for phi in [-0.5, 0.0, 0.5, 0.9] {
        let mut rng = RngStream::new(13, 0);
        let mut x = vec![0.0; n];
        x[0] = rng.standard_normal() / (1.0 - phi * phi as f64).sqrt();
        for t in 1..n {
            x[t] = phi * x[t - 1] + rng.standard_normal();
        }
        let ess = ess_bartlett(&x, k)?;
        let mut s = 0.0;
        for lag in 1..=k {
            s += (1.0 - lag as f64 / k as f64) * phi.powi(lag as i32);
        }
        let closed = n as f64 / (1.0 + 2.0 * s);
        let rho1 = acf(&x, 1)?[0];
        println!("{phi:>6}  {ess:>10.0}  {closed:>10.0}  {rho1:>7.3}");
    }

    let mut rng = RngStream::new(13, 1);
    let series: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    println!(
        "\nbatch-means standard error of a white-noise mean: {:.5} (theory {:.5})",
        batch_means_stderr(&series)?,
        1.0 / (n as f64).sqrt()
    );
    Ok(())
}
