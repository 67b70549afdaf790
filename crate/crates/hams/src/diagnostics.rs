//! Chain diagnostics: autocorrelation, Bartlett-window effective sample
//! size, per-coordinate ESS summaries, and batch-means standard errors.
//!
//! The ESS estimator divides the draw count by a truncated, Bartlett-tapered
//! autocorrelation sum: `ess = n / (1 + 2 sum_{k=1..K} (1 - k/K) rho(k))`.
//! Negative autocorrelations (common for the irreversible kernels) make the
//! denominator smaller than one, so an estimated ESS can legitimately exceed
//! the number of draws.

use nalgebra::DVector;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Autocorrelation estimates `rho(1..=max_lag)` with biased normalization
/// (autocovariances divided by `n` and by the lag-0 value).
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag == 0 {
        return Err(Error::Domain("max_lag must be >= 1".into()));
    }
    if n < max_lag + 2 {
        return Err(Error::Domain(format!(
            "series of length {n} is too short for max_lag {max_lag}"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;

    // FFT autocovariance: zero-pad the centered series to a power of two at
    // least 2n, so the circular convolution contains the linear one.
    let mut m = 1usize;
    while m < 2 * n {
        m <<= 1;
    }
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(m);
    buf.extend(series.iter().map(|&v| Complex::new(v - mean, 0.0)));
    buf.resize(m, Complex::new(0.0, 0.0));

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(m).process(&mut buf);

    // buf[k].re / m is now n * c(k) with c the biased autocovariance
    let c0 = buf[0].re / (m as f64 * n as f64);
    if !(c0 > 0.0) {
        return Err(Error::DegenerateSeries(format!("series variance is {c0}")));
    }
    Ok((1..=max_lag).map(|k| buf[k].re / (m as f64 * n as f64) / c0).collect())
}

/// Bartlett-window ESS with cutoff `k_cutoff` (clamped to `n - 2`).
///
/// The denominator is floored at `1/n`, so the estimate never exceeds `n^2`
/// and never divides by a nonpositive value; activation of the floor is
/// logged as a warning since it signals an unusable chain.
pub fn ess_bartlett(series: &[f64], k_cutoff: usize) -> Result<f64> {
    let n = series.len();
    if n < 10 {
        return Err(Error::Domain(format!("need at least 10 draws, got {n}")));
    }
    let k = k_cutoff.max(1).min(n - 2);
    let rho = acf(series, k)?;
    let mut s = 0.0;
    for (i, r) in rho.iter().enumerate() {
        let lag = (i + 1) as f64;
        s += (1.0 - lag / k as f64) * r;
    }
    let denom = 1.0 + 2.0 * s;
    let floor = 1.0 / n as f64;
    if denom < floor {
        log::warn!("ESS denominator {denom:.3e} fell below the 1/n floor; chain unusable");
    }
    Ok(n as f64 / denom.max(floor))
}

/// Per-coordinate ESS summary of a draws matrix.
#[derive(Clone, Debug)]
pub struct EssReport {
    /// ESS for each coordinate; `NaN` marks flagged (degenerate) ones.
    pub per_coordinate_ess: Vec<f64>,
    /// Indices of coordinates excluded as degenerate.
    pub flagged: Vec<usize>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub n: usize,
    pub k_used: usize,
    pub time_seconds: f64,
    pub min_ess_per_second: f64,
}

/// Apply [`ess_bartlett`] to every coordinate of `draws` and summarize.
///
/// Degenerate coordinates are flagged and excluded from the min/median/max;
/// it is an error for every coordinate to be degenerate.
pub fn summarize_chain(draws: &[DVector<f64>], wall_time: f64, k_cutoff: usize) -> Result<EssReport> {
    let n = draws.len();
    if n < 10 {
        return Err(Error::Domain(format!("need at least 10 draws, got {n}")));
    }
    let dim = draws[0].len();
    if dim == 0 {
        return Err(Error::Domain("draws must have at least one coordinate".into()));
    }
    let k_used = k_cutoff.max(1).min(n - 2);

    let mut per = vec![f64::NAN; dim];
    let mut flagged = Vec::new();
    let mut kept = Vec::new();
    let mut series = vec![0.0; n];
    for j in 0..dim {
        for (t, d) in draws.iter().enumerate() {
            series[t] = d[j];
        }
        match ess_bartlett(&series, k_used) {
            Ok(e) => {
                per[j] = e;
                kept.push(e);
            }
            Err(Error::DegenerateSeries(_)) => flagged.push(j),
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::DegenerateSeries("every coordinate is degenerate".into()));
    }
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min = kept[0];
    let max = kept[kept.len() - 1];
    let median = if kept.len() % 2 == 1 {
        kept[kept.len() / 2]
    } else {
        0.5 * (kept[kept.len() / 2 - 1] + kept[kept.len() / 2])
    };
    let min_ess_per_second = if wall_time > 0.0 { min / wall_time } else { 0.0 };
    Ok(EssReport {
        per_coordinate_ess: per,
        flagged,
        min,
        median,
        max,
        n,
        k_used,
        time_seconds: wall_time,
        min_ess_per_second,
    })
}

/// Batch-means standard error of the sample mean, with `floor(sqrt(n))`
/// batches.
pub fn batch_means_stderr(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 16 {
        return Err(Error::Domain(format!("need at least 16 draws, got {n}")));
    }
    let nb = (n as f64).sqrt().floor() as usize;
    let len = n / nb;
    let means: Vec<f64> = (0..nb)
        .map(|b| series[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / nb as f64;
    let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (nb - 1) as f64;
    Ok((var / nb as f64).sqrt())
}
