//! Seeded, stream-split randomness.
//!
//! Every source of randomness in this crate flows through [`RngStream`], a
//! ChaCha8 generator addressed by a `(seed, stream_id)` pair. ChaCha has a
//! fixed cross-platform specification, and the standard-normal variates come
//! from the ziggurat algorithm in `rand_distr` (version pinned in the
//! lockfile), so a given `(seed, stream_id)` reproduces the exact same
//! bit stream on every platform for a fixed build of this crate.
//!
//! Chains never share a stream: parallel chains and repetitions each get
//! their own `stream_id` derived from the experiment layout.

use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    /// A fresh stream with the same seed and a different stream id.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform variate on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Single standard-normal variate (ziggurat).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Poisson variate with the given mean.
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::Domain(format!("poisson mean must be finite and >= 0, got {mean}")));
        }
        if mean == 0.0 {
            return Ok(0);
        }
        let d = rand_distr::Poisson::new(mean)
            .map_err(|e| Error::Domain(format!("poisson({mean}): {e}")))?;
        Ok(d.sample(&mut self.inner) as u64)
    }

    /// Vector of `k` independent standard-normal variates.
    pub fn standard_normal_vector(&mut self, k: usize) -> Result<DVector<f64>> {
        if k == 0 {
            return Err(Error::ContractViolation(
                "standard_normal_vector requires k >= 1".into(),
            ));
        }
        Ok(DVector::from_fn(k, |_, _| self.standard_normal()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_are_bit_identical() {
        let mut a = RngStream::new(1, 0);
        let mut b = RngStream::new(1, 0);
        let va = a.standard_normal_vector(3).unwrap();
        let vb = b.standard_normal_vector(3).unwrap();
        assert_eq!(va, vb);
        assert_eq!(a.uniform(), b.uniform());
    }

    #[test]
    fn different_streams_differ() {
        let mut a = RngStream::new(1, 0);
        let mut b = RngStream::new(1, 1);
        assert_ne!(
            a.standard_normal_vector(4).unwrap(),
            b.standard_normal_vector(4).unwrap()
        );
    }

    #[test]
    fn zero_length_vector_is_a_contract_violation() {
        let mut r = RngStream::new(1, 0);
        assert!(r.standard_normal_vector(0).is_err());
    }

    #[test]
    fn normal_moments_match_clt_bounds() {
        let mut r = RngStream::new(42, 0);
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let z = r.standard_normal();
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // 3 * stderr bounds for n = 1e6
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert!((var - 1.0).abs() < 0.005, "var {var}");
    }
}
