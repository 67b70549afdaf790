//! Burn-in step-size adaptation from acceptance rates.
//!
//! Every `window` iterations the observed acceptance rate is compared with a
//! target band; the step size moves through a pair of mappings that are
//! inverses of each other on the linear regime and curve near 1 so the step
//! size always stays in (0, 1].

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Adaptation policy.
#[derive(Clone, Copy, Debug)]
pub struct TuningPolicy {
    /// Acceptance rate to aim for: 0.70 for gradient kernels, 0.30 for RWM.
    pub target_rate: f64,
    /// Half-width of the no-adjustment band around the target.
    pub band_halfwidth: f64,
    /// Adjustment size.
    pub delta: f64,
    /// Iterations between adjustments.
    pub window: usize,
}

impl Default for TuningPolicy {
    fn default() -> Self {
        Self { target_rate: 0.70, band_halfwidth: 0.05, delta: 0.2, window: 250 }
    }
}

impl TuningPolicy {
    /// The random-walk policy (30% target).
    pub fn rwm() -> Self {
        Self { target_rate: 0.30, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if !(self.target_rate > 0.0 && self.target_rate < 1.0) {
            return Err(Error::Domain(format!(
                "target_rate must be in (0, 1), got {}",
                self.target_rate
            )));
        }
        if self.window == 0 {
            return Err(Error::Domain("window must be >= 1".into()));
        }
        Ok(())
    }
}

/// One adjustment: decrease by `max(1 - sqrt(1 - eps), eps / (1 + delta))`
/// when the rate is below the band, increase by
/// `eps + eps * min(1 - eps, delta)` when above, otherwise leave unchanged.
/// The result is always in (0, 1]; `eps = 1` is a fixed point of both
/// mappings.
pub fn adapt_step_size(epsilon: f64, observed_rate: f64, policy: &TuningPolicy) -> f64 {
    debug_assert!(epsilon > 0.0 && epsilon <= 1.0);
    if observed_rate < policy.target_rate - policy.band_halfwidth {
        (1.0 - (1.0 - epsilon).sqrt()).max(epsilon / (1.0 + policy.delta))
    } else if observed_rate > policy.target_rate + policy.band_halfwidth {
        epsilon + epsilon * (1.0 - epsilon).min(policy.delta)
    } else {
        epsilon
    }
}

/// One `(epsilon, rate)` pair per adaptation window.
pub type TuneTrace = Vec<(f64, f64)>;

/// Outcome of a tuning run.
#[derive(Clone, Debug)]
pub struct TuneOutcome {
    /// Step size in force when the burn-in ended.
    pub epsilon: f64,
    /// Windowed `(epsilon, rate)` history; `rate` was measured at that
    /// epsilon.
    pub trace: TuneTrace,
}

/// Drive `step` for `burn_in` iterations, adjusting the step size every
/// `policy.window` iterations. The closure advances the chain one step at
/// the given epsilon and reports whether the proposal was accepted.
pub fn tune_chain(
    mut step: impl FnMut(f64, &mut RngStream) -> Result<bool>,
    policy: &TuningPolicy,
    initial_epsilon: f64,
    burn_in: usize,
    rng: &mut RngStream,
) -> Result<TuneOutcome> {
    policy.validate()?;
    if burn_in < policy.window {
        return Err(Error::Config(format!(
            "burn_in ({burn_in}) must be at least one window ({})",
            policy.window
        )));
    }
    if !(initial_epsilon > 0.0 && initial_epsilon <= 1.0) {
        return Err(Error::Domain(format!(
            "initial epsilon must be in (0, 1], got {initial_epsilon}"
        )));
    }
    let mut epsilon = initial_epsilon;
    let mut trace = TuneTrace::new();
    let mut accepted = 0usize;
    let mut in_window = 0usize;
    for _ in 0..burn_in {
        accepted += step(epsilon, rng)? as usize;
        in_window += 1;
        if in_window == policy.window {
            let rate = accepted as f64 / in_window as f64;
            trace.push((epsilon, rate));
            epsilon = adapt_step_size(epsilon, rate, policy);
            accepted = 0;
            in_window = 0;
        }
    }
    Ok(TuneOutcome { epsilon, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn increase_has_fixed_point_at_one() {
        let p = TuningPolicy::default();
        assert_eq!(adapt_step_size(1.0, 0.99, &p), 1.0);
    }

    #[test]
    fn increase_example() {
        let p = TuningPolicy::default();
        assert_relative_eq!(adapt_step_size(0.5, 0.99, &p), 0.6, max_relative = 1e-15);
    }

    #[test]
    fn decrease_example() {
        // max(1 - sqrt(0.4), 0.6/1.2) = max(0.3675.., 0.5) = 0.5
        let p = TuningPolicy::default();
        assert_relative_eq!(adapt_step_size(0.6, 0.01, &p), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn in_band_is_unchanged() {
        let p = TuningPolicy::default();
        assert_eq!(adapt_step_size(0.37, 0.70, &p), 0.37);
        assert_eq!(adapt_step_size(0.37, 0.68, &p), 0.37);
    }

    #[test]
    fn always_accepting_chain_climbs_toward_one() {
        let p = TuningPolicy { window: 10, ..Default::default() };
        let mut rng = crate::RngStream::new(1, 0);
        let out = tune_chain(|_eps, _rng| Ok(true), &p, 0.1, 400, &mut rng).unwrap();
        let eps: Vec<f64> = out.trace.iter().map(|t| t.0).collect();
        assert!(eps.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.epsilon > 0.9, "{}", out.epsilon);
    }

    #[test]
    fn always_rejecting_chain_decays_toward_zero() {
        let p = TuningPolicy { window: 10, ..Default::default() };
        let mut rng = crate::RngStream::new(1, 0);
        let out = tune_chain(|_eps, _rng| Ok(false), &p, 0.9, 400, &mut rng).unwrap();
        let eps: Vec<f64> = out.trace.iter().map(|t| t.0).collect();
        assert!(eps.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.epsilon < 0.05, "{}", out.epsilon);
    }

    #[test]
    fn burn_in_must_cover_a_window() {
        let p = TuningPolicy::default();
        let mut rng = crate::RngStream::new(1, 0);
        assert!(tune_chain(|_e, _r| Ok(true), &p, 0.5, 100, &mut rng).is_err());
    }

    proptest! {
        #[test]
        fn mappings_invert_on_the_linear_regime(eps in 0.01..0.83f64) {
            // with delta = 0.2, the linear regime is eps <= 1 - delta
            let p = TuningPolicy::default();
            let up = adapt_step_size(eps, 1.0, &p);
            let back = adapt_step_size(up, 0.0, &p);
            prop_assert!((back - eps).abs() <= 1e-12);
        }

        #[test]
        fn mappings_keep_eps_in_unit_interval(eps in 0.001..=1.0f64, rate in 0.0..=1.0f64) {
            let p = TuningPolicy::default();
            let next = adapt_step_size(eps, rate, &p);
            prop_assert!(next > 0.0 && next <= 1.0);
        }

        #[test]
        fn adjustment_is_monotone_in_rate(eps in 0.01..=1.0f64, r1 in 0.0..=1.0f64, r2 in 0.0..=1.0f64) {
            prop_assume!(r1 < r2);
            let p = TuningPolicy::default();
            prop_assert!(adapt_step_size(eps, r1, &p) <= adapt_step_size(eps, r2, &p));
        }
    }
}
