//! Parameter algebra for the HAMS kernels.
//!
//! The user-facing configuration surface is `(epsilon, c)`: a step size in
//! [0, 1] and a momentum carryover in [0, 1]. Internally the kernels run on
//! `(a, b)` with `a = 1 - sqrt(1 - eps^2)` and `b = c (2 - a)`, or on the
//! general coefficient triple `(a1, a2, a3)`. This module holds the
//! translations, the default carryover choices that minimize the lag-1
//! autocovariance on a standard-normal target, and validity checks.

use crate::error::{Error, Result};

/// Which single-noise HAMS kernel to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    A,
    B,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::A => write!(f, "A"),
            Variant::B => write!(f, "B"),
        }
    }
}

/// Step size `a` from the user-facing step size `epsilon`.
///
/// `a = eps^2 / (1 + sqrt(1 - eps^2)) = 1 - sqrt(1 - eps^2)`.
pub fn step_to_a(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon must be in [0, 1], got {epsilon}")));
    }
    Ok(1.0 - (1.0 - epsilon * epsilon).sqrt())
}

/// Inverse of [`step_to_a`]: `eps = sqrt(a (2 - a))`.
pub fn epsilon_from_a(a: f64) -> f64 {
    (a * (2.0 - a)).max(0.0).sqrt()
}

/// Carryover `b = c (2 - a)`; `b <= 2 - a` holds automatically.
pub fn carryover_to_b(a: f64, c: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&a) {
        return Err(Error::Domain(format!("a must be in [0, 2], got {a}")));
    }
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("carryover c must be in [0, 1], got {c}")));
    }
    Ok(c * (2.0 - a))
}

/// Default carryover minimizing the worst lag-1 autocovariance eigenvalue
/// on a standard-normal target.
///
/// Variant A: `b = (sqrt(2) - sqrt(a))^2`.
/// Variant B: `b = a (2 - a) / (sqrt(2) + sqrt(2 - a))^2`.
pub fn default_b(a: f64, variant: Variant) -> Result<f64> {
    if !(a > 0.0 && a <= 2.0) {
        return Err(Error::Domain(format!("a must be in (0, 2], got {a}")));
    }
    Ok(match variant {
        Variant::A => {
            let d = 2f64.sqrt() - a.sqrt();
            d * d
        }
        Variant::B => {
            let d = 2f64.sqrt() + (2.0 - a).sqrt();
            a * (2.0 - a) / (d * d)
        }
    })
}

/// The momentum-correction coefficient `phi` with the smallest acceptance
/// perturbation on near-normal targets.
///
/// Variant A: `sqrt(ab) / (2 - a)` in the variant's original `(a, b)`
/// parameterization; variant B: `sqrt(b / a)` in its pre-relabeling
/// parameterization. The single-noise step formulas already have these
/// values folded in; this function serves the general kernel and tests.
pub fn default_phi(a: f64, b: f64, variant: Variant) -> Result<f64> {
    if a < 0.0 || b < 0.0 || a + b > 2.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "(a, b) = ({a}, {b}) violates a >= 0, b >= 0, a + b <= 2"
        )));
    }
    match variant {
        Variant::A => {
            if a == 2.0 {
                if b > 0.0 {
                    // a = 2 forces b = 0; anything else divides by zero.
                    return Err(Error::Domain(
                        "phi is singular at a = 2 with b > 0".into(),
                    ));
                }
                return Ok(0.0);
            }
            Ok((a * b).sqrt() / (2.0 - a))
        }
        Variant::B => {
            if a <= 0.0 {
                return Err(Error::Domain("variant B requires a > 0".into()));
            }
            Ok((b / a).sqrt())
        }
    }
}

/// Result of checking the general coefficient triple.
#[derive(Clone, Debug)]
pub struct GeneralValidation {
    pub valid: bool,
    /// Names the violated constraint when invalid.
    pub diagnostic: Option<String>,
}

/// Checks `a1 >= 0`, `a3 >= 0`, `a1 + a3 <= 2`, `a1 a3 >= a2^2`, which is
/// sufficient for the coefficient matrix to satisfy `0 <= A <= 2I`.
pub fn validate_general_a(a1: f64, a2: f64, a3: f64) -> GeneralValidation {
    let fail = |msg: String| GeneralValidation { valid: false, diagnostic: Some(msg) };
    if a1 < 0.0 {
        return fail(format!("a1 must be >= 0, got {a1}"));
    }
    if a3 < 0.0 {
        return fail(format!("a3 must be >= 0, got {a3}"));
    }
    if a1 + a3 > 2.0 {
        return fail(format!("a1 + a3 must be <= 2, got {}", a1 + a3));
    }
    if a1 * a3 < a2 * a2 {
        return fail(format!("a1*a3 >= a2^2 required, got {} < {}", a1 * a3, a2 * a2));
    }
    GeneralValidation { valid: true, diagnostic: None }
}

/// Coefficients for the single-noise HAMS kernels (variants A and B).
///
/// Constraints: `a >= 0`, `b >= 0`, `a + b <= 2`. The `a = 0` boundary is
/// allowed (position stays fixed; variant A then runs an autoregressive
/// update on the momentum alone).
#[derive(Clone, Copy, Debug)]
pub struct AbConfig {
    pub variant: Variant,
    pub a: f64,
    pub b: f64,
}

impl AbConfig {
    pub fn new(variant: Variant, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a + b <= 2.0 + 1e-15) {
            return Err(Error::Domain(format!(
                "(a, b) = ({a}, {b}) violates a >= 0, b >= 0, a + b <= 2"
            )));
        }
        // a = 2 forces b = 0, and the update coefficients divide by 2 - a;
        // (2, 0) is the one excluded corner of the parameter triangle.
        if a >= 2.0 {
            return Err(Error::Domain(
                "a = 2 is excluded: the step formulas divide by 2 - a".into(),
            ));
        }
        Ok(Self { variant, a, b })
    }

    /// Build from the user-facing `(epsilon, c)` pair.
    pub fn from_step_carryover(variant: Variant, epsilon: f64, c: f64) -> Result<Self> {
        let a = step_to_a(epsilon)?;
        let b = carryover_to_b(a, c)?;
        Self::new(variant, a, b)
    }

    /// Build from `epsilon` with the variant's default carryover.
    pub fn with_default_carryover(variant: Variant, epsilon: f64) -> Result<Self> {
        let a = step_to_a(epsilon)?;
        if a == 0.0 {
            return Err(Error::Domain("default carryover needs epsilon > 0".into()));
        }
        let b = default_b(a, variant)?;
        Self::new(variant, a, b)
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_from_a(self.a)
    }

    /// The carryover `c = b / (2 - a)` implied by `(a, b)`.
    pub fn carryover(&self) -> f64 {
        self.b / (2.0 - self.a)
    }

    /// `sqrt(a (2 - a - b))`, clamped so roundoff near `a + b = 2` cannot
    /// produce NaN; at the boundary the noise term is exactly zero.
    pub fn noise_coeff(&self) -> f64 {
        (self.a * (2.0 - self.a - self.b)).max(0.0).sqrt()
    }

    pub(crate) fn sqrt_ab(&self) -> f64 {
        (self.a * self.b).sqrt()
    }
}

/// Coefficients for the general two-noise HAMS kernel.
#[derive(Clone, Copy, Debug)]
pub struct GeneralConfig {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub phi: f64,
}

impl GeneralConfig {
    pub fn new(a1: f64, a2: f64, a3: f64, phi: f64) -> Result<Self> {
        let v = validate_general_a(a1, a2, a3);
        if !v.valid {
            return Err(Error::Domain(v.diagnostic.unwrap_or_default()));
        }
        Ok(Self { a1, a2, a3, phi })
    }

    /// True when the noise variance `2A - A^2` is nonsingular, i.e. the
    /// strict inequalities `a1 a3 > a2^2` and `a1 + a3 < 2` hold.
    pub fn is_nonsingular(&self) -> bool {
        self.a1 * self.a3 > self.a2 * self.a2 && self.a1 + self.a3 < 2.0
    }

    /// Per-coordinate 2x2 noise variance blocks of `2A - A^2`.
    pub(crate) fn noise_variance_2x2(&self) -> [f64; 3] {
        let (a1, a2, a3) = (self.a1, self.a2, self.a3);
        let v11 = 2.0 * a1 - a1 * a1 - a2 * a2;
        let v12 = 2.0 * a2 - a2 * (a1 + a3);
        let v22 = 2.0 * a3 - a3 * a3 - a2 * a2;
        [v11, v12, v22]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn step_to_a_boundaries() {
        assert_eq!(step_to_a(0.0).unwrap(), 0.0);
        assert_eq!(step_to_a(1.0).unwrap(), 1.0);
        assert!(step_to_a(-0.1).is_err());
        assert!(step_to_a(1.1).is_err());
    }

    #[test]
    fn step_to_a_independent_evaluation() {
        // 1 - sqrt(0.64) = 0.2
        assert_relative_eq!(step_to_a(0.6).unwrap(), 0.2, max_relative = 1e-15);
    }

    #[test]
    fn step_to_a_two_route_identity() {
        for &eps in &[0.05, 0.3, 0.6, 0.9, 0.999] {
            let a = step_to_a(eps).unwrap();
            let alt = eps * eps / (1.0 + (1.0 - eps * eps).sqrt());
            assert_relative_eq!(a, alt, max_relative = 1e-15);
        }
    }

    #[test]
    fn carryover_examples() {
        assert_eq!(carryover_to_b(0.7, 0.0).unwrap(), 0.0);
        assert_relative_eq!(carryover_to_b(0.5, 1.0).unwrap(), 1.5, max_relative = 1e-15);
        // the no-preconditioning default carryover c = 0.76
        assert_relative_eq!(carryover_to_b(0.2, 0.76).unwrap(), 1.368, max_relative = 1e-15);
        assert!(carryover_to_b(0.2, 1.01).is_err());
    }

    #[test]
    fn default_b_examples() {
        assert_relative_eq!(default_b(2.0, Variant::A).unwrap(), 0.0, epsilon = 1e-15);
        // (sqrt(2) - sqrt(0.5))^2 = 0.5 exactly
        assert_relative_eq!(default_b(0.5, Variant::A).unwrap(), 0.5, max_relative = 1e-15);
        // a = 1, variant B: 1/(sqrt(2)+1)^2 = 3 - 2 sqrt(2)
        assert_relative_eq!(
            default_b(1.0, Variant::B).unwrap(),
            3.0 - 2.0 * 2f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(default_b(0.0, Variant::A).is_err());
    }

    #[test]
    fn default_phi_examples() {
        assert_eq!(default_phi(0.5, 0.0, Variant::A).unwrap(), 0.0);
        assert_eq!(default_phi(0.5, 0.0, Variant::B).unwrap(), 0.0);
        assert_relative_eq!(
            default_phi(0.5, 0.5, Variant::A).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(default_phi(1.0, 1.0, Variant::A).unwrap(), 1.0, max_relative = 1e-15);
        assert!(default_phi(2.0, 0.5, Variant::A).is_err());
        assert_eq!(default_phi(2.0, 0.0, Variant::A).unwrap(), 0.0);
    }

    #[test]
    fn validate_general_examples() {
        assert!(validate_general_a(0.5, 0.3, 0.5).valid); // 0.25 >= 0.09
        let v = validate_general_a(1.0, 1.1, 1.0);
        assert!(!v.valid);
        assert!(v.diagnostic.unwrap().contains("a2^2"));
        assert!(validate_general_a(0.0, 0.0, 0.0).valid);
    }

    #[test]
    fn lemma_optimality_grid_scan() {
        // max-modulus eigenvalue of [[1-a, s],[-s, b-1]] with s = sqrt(ab)
        fn max_mod(a: f64, b: f64) -> f64 {
            let tr = b - a; // trace
            let det = (1.0 - a) * (b - 1.0) + a * b;
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let r = disc.sqrt();
                (tr / 2.0 + r).abs().max((tr / 2.0 - r).abs())
            } else {
                det.sqrt() // complex pair: |lambda| = sqrt(det)
            }
        }
        for &a in &[0.3, 0.7, 1.2] {
            let grid = 2000;
            let step = (2.0 - a) / grid as f64;
            // variant A: scan b directly
            let mut best = (f64::INFINITY, 0.0);
            for i in 1..grid {
                let b = i as f64 * step;
                let m = max_mod(a, b);
                if m < best.0 {
                    best = (m, b);
                }
            }
            let formula = default_b(a, Variant::A).unwrap();
            assert!(
                (best.1 - formula).abs() <= step,
                "variant A, a={a}: grid {} vs formula {formula}",
                best.1
            );
            // variant B: map the relabeled (a, b) back to the pre-relabeling
            // coefficients a_pre = 2 - a, b_pre = a b / (2 - a); the lag-1
            // eigenvalues only differ by sign.
            let mut best_b = (f64::INFINITY, 0.0);
            for i in 1..grid {
                let b = i as f64 * step;
                let m = max_mod(2.0 - a, a * b / (2.0 - a));
                if m < best_b.0 {
                    best_b = (m, b);
                }
            }
            let formula_b = default_b(a, Variant::B).unwrap();
            assert!(
                (best_b.1 - formula_b).abs() <= step,
                "variant B, a={a}: grid {} vs formula {formula_b}",
                best_b.1
            );
        }
    }

    proptest! {
        #[test]
        fn round_trip_a_eps_a(a in 1e-6..1.0f64) {
            let eps = epsilon_from_a(a);
            let back = step_to_a(eps).unwrap();
            prop_assert!((back - a).abs() <= 1e-12 * a.max(1e-3));
        }

        #[test]
        fn step_to_a_strictly_increasing(e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
            prop_assume!(e1 < e2);
            prop_assert!(step_to_a(e1).unwrap() < step_to_a(e2).unwrap());
        }

        #[test]
        fn default_b_stays_interior(a in 1e-3..1.999f64) {
            for variant in [Variant::A, Variant::B] {
                let b = default_b(a, variant).unwrap();
                prop_assert!(b > 0.0 && b < 2.0 - a + 1e-12,
                    "variant {variant}: a={a} b={b}");
            }
        }
    }
}
