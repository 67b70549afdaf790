//! # hams
//!
//! Hamiltonian-assisted Metropolis sampling (HAMS) and friends: a toolkit of
//! one-step MCMC transition kernels on an augmented position/momentum space,
//! plus the baseline samplers it is usually compared against (RWM, pMALA,
//! pMALA*, pCNL, HMC, UDL, GMC), mass-matrix preconditioning, acceptance-rate
//! step-size tuning, Bartlett-window ESS diagnostics, and a seeded experiment
//! runner.
//!
//! The HAMS kernels are irreversible: the acceptance rule balances the forward
//! transition against the backward transition evaluated after negating the
//! momentum, so accepted moves keep their momentum instead of flipping it.
//! On a standard-normal target (or any normal target after preconditioning
//! with its inverse variance) every proposal is accepted exactly.
//!
//! ## Layout
//!
//! - [`target`]: the target-distribution trait, augmented states, Hamiltonians
//! - [`rng`]: seeded, stream-split reproducible randomness
//! - [`params`]: step-size/carryover algebra and coefficient validation
//! - [`samplers`]: one-step kernels for HAMS variants and all baselines
//! - [`gmh`]: generalized Metropolis–Hastings with pluggable invariance maps
//! - [`precondition`]: Cholesky mass-matrix preconditioning and the
//!   computation-minimized preconditioned HAMS step
//! - [`tuning`]: burn-in step-size adaptation from acceptance rates
//! - [`diagnostics`]: ACF, Bartlett-window ESS, batch-means standard errors
//! - [`models`]: experiment targets (correlated normal, stochastic volatility,
//!   log-Gaussian Cox) with data simulators and a Gibbs driver
//! - [`experiment`]: seeded experiment configs, CSV output, benchmarking
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gmh;
pub mod models;
pub mod params;
pub mod precondition;
pub mod rng;
pub mod samplers;
pub mod target;
pub mod tuning;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use target::{hamiltonian, AugmentedState, Target};
