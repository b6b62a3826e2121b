//! Off-grid harmonic recovery from compressive measurements by alternating
//! convex search (ACS).
//!
//! A real signal made of a few sinusoids is observed through `y = A z + eta`.
//! ACS models `z = Psi_theta x` with a harmonic dictionary whose atom
//! frequencies can move by up to half a bin, and alternates between an
//! l1-regularized least-squares solve for `x` and per-frequency golden-section
//! updates of `theta`.
//!
//! Modules:
//! - [`dictionary`]: the perturbed harmonic dictionary.
//! - [`signals`]: synthetic scenes, sensing operators, noisy measurements.
//! - [`sparse_solver`]: gradient projection for the l2-l1 problem.
//! - [`freq_search`]: one-dimensional perturbation updates.
//! - [`acs`]: the outer loop plus GPSR and OC-GPSR baselines.
//! - [`metrics`]: normalized RMSE and the support error.
//! - [`appendix`]: numerical checks of the convexity analysis of the frequency step.
//! - [`experiment`]: Monte Carlo sweeps, trial records, CSV/JSON output.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod acs;
pub mod appendix;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod freq_search;
pub mod metrics;
pub mod signals;
pub mod sparse_solver;

pub use acs::{run_acs, run_gpsr_baseline, AcsConfig, LambdaRule, Method, RecoveryResult};
pub use dictionary::{Overcompleteness, PerturbedDictionary};
pub use error::{Error, Result};
