//! Generalized (POVM) measurements on a single d-level quantum system.
//!
//! The crate models a measurement device as an ordered set of Kraus
//! operators `M_s`, and answers three questions about it in closed form:
//!
//! * what are the best guesses of the pre- and post-measurement states
//!   given only the readout `s` and the device ([`estimator`]);
//! * what are the mean estimation fidelities `G_pre`, `G_post` and the mean
//!   operation fidelity `F` when the input is a completely unknown pure
//!   state ([`estimator`]);
//! * does the device respect the information/disturbance tradeoff between
//!   `F` and `G_post` ([`estimator::check_bound`]).
//!
//! Every closed form is paired with a Monte Carlo estimator over Haar-random
//! pure states ([`haar`]) so the analytic values can be checked
//! independently. Outcome indices are 1-based throughout.

pub mod catalog;
pub mod error;
pub mod estimator;
pub mod haar;
pub mod matkernel;
pub mod measurement;

pub use error::{Error, Result};
pub use matkernel::{CMatrix, EigenSystem};
pub use measurement::{BiOrthogonalFactors, Effect, Measurement, OutcomeDistribution, QuantumState};

pub use num_complex::Complex64;
