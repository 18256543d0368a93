//! Engineered collision models for cavity state preparation.
//!
//! A truncated single-mode cavity collides with a stream of qubit or qutrit
//! ancillae; a genetic algorithm searches over the ancilla states (and
//! optionally the collision count and coupling constants) so that the cavity
//! ends up as close as possible to a target state.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod baselines;
pub mod cavity;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod genome;
pub mod objective;
pub mod opalg;

pub use error::{Error, Result};
