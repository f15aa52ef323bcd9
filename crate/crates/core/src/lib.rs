//! Simulation laboratory for the large-sample behaviour of Approximate
//! Bayesian Computation.

// NaN-rejecting `!(x > 0.0)` guards and index loops over small matrices are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adjust;
pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod models;
pub mod numerics;
pub mod par;
pub mod samplers;
pub mod stats;

pub use error::{AbcError, Result};
