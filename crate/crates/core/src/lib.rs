//! Simulation library for distributed stochastic saddle-point problems.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod consensus;
pub mod error;
pub mod harness;
pub mod lowerbound;
pub mod metrics;
pub mod model;
pub mod problems;
pub mod topology;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
