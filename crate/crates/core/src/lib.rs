//! LEO-satellite to HAP to ground downlink simulation with a masked
//! truncated-quantile-critics agent and pluggable hyperparameter tuning.

pub mod agent;
pub mod channel;
pub mod env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod rng;
pub mod tuner;

pub use error::{Error, Result};
