//! Synthetic data, metrics and experiment drivers.

pub mod synth;
pub mod metrics;
pub mod experiment;
