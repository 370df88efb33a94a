//! Learns dimensionless p-y backbone curves for monopile foundations in sand
//! from a curve database with gradient-boosted regression trees, tunes the
//! trees by Gaussian-process Bayesian optimization, explains predictions with
//! exact Shapley values, and back-calculates full lateral pile response by
//! solving a beam on nonlinear Winkler springs built from the predictions.

pub mod baseline;
pub mod config;
pub mod dataset;
pub mod error;
pub mod gbt;
pub mod linalg;
pub mod loess;
pub mod metrics;
pub mod numeric;
pub mod pipeline;
pub mod plot;
pub mod shap;
pub mod tuner;
pub mod winkler;

pub use error::{Error, Result};
