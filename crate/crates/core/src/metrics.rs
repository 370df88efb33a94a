//! The three evaluation statistics used throughout: root mean square error,
//! scatter index (RMSE over observed mean), and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, population_variance};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub si: f64,
    pub cc: f64,
    /// Sample count.
    pub m: usize,
}

pub fn rmse(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_lengths(predicted, observed, 1)?;
    let ss: f64 = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - o) * (p - o))
        .sum();
    Ok((ss / predicted.len() as f64).sqrt())
}

/// RMSE normalized by the mean of the observed values.
pub fn scatter_index(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_lengths(predicted, observed, 1)?;
    let obs_mean = mean(observed);
    if obs_mean == 0.0 {
        return Err(Error::UndefinedMetric(
            "scatter index: observed mean is zero".into(),
        ));
    }
    Ok(rmse(predicted, observed)? / obs_mean)
}

/// Pearson correlation with population variances, clamped to [-1, 1]
/// against floating-point overshoot.
pub fn pearson_cc(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    check_lengths(predicted, observed, 2)?;
    let (mp, mo) = (mean(predicted), mean(observed));
    let (vp, vo) = (population_variance(predicted), population_variance(observed));
    if vp == 0.0 || vo == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation: zero variance in an argument".into(),
        ));
    }
    let cov = predicted
        .iter()
        .zip(observed)
        .map(|(p, o)| (p - mp) * (o - mo))
        .sum::<f64>()
        / predicted.len() as f64;
    Ok((cov / (vp * vo).sqrt()).clamp(-1.0, 1.0))
}

/// All three metrics at once.
pub fn report(predicted: &[f64], observed: &[f64]) -> Result<MetricReport> {
    Ok(MetricReport {
        rmse: rmse(predicted, observed)?,
        si: scatter_index(predicted, observed)?,
        cc: pearson_cc(predicted, observed)?,
        m: predicted.len(),
    })
}

fn check_lengths(predicted: &[f64], observed: &[f64], min: usize) -> Result<()> {
    if predicted.len() != observed.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} predicted vs {} observed",
            predicted.len(),
            observed.len()
        )));
    }
    if predicted.len() < min {
        return Err(Error::InvalidInput(format!(
            "need at least {min} pairs, got {}",
            predicted.len()
        )));
    }
    Ok(())
}
