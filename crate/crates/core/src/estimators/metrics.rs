//! Accuracy and efficiency diagnostics.

use super::{ConfidenceConfig, EstimateResult};
use crate::error::{Error, Result};

/// Relative error of a naive estimator with `m_mc` samples, evaluated at the
/// importance-sampling estimate: `C sqrt(α(1-α)) / (sqrt(M) α)`.
pub fn relative_error_naive(alpha_hat_is: f64, m_mc: u64, cfg: &ConfidenceConfig) -> Result<f64> {
    if !(alpha_hat_is > 0.0 && alpha_hat_is < 1.0) {
        return Err(Error::Undefined("naive relative error needs 0 < alpha < 1"));
    }
    if m_mc == 0 {
        return Err(Error::Undefined("naive relative error needs a positive sample count"));
    }
    let a = alpha_hat_is;
    Ok(cfg.confidence_constant * (a * (1.0 - a)).sqrt() / ((m_mc as f64).sqrt() * a))
}

/// `C sqrt(var T) / (sqrt(M) α̂)`.
pub fn relative_error_is(result: &EstimateResult, cfg: &ConfidenceConfig) -> Result<f64> {
    if result.sample_count < 2 {
        return Err(Error::Undefined("relative error needs at least two samples"));
    }
    if !(result.alpha_hat > 0.0) {
        return Err(Error::Undefined("relative error needs a positive estimate"));
    }
    Ok(cfg.confidence_constant * result.variance_t.sqrt()
        / ((result.sample_count as f64).sqrt() * result.alpha_hat))
}

/// `k = α(1-α) / var T`, the naive-to-IS sample ratio at equal relative
/// error. Infinite when the IS variance is zero.
pub fn efficiency_indicator(alpha_hat_is: f64, variance_t: f64) -> f64 {
    if variance_t == 0.0 {
        f64::INFINITY
    } else {
        alpha_hat_is * (1.0 - alpha_hat_is) / variance_t
    }
}

/// `ln E[T²] / ln α`: 1 for the naive estimator, 2 for a zero-variance one.
pub fn optimality_ratio(second_moment_t: f64, alpha_hat: f64) -> Result<f64> {
    if !(alpha_hat > 0.0 && alpha_hat < 1.0) || !(second_moment_t > 0.0) {
        return Err(Error::Undefined("optimality ratio needs 0 < alpha < 1 and a positive second moment"));
    }
    Ok(second_moment_t.ln() / alpha_hat.ln())
}
