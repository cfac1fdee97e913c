//! Naive Monte Carlo and hazard-rate-twisting importance sampling.
//!
//! Both estimators share one sampler: the naive estimator is the twist with
//! `θ = 0`, for which the likelihood term is exactly one. With the same seed
//! the two produce bit-identical hit counts.

mod engine;
mod metrics;
mod strategy;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::SumProblem;

pub use engine::SampleRecord;
pub use metrics::{efficiency_indicator, optimality_ratio, relative_error_is, relative_error_naive};
pub use strategy::{
    Estimator, EstimatorRegistry, EstimatorSettings, FixedTheta, HazardTwist, IidReferenceTheta,
    MinmaxTheta, NaiveMonteCarlo, ThetaRule, ThetaRuleRegistry,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    HazardTwistIs,
}

/// Multiplier of the standard error in relative-error reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfidenceConfig {
    pub confidence_constant: f64,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        Self {
            confidence_constant: 1.96,
        }
    }
}

impl ConfidenceConfig {
    pub fn new(confidence_constant: f64) -> Result<Self> {
        if confidence_constant > 0.0 && confidence_constant.is_finite() {
            Ok(Self { confidence_constant })
        } else {
            Err(Error::InvalidParameter(format!(
                "confidence constant must be positive, got {confidence_constant}"
            )))
        }
    }
}

/// Output of one estimator run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateResult {
    pub method: Method,
    pub theta_used: f64,
    pub seed: u64,
    pub sample_count: u64,
    /// Samples with `S_N > γ`.
    pub hit_frequency: u64,
    pub alpha_hat: f64,
    pub mean_t: f64,
    pub second_moment_t: f64,
    /// Unbiased (divisor `M - 1`); zero when `M = 1`.
    pub variance_t: f64,
    /// `sqrt(variance_t / M)`.
    pub std_error: f64,
    /// Standard error of `second_moment_t`.
    pub second_moment_std_error: f64,
    /// `C sqrt(variance_t) / (sqrt(M) alpha_hat)`; absent when undefined.
    pub relative_error: Option<f64>,
    /// Largest `ln T` over hitting samples.
    pub max_log_likelihood: Option<f64>,
    /// Draws whose exact inverse overflowed and were clamped.
    pub saturated_samples: u64,
}

impl EstimateResult {
    fn from_accumulator(
        acc: &engine::Accumulator,
        method: Method,
        theta: f64,
        seed: u64,
        confidence: &ConfidenceConfig,
    ) -> Self {
        let m = acc.count as f64;
        let (mean_t, second_moment_t) = match method {
            Method::Naive => {
                let p = acc.hits as f64 / m;
                (p, p)
            }
            Method::HazardTwistIs => (acc.sum_t.value() / m, acc.sum_t2.value() / m),
        };
        let fourth = acc.sum_t4.value() / m;
        let (variance_t, m2_var) = if acc.count >= 2 {
            let f = m / (m - 1.0);
            (
                (f * (second_moment_t - mean_t * mean_t)).max(0.0),
                (f * (fourth - second_moment_t * second_moment_t)).max(0.0),
            )
        } else {
            (0.0, 0.0)
        };
        let mut r = Self {
            method,
            theta_used: theta,
            seed,
            sample_count: acc.count,
            hit_frequency: acc.hits,
            alpha_hat: mean_t,
            mean_t,
            second_moment_t,
            variance_t,
            std_error: (variance_t / m).sqrt(),
            second_moment_std_error: (m2_var / m).sqrt(),
            relative_error: None,
            max_log_likelihood: (acc.hits > 0).then_some(acc.max_log_t),
            saturated_samples: acc.saturated,
        };
        r.relative_error = relative_error_is(&r, confidence).ok();
        r
    }
}

/// Knobs that do not change the estimate itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub confidence: ConfidenceConfig,
    /// Keep every sample for offline checks. Memory grows with `M`.
    pub retain_samples: bool,
}

/// An estimate plus the retained samples, if requested.
#[derive(Clone, Debug)]
pub struct SampledRun {
    pub result: EstimateResult,
    pub samples: Vec<SampleRecord>,
}

/// Naive estimator `(1/M) Σ 1{S_N > γ}` with components drawn by inversion.
pub fn naive_mc(problem: &SumProblem, samples: u64, seed: u64) -> Result<EstimateResult> {
    naive_mc_with(problem, samples, seed, &RunOptions::default()).map(|r| r.result)
}

pub fn naive_mc_with(
    problem: &SumProblem,
    samples: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<SampledRun> {
    let (acc, kept) = engine::run(problem, 0.0, samples, seed, options.retain_samples)?;
    Ok(SampledRun {
        result: EstimateResult::from_accumulator(&acc, Method::Naive, 0.0, seed, &options.confidence),
        samples: kept,
    })
}

/// Importance-sampling estimator with every component twisted by `theta`.
pub fn is_estimate(problem: &SumProblem, theta: f64, samples: u64, seed: u64) -> Result<EstimateResult> {
    is_estimate_with(problem, theta, samples, seed, &RunOptions::default()).map(|r| r.result)
}

pub fn is_estimate_with(
    problem: &SumProblem,
    theta: f64,
    samples: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<SampledRun> {
    let (acc, kept) = engine::run(problem, theta, samples, seed, options.retain_samples)?;
    Ok(SampledRun {
        result: EstimateResult::from_accumulator(
            &acc,
            Method::HazardTwistIs,
            theta,
            seed,
            &options.confidence,
        ),
        samples: kept,
    })
}
