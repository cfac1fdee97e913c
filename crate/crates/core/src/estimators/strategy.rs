//! Estimators and twist-selection rules behind name-keyed registries.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use super::{is_estimate_with, naive_mc_with, ConfidenceConfig, EstimateResult, RunOptions};
use crate::error::{Error, Result};
use crate::minmax::{iid_theta_reference, solve_pprime};
use crate::problem::SumProblem;
use crate::twisting::check_theta;

/// Chooses the twisting parameter for a problem.
pub trait ThetaRule: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn theta(&self, problem: &SumProblem) -> Result<f64>;
}

/// `θ* = max(0, 1 - N/A)` from the constrained hazard-sum minimum.
#[derive(Clone, Copy, Debug, Default)]
pub struct MinmaxTheta;

impl ThetaRule for MinmaxTheta {
    fn name(&self) -> &str {
        "minmax"
    }

    fn theta(&self, problem: &SumProblem) -> Result<f64> {
        Ok(solve_pprime(problem)?.theta_star)
    }
}

/// `1 - N/Λ(γ)` with `Λ` of the first component, clamped at zero. Exact for
/// i.i.d. Weibull components with shape below one.
#[derive(Clone, Copy, Debug, Default)]
pub struct IidReferenceTheta;

impl ThetaRule for IidReferenceTheta {
    fn name(&self) -> &str {
        "iid-reference"
    }

    fn theta(&self, problem: &SumProblem) -> Result<f64> {
        let h = problem.components()[0].hazard_function(problem.gamma())?;
        Ok(iid_theta_reference(h, problem.len())?.max(0.0))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FixedTheta(pub f64);

impl ThetaRule for FixedTheta {
    fn name(&self) -> &str {
        "fixed"
    }

    fn theta(&self, _problem: &SumProblem) -> Result<f64> {
        check_theta(self.0)?;
        Ok(self.0)
    }
}

pub type ThetaRuleBuilder = fn() -> Arc<dyn ThetaRule>;

/// Named twist rules. `fixed` is not listed; it needs a value and is built
/// directly.
#[derive(Clone)]
pub struct ThetaRuleRegistry {
    rules: BTreeMap<String, ThetaRuleBuilder>,
}

impl Default for ThetaRuleRegistry {
    fn default() -> Self {
        let mut r = Self {
            rules: BTreeMap::new(),
        };
        r.register("minmax", || Arc::new(MinmaxTheta));
        r.register("iid-reference", || Arc::new(IidReferenceTheta));
        r
    }
}

impl ThetaRuleRegistry {
    pub fn register(&mut self, name: &str, builder: ThetaRuleBuilder) {
        self.rules.insert(name.to_ascii_lowercase(), builder);
    }

    pub fn names(&self) -> Vec<String> {
        self.rules.keys().cloned().collect()
    }

    pub fn build(&self, name: &str) -> Result<Arc<dyn ThetaRule>> {
        self.rules
            .get(&name.to_ascii_lowercase())
            .map(|b| b())
            .ok_or_else(|| Error::UnknownName {
                kind: "theta rule",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }
}

/// Per-run settings shared by every estimator.
#[derive(Clone, Debug)]
pub struct EstimatorSettings {
    pub samples: u64,
    pub seed: u64,
    pub confidence: ConfidenceConfig,
}

/// Estimates `P(S_N > γ)`.
pub trait Estimator: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn estimate(&self, problem: &SumProblem, settings: &EstimatorSettings) -> Result<EstimateResult>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NaiveMonteCarlo;

impl Estimator for NaiveMonteCarlo {
    fn name(&self) -> &str {
        "naive"
    }

    fn estimate(&self, problem: &SumProblem, s: &EstimatorSettings) -> Result<EstimateResult> {
        let opts = RunOptions {
            confidence: s.confidence,
            retain_samples: false,
        };
        naive_mc_with(problem, s.samples, s.seed, &opts).map(|r| r.result)
    }
}

/// Importance sampling with the twist picked by `rule`.
#[derive(Clone, Debug)]
pub struct HazardTwist {
    pub rule: Arc<dyn ThetaRule>,
}

impl HazardTwist {
    pub fn new(rule: Arc<dyn ThetaRule>) -> Self {
        Self { rule }
    }
}

impl Default for HazardTwist {
    fn default() -> Self {
        Self::new(Arc::new(MinmaxTheta))
    }
}

impl Estimator for HazardTwist {
    fn name(&self) -> &str {
        "hazard-twist"
    }

    fn estimate(&self, problem: &SumProblem, s: &EstimatorSettings) -> Result<EstimateResult> {
        let theta = self.rule.theta(problem)?;
        let opts = RunOptions {
            confidence: s.confidence,
            retain_samples: false,
        };
        is_estimate_with(problem, theta, s.samples, s.seed, &opts).map(|r| r.result)
    }
}

pub type EstimatorBuilder = fn(Arc<dyn ThetaRule>) -> Arc<dyn Estimator>;

#[derive(Clone)]
pub struct EstimatorRegistry {
    estimators: BTreeMap<String, EstimatorBuilder>,
}

impl Default for EstimatorRegistry {
    fn default() -> Self {
        let mut r = Self {
            estimators: BTreeMap::new(),
        };
        r.register("naive", |_| Arc::new(NaiveMonteCarlo));
        r.register("hazard-twist", |rule| Arc::new(HazardTwist::new(rule)));
        r
    }
}

impl EstimatorRegistry {
    pub fn register(&mut self, name: &str, builder: EstimatorBuilder) {
        self.estimators.insert(name.to_ascii_lowercase(), builder);
    }

    pub fn names(&self) -> Vec<String> {
        self.estimators.keys().cloned().collect()
    }

    /// `rule` is ignored by estimators that do not twist.
    pub fn build(&self, name: &str, rule: Arc<dyn ThetaRule>) -> Result<Arc<dyn Estimator>> {
        self.estimators
            .get(&name.to_ascii_lowercase())
            .map(|b| b(rule))
            .ok_or_else(|| Error::UnknownName {
                kind: "estimator",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }
}
