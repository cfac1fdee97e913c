use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::TailLaw;
use crate::error::{Error, Result};

/// Shape `k` and scale `β` of a Weibull law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weibull shape must be positive and finite, got {shape}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weibull scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    /// Shape below one: the law is subexponential.
    pub fn is_subexponential(&self) -> bool {
        self.shape < 1.0
    }

    /// Parameters of the Weibull law obtained by twisting the hazard rate by
    /// `theta`: same shape, scale `β / (1 - θ)^(1/k)`.
    pub fn twist_equivalent(&self, theta: f64) -> Self {
        Self {
            shape: self.shape,
            scale: self.scale / (1.0 - theta).powf(1.0 / self.shape),
        }
    }
}

/// Weibull law with `Λ(x) = (x/β)^k`.
#[derive(Clone, Debug)]
pub struct Weibull {
    params: WeibullParams,
    ln_k_over_beta: f64,
}

impl Weibull {
    pub fn new(params: WeibullParams) -> Self {
        Self {
            params,
            ln_k_over_beta: (params.shape / params.scale).ln(),
        }
    }

    pub fn params(&self) -> WeibullParams {
        self.params
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        (x / self.params.scale).powf(self.params.shape)
    }
}

impl TailLaw for Weibull {
    fn family(&self) -> &'static str {
        "weibull"
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let k = self.params.shape;
        let r = x / self.params.scale;
        self.ln_k_over_beta + (k - 1.0) * r.ln() - r.powf(k)
    }

    fn cdf(&self, x: f64) -> f64 {
        -(-self.cumulative_hazard(x)).exp_m1()
    }

    fn log_survival(&self, x: f64) -> f64 {
        -self.cumulative_hazard(x)
    }

    fn hazard_rate(&self, x: f64) -> f64 {
        let k = self.params.shape;
        let r = x / self.params.scale;
        (k / self.params.scale) * r.powf(k - 1.0)
    }

    fn quantile_from_log_survival(&self, log_tail: f64) -> f64 {
        self.params.scale * (-log_tail).powf(1.0 / self.params.shape)
    }

    fn concavity_onset(&self) -> Result<f64> {
        if self.params.is_subexponential() {
            Ok(0.0)
        } else {
            Err(Error::NotEventuallyConcave(format!(
                "weibull with shape {} >= 1",
                self.params.shape
            )))
        }
    }

    fn dominance_key(&self) -> (f64, f64) {
        (-self.params.shape, self.params.scale)
    }

    fn params(&self) -> serde_json::Value {
        serde_json::to_value(self.params).expect("plain struct serializes")
    }

    fn twisted_equivalent(&self, theta: f64) -> Option<Arc<dyn TailLaw>> {
        Some(Arc::new(Weibull::new(self.params.twist_equivalent(theta))))
    }
}
