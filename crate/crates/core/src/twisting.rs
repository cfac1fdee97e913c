//! Hazard-rate twisting of a component law.
//!
//! Twisting by `θ ∈ [0, 1)` scales the hazard rate by `1 - θ`:
//!
//! ```text
//! f_θ(x) = (1-θ) λ(x) exp(-(1-θ) Λ(x)) = (1-θ) f(x) exp(θ Λ(x))
//! F_θ(x) = 1 - (1 - F(x))^(1-θ)
//! F_θ⁻¹(y) = F⁻¹(1 - (1-y)^(1/(1-θ)))
//! ```
//!
//! The inverse is evaluated through the log-survival form
//! `ln(1 - F(x)) = ln(1 - y) / (1 - θ)`, which never underflows.

use crate::distributions::{DistributionSpec, WeibullParams};
use crate::error::{domain, Result};
use crate::rng::RandomStream;

/// A component law together with its twisting amount.
#[derive(Clone, Debug)]
pub struct TwistedDistribution {
    base: DistributionSpec,
    theta: f64,
    one_minus_theta: f64,
}

/// One draw from a twisted law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistedSample {
    pub value: f64,
    /// The exact inverse overflowed and the value was clamped to `f64::MAX`.
    pub saturated: bool,
}

impl TwistedDistribution {
    pub fn new(base: DistributionSpec, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            base,
            theta,
            one_minus_theta: 1.0 - theta,
        })
    }

    pub fn base(&self) -> &DistributionSpec {
        &self.base
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain("argument must be positive", x));
        }
        let law = self.base.law();
        Ok((self.one_minus_theta.ln() + law.ln_pdf(x) - self.theta * law.log_survival(x)).exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain("argument must be positive", x));
        }
        Ok(-(self.one_minus_theta * self.base.law().log_survival(x)).exp_m1())
    }

    /// `1 - F_θ(x) = (1 - F(x))^(1-θ)`.
    pub fn survival(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(domain("argument must be positive", x));
        }
        Ok((self.one_minus_theta * self.base.law().log_survival(x)).exp())
    }

    pub fn quantile(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(domain("quantile level must lie in (0, 1)", y));
        }
        Ok(self.invert(y).value)
    }

    /// Exact inversion of one uniform.
    pub fn sample(&self, stream: &mut RandomStream) -> TwistedSample {
        self.invert(stream.next_uniform())
    }

    pub(crate) fn invert(&self, y: f64) -> TwistedSample {
        let log_tail = (-y).ln_1p() / self.one_minus_theta;
        let value = self.base.law().quantile_from_log_survival(log_tail);
        if value.is_finite() {
            TwistedSample {
                value,
                saturated: false,
            }
        } else {
            TwistedSample {
                value: f64::MAX,
                saturated: true,
            }
        }
    }
}

/// Weibull law equal to the `theta`-twist of `params`: same shape, scale
/// `β / (1 - θ)^(1/k)`.
pub fn weibull_twist_equivalent(params: WeibullParams, theta: f64) -> WeibullParams {
    debug_assert!((0.0..1.0).contains(&theta));
    params.twist_equivalent(theta)
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if (0.0..1.0).contains(&theta) {
        Ok(())
    } else {
        Err(domain("twisting parameter must lie in [0, 1)", theta))
    }
}
