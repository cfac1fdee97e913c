//! Component distribution families.
//!
//! Every family implements [`TailLaw`], a set of unchecked numerical kernels
//! expressed in terms of the log-survival function. [`DistributionSpec`] wraps
//! a shared law and adds the argument checks of the public API. Families are
//! created by name through [`FamilyRegistry`].

mod lognormal;
mod registry;
mod weibull;

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{domain, Result};

pub use lognormal::{Lognormal, LognormalParams};
pub use registry::{FamilyBuilder, FamilyRegistry};
pub use weibull::{Weibull, WeibullParams};

/// `ln(10) / 10`, the factor between decibel and natural-log parameters.
pub const XI: f64 = std::f64::consts::LN_10 / 10.0;

/// `10^(g_db / 10)`.
pub fn db_to_linear(g_db: f64) -> f64 {
    10f64.powf(g_db / 10.0)
}

/// `10 log10(g)`.
pub fn linear_to_db(g: f64) -> f64 {
    10.0 * g.log10()
}

/// Numerical kernels of a positive continuous law on `(0, ∞)`.
///
/// Kernels do not validate their arguments; callers go through
/// [`DistributionSpec`] unless they already know the argument is in range.
pub trait TailLaw: Send + Sync + fmt::Debug {
    /// Registry name of the family.
    fn family(&self) -> &'static str;

    /// Log density at `x > 0`.
    fn ln_pdf(&self, x: f64) -> f64;

    /// CDF at `x >= 0`.
    fn cdf(&self, x: f64) -> f64;

    /// `ln(1 - F(x))` at `x >= 0`, evaluated without forming `1 - F`.
    fn log_survival(&self, x: f64) -> f64;

    /// Hazard rate `f(x) / (1 - F(x))` at `x >= 0`.
    fn hazard_rate(&self, x: f64) -> f64;

    /// The `x` with `ln(1 - F(x)) = log_tail`, for any `log_tail < 0`.
    fn quantile_from_log_survival(&self, log_tail: f64) -> f64;

    /// Abscissa beyond which the hazard function is concave.
    fn concavity_onset(&self) -> Result<f64>;

    /// Lexicographic key ordering members of the same family by tail
    /// heaviness (larger is heavier). Used for the closed dominant-index rules.
    fn dominance_key(&self) -> (f64, f64);

    /// Parameters in the config schema of this family.
    fn params(&self) -> serde_json::Value;

    /// A closed-form law equal to the hazard-rate twist of this one, if the
    /// family is closed under twisting.
    fn twisted_equivalent(&self, _theta: f64) -> Option<Arc<dyn TailLaw>> {
        None
    }
}

/// A validated component distribution.
#[derive(Clone, Debug)]
pub struct DistributionSpec {
    law: Arc<dyn TailLaw>,
}

impl DistributionSpec {
    pub fn new(law: Arc<dyn TailLaw>) -> Self {
        Self { law }
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(Weibull::new(WeibullParams::new(shape, scale)?))))
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(Lognormal::new(LognormalParams::new(mu, sigma)?))))
    }

    /// Log-normal law given by the mean and standard deviation of `10 log10 X`.
    pub fn lognormal_db(mu_db: f64, sigma_db: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(Lognormal::new(LognormalParams::from_db(
            mu_db, sigma_db,
        )?))))
    }

    pub fn law(&self) -> &dyn TailLaw {
        self.law.as_ref()
    }

    pub fn family(&self) -> &'static str {
        self.law.family()
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.law.ln_pdf(x).exp())
    }

    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.law.ln_pdf(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_nonnegative(x)?;
        Ok(self.law.cdf(x))
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.law.log_survival(x).exp())
    }

    pub fn log_survival(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.law.log_survival(x))
    }

    /// Hazard rate `λ(x)`.
    pub fn hazard_rate(&self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(self.law.hazard_rate(x))
    }

    /// Hazard function `Λ(x) = -ln(1 - F(x))`; `Λ(0) = 0`.
    pub fn hazard_function(&self, x: f64) -> Result<f64> {
        check_nonnegative(x)?;
        Ok(-self.law.log_survival(x))
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain("quantile level must lie in (0, 1)", u));
        }
        Ok(self.law.quantile_from_log_survival((-u).ln_1p()))
    }

    pub fn concavity_onset(&self) -> Result<f64> {
        self.law.concavity_onset()
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("DistributionSpec", 2)?;
        s.serialize_field("family", self.family())?;
        s.serialize_field("params", &self.law.params())?;
        s.end()
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(domain("argument must be positive", x))
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(domain("argument must be nonnegative", x))
    }
}
