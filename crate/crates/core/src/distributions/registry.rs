use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{DistributionSpec, LognormalParams, WeibullParams};
use crate::error::{Error, Result};

/// Builds a distribution from the `params` object of a config entry.
pub type FamilyBuilder = fn(&serde_json::Value) -> Result<DistributionSpec>;

/// Distribution families selectable by name.
#[derive(Clone)]
pub struct FamilyRegistry {
    builders: BTreeMap<String, FamilyBuilder>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("weibull", build_weibull);
        r.register("lognormal", build_lognormal);
        r
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// Adds or replaces a family.
    pub fn register(&mut self, name: &str, builder: FamilyBuilder) {
        self.builders.insert(name.to_ascii_lowercase(), builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, family: &str, params: &serde_json::Value) -> Result<DistributionSpec> {
        let builder = self
            .builders
            .get(&family.to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownName {
                kind: "distribution family",
                name: family.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            })?;
        builder(params)
    }
}

fn parse<T: DeserializeOwned>(family: &str, params: &serde_json::Value) -> Result<T> {
    T::deserialize(params)
        .map_err(|e| Error::InvalidParameter(format!("{family} params: {e}")))
}

fn build_weibull(params: &serde_json::Value) -> Result<DistributionSpec> {
    let p: WeibullParams = parse("weibull", params)?;
    DistributionSpec::weibull(p.shape, p.scale)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LognormalConfig {
    mu: Option<f64>,
    sigma: Option<f64>,
    mu_db: Option<f64>,
    sigma_db: Option<f64>,
}

/// Decibel values take precedence; a natural-log value given alongside must
/// agree with it.
fn build_lognormal(params: &serde_json::Value) -> Result<DistributionSpec> {
    let c: LognormalConfig = parse("lognormal", params)?;
    let p = match (c.mu_db, c.sigma_db) {
        (Some(mu_db), Some(sigma_db)) => {
            let p = LognormalParams::from_db(mu_db, sigma_db)?;
            check_consistent("mu", c.mu, p.mu)?;
            check_consistent("sigma", c.sigma, p.sigma)?;
            p
        }
        (None, None) => match (c.mu, c.sigma) {
            (Some(mu), Some(sigma)) => LognormalParams::new(mu, sigma)?,
            _ => {
                return Err(Error::InvalidParameter(
                    "lognormal params need either mu and sigma or mu_db and sigma_db".into(),
                ))
            }
        },
        _ => {
            return Err(Error::InvalidParameter(
                "lognormal params: mu_db and sigma_db must be given together".into(),
            ))
        }
    };
    Ok(DistributionSpec::new(std::sync::Arc::new(super::Lognormal::new(p))))
}

fn check_consistent(field: &str, given: Option<f64>, from_db: f64) -> Result<()> {
    match given {
        Some(v) if (v - from_db).abs() > 1e-12 * from_db.abs().max(1.0) => {
            Err(Error::InvalidParameter(format!(
                "lognormal {field}={v} disagrees with its decibel form ({from_db})"
            )))
        }
        _ => Ok(()),
    }
}
