use serde::Serialize;

use crate::distributions::{db_to_linear, DistributionSpec};
use crate::error::{Error, Result};

/// Independent components and the threshold their sum must exceed.
#[derive(Clone, Debug, Serialize)]
pub struct SumProblem {
    components: Vec<DistributionSpec>,
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_db: Option<f64>,
}

impl SumProblem {
    pub fn new(components: Vec<DistributionSpec>, gamma: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("a sum needs at least one component".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive and finite, got {gamma}"
            )));
        }
        Ok(Self {
            components,
            gamma,
            gamma_db: None,
        })
    }

    /// Threshold given in decibels, `gamma = 10^(gamma_db/10)`.
    pub fn from_db(components: Vec<DistributionSpec>, gamma_db: f64) -> Result<Self> {
        let mut p = Self::new(components, db_to_linear(gamma_db))?;
        p.gamma_db = Some(gamma_db);
        Ok(p)
    }

    pub fn components(&self) -> &[DistributionSpec] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_db(&self) -> Option<f64> {
        self.gamma_db
    }

    /// Same components, different threshold.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.components.clone(), gamma)
    }

    /// `Σ Λᵢ(xᵢ)`.
    pub fn hazard_sum(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(x)
            .map(|(c, &xi)| -c.law().log_survival(xi))
            .sum()
    }
}
