//! Experiment configuration: one JSON document per experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use hazard_twist::distributions::{linear_to_db, DistributionSpec, FamilyRegistry};
use hazard_twist::estimators::ConfidenceConfig;

use crate::error::CliError;

/// Naive runs above this size need `--allow-large`.
pub const NAIVE_SAMPLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub family: String,
    pub params: serde_json::Value,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl ThetaGrid {
    /// Grid values; a range includes `stop` when it lands on the grid.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            ThetaGrid::List(v) => Ok(v.clone()),
            ThetaGrid::Range { start, stop, step } => {
                if !(*step > 0.0) || !(stop >= start) {
                    return Err(CliError::Config(format!(
                        "theta_grid range needs step > 0 and stop >= start, got {start}..{stop} by {step}"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + step * i as f64).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub components: Vec<ComponentConfig>,
    #[serde(default)]
    pub thresholds_db: Option<Vec<f64>>,
    #[serde(default)]
    pub thresholds_linear: Option<Vec<f64>>,
    pub samples_is: u64,
    pub samples_naive: u64,
    pub seed: u64,
    #[serde(default)]
    pub theta_override: Option<f64>,
    #[serde(default = "default_rule")]
    pub theta_rule: String,
    #[serde(default = "default_confidence")]
    pub confidence_constant: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub theta_grid: Option<ThetaGrid>,
}

fn default_rule() -> String {
    "minmax".into()
}

fn default_confidence() -> f64 {
    1.96
}

/// A threshold as configured. `db` is `-inf` for a zero linear threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub linear: f64,
    pub db: f64,
    pub from_db: bool,
}

/// A validated configuration with components expanded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub components: Vec<DistributionSpec>,
    pub thresholds: Vec<Threshold>,
    pub confidence: ConfidenceConfig,
    /// SHA-256 of the config file bytes, hex encoded.
    pub config_hash: String,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_slice(&bytes)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!("at `{path}`: {inner}"))
        })?;
        let hash = hex::encode(Sha256::digest(bytes));
        Self::from_config(config, hash)
    }

    pub fn from_config(config: ExperimentConfig, config_hash: String) -> Result<Self, CliError> {
        let registry = FamilyRegistry::default();
        let mut components = Vec::new();
        for (i, c) in config.components.iter().enumerate() {
            if c.count == 0 {
                return Err(CliError::Config(format!("components[{i}].count must be at least 1")));
            }
            let spec = registry
                .build(&c.family, &c.params)
                .map_err(|e| CliError::Config(format!("components[{i}]: {e}")))?;
            components.extend(std::iter::repeat(spec).take(c.count));
        }
        if components.is_empty() {
            return Err(CliError::Config("components must not be empty".into()));
        }

        let thresholds = match (&config.thresholds_db, &config.thresholds_linear) {
            (Some(db), None) => db
                .iter()
                .map(|&d| {
                    if d.is_finite() {
                        Ok(Threshold {
                            linear: 10f64.powf(d / 10.0),
                            db: d,
                            from_db: true,
                        })
                    } else {
                        Err(CliError::Config(format!("thresholds_db entries must be finite, got {d}")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(lin)) => lin
                .iter()
                .map(|&g| {
                    if g >= 0.0 && g.is_finite() {
                        Ok(Threshold {
                            linear: g,
                            db: linear_to_db(g),
                            from_db: false,
                        })
                    } else {
                        Err(CliError::Config(format!(
                            "thresholds_linear entries must be finite and nonnegative, got {g}"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?,
            _ => {
                return Err(CliError::Config(
                    "exactly one of thresholds_db and thresholds_linear must be given".into(),
                ))
            }
        };
        if thresholds.is_empty() {
            return Err(CliError::Config("threshold list must not be empty".into()));
        }
        if config.samples_is == 0 || config.samples_naive == 0 {
            return Err(CliError::Config("sample counts must be positive".into()));
        }
        if let Some(t) = config.theta_override {
            if !(0.0..1.0).contains(&t) {
                return Err(CliError::Config(format!("theta_override must lie in [0, 1), got {t}")));
            }
        }
        let confidence = ConfidenceConfig::new(config.confidence_constant)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            config,
            components,
            thresholds,
            confidence,
            config_hash,
        })
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>, CliError> {
        let grid = self
            .config
            .theta_grid
            .as_ref()
            .ok_or_else(|| CliError::Config("theta-sweep needs theta_grid".into()))?
            .values()?;
        if let Some(t) = grid.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return Err(CliError::Config(format!("theta_grid values must lie in [0, 1), got {t}")));
        }
        Ok(grid)
    }
}
