//! Subcommand implementations. Each returns typed rows; rendering is
//! separate so tests can inspect the numbers directly.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use hazard_twist::estimators::{
    efficiency_indicator, relative_error_naive, EstimateResult, Estimator, EstimatorRegistry,
    EstimatorSettings, FixedTheta, ThetaRule, ThetaRuleRegistry,
};
use hazard_twist::minmax::{dominant_index, iid_theta_reference, solve_pprime, MinmaxSolution};
use hazard_twist::oracles::{
    exact_tail_single, tail_convolution_2, theta_sensitivity_sweep, QuadratureConfig, SweepRow,
};
use hazard_twist::problem::SumProblem;
use hazard_twist::rng::derive_seed;

use crate::config::{Experiment, Threshold};
use crate::error::CliError;

/// Stream roles within one threshold.
#[derive(Clone, Copy)]
enum Role {
    Twisted = 0,
    Naive = 1,
    Sweep = 2,
}

/// Seed for `role` at threshold `index`. Independent of the order in which
/// thresholds complete.
fn threshold_seed(seed: u64, index: usize, role: Role) -> u64 {
    derive_seed(seed, ((index as u64) << 2) | role as u64)
}

/// Problem at one threshold; `None` for a zero threshold, where the sum
/// exceeds the threshold almost surely.
fn problem_at(exp: &Experiment, th: &Threshold) -> Result<Option<SumProblem>, CliError> {
    if th.linear == 0.0 {
        return Ok(None);
    }
    let p = if th.from_db {
        SumProblem::from_db(exp.components.clone(), th.db)?
    } else {
        SumProblem::new(exp.components.clone(), th.linear)?
    };
    Ok(Some(p))
}

fn theta_rule(exp: &Experiment) -> Result<Arc<dyn ThetaRule>, CliError> {
    Ok(match exp.config.theta_override {
        Some(t) => Arc::new(FixedTheta(t)),
        None => ThetaRuleRegistry::default().build(&exp.config.theta_rule)?,
    })
}

struct Estimators {
    twisted: Arc<dyn Estimator>,
    naive: Arc<dyn Estimator>,
}

impl Estimators {
    fn new(exp: &Experiment) -> Result<Self, CliError> {
        let rule = theta_rule(exp)?;
        let registry = EstimatorRegistry::default();
        Ok(Self {
            twisted: registry.build("hazard-twist", rule.clone())?,
            naive: registry.build("naive", rule)?,
        })
    }

    fn settings(&self, exp: &Experiment, samples: u64, seed: u64) -> EstimatorSettings {
        EstimatorSettings {
            samples,
            seed,
            confidence: exp.confidence,
        }
    }
}

/// Exact result for a zero threshold.
fn trivial(samples: u64, seed: u64, theta: f64, naive: bool) -> EstimateResult {
    EstimateResult {
        method: if naive {
            hazard_twist::estimators::Method::Naive
        } else {
            hazard_twist::estimators::Method::HazardTwistIs
        },
        theta_used: theta,
        seed,
        sample_count: samples,
        hit_frequency: samples,
        alpha_hat: 1.0,
        mean_t: 1.0,
        second_moment_t: 1.0,
        variance_t: 0.0,
        std_error: 0.0,
        second_moment_std_error: 0.0,
        relative_error: Some(0.0),
        max_log_likelihood: Some(0.0),
        saturated_samples: 0,
    }
}

fn run_twisted(exp: &Experiment, est: &Estimators, idx: usize, th: &Threshold, seed: u64) -> Result<EstimateResult, CliError> {
    let s = threshold_seed(seed, idx, Role::Twisted);
    Ok(match problem_at(exp, th)? {
        None => trivial(exp.config.samples_is, s, 0.0, false),
        Some(p) => est.twisted.estimate(&p, &est.settings(exp, exp.config.samples_is, s))?,
    })
}

fn run_naive(exp: &Experiment, est: &Estimators, idx: usize, th: &Threshold, seed: u64) -> Result<EstimateResult, CliError> {
    let s = threshold_seed(seed, idx, Role::Naive);
    Ok(match problem_at(exp, th)? {
        None => trivial(exp.config.samples_naive, s, 0.0, true),
        Some(p) => est.naive.estimate(&p, &est.settings(exp, exp.config.samples_naive, s))?,
    })
}

fn per_threshold<T: Send>(
    exp: &Experiment,
    f: impl Fn(usize, &Threshold) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    exp.thresholds
        .par_iter()
        .enumerate()
        .map(|(i, th)| f(i, th))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveRow {
    pub gamma_db: f64,
    pub gamma: f64,
    #[serde(flatten)]
    pub solution: MinmaxSolution,
    /// Large-threshold dominant component by the closed family rule.
    pub closed_rule_dominant_index: usize,
    /// `1 - N/Λ₁(γ)` from the first component, unclamped.
    pub iid_theta_reference: Option<f64>,
}

pub fn solve(exp: &Experiment) -> Result<Vec<SolveRow>, CliError> {
    let n = exp.components.len();
    per_threshold(exp, |_, th| {
        let Some(p) = problem_at(exp, th)? else {
            return Ok(SolveRow {
                gamma_db: th.db,
                gamma: 0.0,
                solution: MinmaxSolution {
                    x_star: vec![0.0; n],
                    objective_a: 0.0,
                    dominant_index: 0,
                    theta_star: 0.0,
                    second_moment_bound: 1.0,
                    clamped: true,
                },
                closed_rule_dominant_index: 0,
                iid_theta_reference: None,
            });
        };
        let solution = solve_pprime(&p)?;
        let h = exp.components[0].hazard_function(p.gamma())?;
        Ok(SolveRow {
            gamma_db: th.db,
            gamma: p.gamma(),
            closed_rule_dominant_index: dominant_index(&p),
            iid_theta_reference: iid_theta_reference(h, n).ok(),
            solution,
        })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CcdfRow {
    pub gamma_db: f64,
    pub naive: EstimateResult,
    pub twisted: EstimateResult,
}

pub fn ccdf(exp: &Experiment, seed: u64) -> Result<Vec<CcdfRow>, CliError> {
    let est = Estimators::new(exp)?;
    per_threshold(exp, |i, th| {
        Ok(CcdfRow {
            gamma_db: th.db,
            naive: run_naive(exp, &est, i, th, seed)?,
            twisted: run_twisted(exp, &est, i, th, seed)?,
        })
    })
}

/// Same runs as [`ccdf`]; the table reports hit counts.
pub fn freq_table(exp: &Experiment, seed: u64) -> Result<Vec<CcdfRow>, CliError> {
    ccdf(exp, seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyRow {
    pub gamma_db: f64,
    pub rel_err_naive: f64,
    pub rel_err_is: f64,
    pub k: f64,
    pub twisted: EstimateResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyReport {
    pub rows: Vec<EfficiencyRow>,
    /// Thresholds without a defined relative error.
    pub skipped: Vec<(f64, String)>,
}

/// Relative errors and the efficiency indicator from one twisted run per
/// threshold; the naive error is evaluated analytically at `samples_naive`.
pub fn efficiency(exp: &Experiment, seed: u64) -> Result<EfficiencyReport, CliError> {
    let est = Estimators::new(exp)?;
    let results = per_threshold(exp, |i, th| Ok((th.db, run_twisted(exp, &est, i, th, seed)?)))?;
    let mut report = EfficiencyReport {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for (gamma_db, r) in results {
        let naive = relative_error_naive(r.alpha_hat, exp.config.samples_naive, &exp.confidence);
        match (naive, r.relative_error) {
            (Ok(rel_err_naive), Some(rel_err_is)) => report.rows.push(EfficiencyRow {
                gamma_db,
                rel_err_naive,
                rel_err_is,
                k: efficiency_indicator(r.alpha_hat, r.variance_t),
                twisted: r,
            }),
            (Err(e), _) => report.skipped.push((gamma_db, e.to_string())),
            (_, None) => report.skipped.push((gamma_db, "relative error undefined".into())),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBlock {
    pub gamma_db: f64,
    pub theta_star: f64,
    pub objective_a: f64,
    pub rows: Vec<SweepRow>,
}

pub fn theta_sweep(exp: &Experiment, seed: u64) -> Result<Vec<SweepBlock>, CliError> {
    let grid = exp.theta_grid()?;
    per_threshold(exp, |i, th| {
        let p = problem_at(exp, th)?
            .ok_or_else(|| CliError::Config("theta-sweep needs positive thresholds".into()))?;
        let s = theta_sensitivity_sweep(&p, &grid, exp.config.samples_is, threshold_seed(seed, i, Role::Sweep))?;
        Ok(SweepBlock {
            gamma_db: th.db,
            theta_star: s.theta_star,
            objective_a: s.objective_a,
            rows: s.rows,
        })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateRow {
    pub gamma_db: f64,
    pub oracle: f64,
    pub oracle_abs_error: f64,
    pub twisted: EstimateResult,
    pub naive: EstimateResult,
    /// Naive standard error implied by the oracle, `sqrt(α(1-α)/M)`.
    pub naive_std_error: f64,
    pub twisted_pass: bool,
    pub naive_pass: bool,
}

/// Compares both estimators with an exact (one component) or quadrature
/// (two components) reference at three standard errors.
pub fn validate(exp: &Experiment, seed: u64) -> Result<Vec<ValidateRow>, CliError> {
    let n = exp.components.len();
    if n > 2 {
        return Err(CliError::Config(format!("validate supports one or two components, got {n}")));
    }
    let est = Estimators::new(exp)?;
    let cfg = QuadratureConfig::default();
    per_threshold(exp, |i, th| {
        let (oracle, oracle_abs_error) = if th.linear == 0.0 {
            (1.0, 0.0)
        } else if n == 1 {
            (exact_tail_single(&exp.components[0], th.linear)?, 0.0)
        } else {
            let q = tail_convolution_2(&exp.components[0], &exp.components[1], th.linear, &cfg)?;
            (q.value, q.abs_error)
        };
        let twisted = run_twisted(exp, &est, i, th, seed)?;
        let naive = run_naive(exp, &est, i, th, seed)?;
        let naive_std_error = (oracle * (1.0 - oracle) / exp.config.samples_naive as f64).sqrt();
        let slack = oracle_abs_error + 1e-15 * oracle;
        Ok(ValidateRow {
            gamma_db: th.db,
            twisted_pass: (twisted.alpha_hat - oracle).abs() <= 3.0 * twisted.std_error + slack,
            naive_pass: (naive.alpha_hat - oracle).abs() <= 3.0 * naive_std_error + slack,
            oracle,
            oracle_abs_error,
            twisted,
            naive,
            naive_std_error,
        })
    })
}

/// Name of the twist rule in effect, for reports.
pub fn rule_name(exp: &Experiment) -> Result<String, CliError> {
    Ok(theta_rule(exp)?.name().to_string())
}
