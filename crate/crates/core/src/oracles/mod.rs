//! Brute-force references used to validate the solver and the estimators.

mod quadrature;

use serde::Serialize;

use crate::distributions::{DistributionSpec, TailLaw};
use crate::error::{Error, Result};
use crate::estimators::is_estimate;
use crate::minmax::{second_moment_bound, solve_pprime};
use crate::problem::SumProblem;
use crate::rng::derive_seed;
use crate::twisting::check_theta;

pub use quadrature::{integrate, QuadratureConfig, QuadratureEstimate};

const MODE_SCAN_POINTS: usize = 64;

/// `P(X > γ)` from the closed-form survival function.
pub fn exact_tail_single(spec: &DistributionSpec, gamma: f64) -> Result<f64> {
    spec.survival(gamma)
}

/// `P(X₁ + X₂ > γ)` by numerical convolution.
///
/// Uses `P = H(1,2) + H(2,1) + S₁(γ/2) S₂(γ/2)` with
/// `H(a,b) = ∫₀^{γ/2} f_a(x) S_b(γ-x) dx`. Each `H` is integrated over
/// `w = Λ_a(x)`, where `f_a(x) dx = e^{-w} dw`, so the integrand
/// `exp(-w + ln S_b(γ - x(w)))` is formed in log space with a max shift and
/// has no singularity at zero. The range is split at the median of `X_a` and
/// at the largest value of a coarse scan.
pub fn tail_convolution_2(
    first: &DistributionSpec,
    second: &DistributionSpec,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate> {
    cfg.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            what: "threshold must be positive",
            value: gamma,
        });
    }
    let half = 0.5 * gamma;
    let corner = (first.law().log_survival(half) + second.law().log_survival(half)).exp();
    let h12 = half_convolution(first.law(), second.law(), gamma, cfg)?;
    let h21 = half_convolution(second.law(), first.law(), gamma, cfg)?;
    Ok(h12
        + h21
        + QuadratureEstimate {
            value: corner,
            abs_error: 0.0,
        })
}

fn half_convolution(
    a: &dyn TailLaw,
    b: &dyn TailLaw,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureEstimate> {
    let half = 0.5 * gamma;
    let w_max = -a.log_survival(half);
    if !(w_max > 0.0) {
        return Ok(QuadratureEstimate {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let log_g = |w: f64| {
        let x = a.quantile_from_log_survival(-w).min(half);
        -w + b.log_survival(gamma - x)
    };

    let step = w_max / MODE_SCAN_POINTS as f64;
    let (mut mode, mut peak) = (0.0, f64::NEG_INFINITY);
    for i in 0..=MODE_SCAN_POINTS {
        let w = if i == MODE_SCAN_POINTS { w_max } else { step * i as f64 };
        let v = log_g(w);
        if v > peak {
            peak = v;
            mode = w;
        }
    }
    if !peak.is_finite() {
        return Err(Error::OracleFailure(format!(
            "convolution integrand has no finite value below {half:e}"
        )));
    }

    let mut breaks = vec![0.0, w_max];
    for p in [std::f64::consts::LN_2, mode] {
        if p > 0.0 && p < w_max {
            breaks.push(p);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let g = |w: f64| (log_g(w) - peak).exp();
    let mut total = QuadratureEstimate {
        value: 0.0,
        abs_error: 0.0,
    };
    for pair in breaks.windows(2) {
        total = total + scaled(integrate(g, pair[0], pair[1], cfg)?, peak);
    }
    Ok(total)
}

fn scaled(e: QuadratureEstimate, log_scale: f64) -> QuadratureEstimate {
    let s = log_scale.exp();
    QuadratureEstimate {
        value: e.value * s,
        abs_error: e.abs_error * s,
    }
}

/// Best point of a uniform simplex grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOptimum {
    pub x_best: Vec<f64>,
    pub objective: f64,
}

/// Exhaustive minimisation of `Σ Λᵢ(xᵢ)` over the grid
/// `{γ · (i₁, …, i_N) / (G-1) : Σ iⱼ = G-1}`, which contains every vertex.
/// Limited to three components.
pub fn grid_oracle_pprime(problem: &SumProblem, grid_points_per_dim: usize) -> Result<GridOptimum> {
    let n = problem.len();
    let gamma = problem.gamma();
    if n > 3 {
        return Err(Error::Unsupported(format!(
            "grid oracle handles at most 3 components, got {n}"
        )));
    }
    if n == 1 {
        return Ok(GridOptimum {
            x_best: vec![gamma],
            objective: problem.hazard_sum(&[gamma]),
        });
    }
    if grid_points_per_dim < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points per dimension".into()));
    }
    let steps = grid_points_per_dim - 1;
    let coord = |i: usize| {
        if i == steps {
            gamma
        } else {
            gamma * i as f64 / steps as f64
        }
    };
    let mut best = GridOptimum {
        x_best: Vec::new(),
        objective: f64::INFINITY,
    };
    let mut consider = |x: Vec<f64>| {
        let v = problem.hazard_sum(&x);
        if v < best.objective {
            best = GridOptimum { x_best: x, objective: v };
        }
    };
    if n == 2 {
        for i in 0..=steps {
            consider(vec![coord(i), coord(steps - i)]);
        }
    } else {
        for i in 0..=steps {
            for j in 0..=steps - i {
                consider(vec![coord(i), coord(j), coord(steps - i - j)]);
            }
        }
    }
    Ok(best)
}

/// Reference problems covering one to three components of both families at
/// thresholds from 15 to 30 dB.
pub fn regression_problems() -> Vec<(&'static str, SumProblem)> {
    let w = |k, b| DistributionSpec::weibull(k, b).expect("valid weibull");
    let ln = |m, s| DistributionSpec::lognormal_db(m, s).expect("valid lognormal");
    let cases: Vec<(&'static str, Vec<DistributionSpec>, f64)> = vec![
        ("weibull-single", vec![w(0.5, 1.0)], 15.0),
        ("lognormal-single", vec![ln(0.0, 6.0)], 30.0),
        ("weibull-iid-pair", vec![w(0.5, 1.0), w(0.5, 1.0)], 20.0),
        ("weibull-mixed-shape-pair", vec![w(0.4, 1.0), w(0.8, 1.0)], 25.0),
        ("lognormal-iid-pair", vec![ln(0.0, 6.0), ln(0.0, 6.0)], 20.0),
        ("lognormal-mixed-sigma-pair", vec![ln(0.0, 6.0), ln(0.0, 3.0)], 30.0),
        ("lognormal-mixed-mean-pair", vec![ln(2.0, 4.0), ln(0.0, 6.0)], 15.0),
        ("weibull-lognormal-pair", vec![w(0.6, 2.0), ln(0.0, 6.0)], 20.0),
        ("weibull-iid-triple", vec![w(0.5, 1.0), w(0.5, 1.0), w(0.5, 1.0)], 25.0),
        ("weibull-mixed-triple", vec![w(0.3, 2.0), w(0.6, 1.0), w(0.9, 0.5)], 30.0),
        ("lognormal-iid-triple", vec![ln(0.0, 6.0), ln(0.0, 6.0), ln(0.0, 6.0)], 25.0),
        ("lognormal-mixed-triple", vec![ln(0.0, 6.0), ln(1.0, 5.0), ln(-1.0, 4.0)], 15.0),
    ];
    cases
        .into_iter()
        .map(|(name, comps, db)| (name, SumProblem::from_db(comps, db).expect("valid problem")))
        .collect()
}

/// One twist value of a sensitivity sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub second_moment_empirical: f64,
    pub second_moment_bound: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaSweep {
    pub theta_star: f64,
    pub objective_a: f64,
    pub rows: Vec<SweepRow>,
}

/// Empirical second moment of the likelihood term against its analytic
/// bound over a grid of twists. `θ*` is added to the grid when absent; rows
/// are sorted by θ. Each θ draws from its own seed derived from `seed`.
pub fn theta_sensitivity_sweep(
    problem: &SumProblem,
    theta_grid: &[f64],
    samples: u64,
    seed: u64,
) -> Result<ThetaSweep> {
    for &t in theta_grid {
        check_theta(t)?;
    }
    let sol = solve_pprime(problem)?;
    let mut thetas = theta_grid.to_vec();
    if !thetas.iter().any(|&t| (t - sol.theta_star).abs() <= 1e-12) {
        thetas.push(sol.theta_star);
    }
    thetas.sort_by(f64::total_cmp);
    let n = problem.len();
    let rows = thetas
        .into_iter()
        .map(|theta| {
            let r = is_estimate(problem, theta, samples, derive_seed(seed, theta.to_bits()))?;
            Ok(SweepRow {
                theta,
                second_moment_empirical: r.second_moment_t,
                second_moment_bound: second_moment_bound(theta, sol.objective_a, n),
                std_error: r.second_moment_std_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaSweep {
        theta_star: sol.theta_star,
        objective_a: sol.objective_a,
        rows,
    })
}
