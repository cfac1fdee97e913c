//! Minmax choice of the twisting parameter.
//!
//! The likelihood term of a sample with `Σ xᵢ > γ` is at most
//! `(1-θ)^(-N) exp(-θ A)` with `A = min Σ Λᵢ(xᵢ)` over `{xᵢ >= 0, Σ xᵢ = γ}`.
//! Squaring gives a bound on the second moment that is minimised by
//! `θ* = 1 - N/A`.
//!
//! The minimisation runs over the closed simplex (`Λᵢ(0) = 0`). Candidates
//! are the simplex vertices, the extreme points of the region where every
//! hazard function is concave (`xⱼ = ηⱼ` off one slot) and the centroid; each
//! is polished by pairwise coordinate descent that moves mass from the
//! coordinate with the largest hazard rate to the one with the smallest.

use serde::Serialize;

use crate::distributions::TailLaw;
use crate::error::{domain, Result};
use crate::problem::SumProblem;

const MAX_ROUNDS: usize = 2_000;
const GRADIENT_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-10;
const HALVINGS: usize = 64;
const GOLDEN_ITERS: usize = 120;

/// Solution of the constrained hazard-sum minimisation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinmaxSolution {
    pub x_star: Vec<f64>,
    /// `A(γ) = Σ Λᵢ(xᵢ*)`.
    pub objective_a: f64,
    /// Zero-based index of the largest coordinate of `x_star`.
    pub dominant_index: usize,
    pub theta_star: f64,
    pub second_moment_bound: f64,
    /// `A <= N`, so `θ*` was clamped to zero.
    pub clamped: bool,
}

/// Twisting parameter minimising the second-moment bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaStar {
    pub theta: f64,
    pub clamped: bool,
}

/// `θ* = 1 - n/A`, clamped to zero when `A <= n`.
pub fn theta_star(objective_a: f64, n: usize) -> Result<ThetaStar> {
    if !(objective_a >= 0.0) {
        return Err(domain("hazard-sum objective must be nonnegative", objective_a));
    }
    if n == 0 {
        return Err(domain("component count must be positive", 0.0));
    }
    let n = n as f64;
    Ok(if objective_a > n {
        ThetaStar {
            theta: 1.0 - n / objective_a,
            clamped: false,
        }
    } else {
        ThetaStar {
            theta: 0.0,
            clamped: true,
        }
    })
}

/// `(1-θ)^(-2n) exp(-2θA)`.
pub fn second_moment_bound(theta: f64, objective_a: f64, n: usize) -> f64 {
    let n = n as f64;
    (-2.0 * n * (-theta).ln_1p() - 2.0 * theta * objective_a).exp()
}

/// Log of the largest likelihood term over the rare set,
/// `-N ln(1-θ) - θA`.
pub fn log_likelihood_bound(theta: f64, objective_a: f64, n: usize) -> f64 {
    -(n as f64) * (-theta).ln_1p() - theta * objective_a
}

/// `1 - n/Λ(γ)`, the twist obtained from the single-component hazard at the
/// threshold (unclamped).
pub fn iid_theta_reference(hazard_at_gamma: f64, n: usize) -> Result<f64> {
    if !(hazard_at_gamma > 0.0) {
        return Err(domain("hazard at the threshold must be positive", hazard_at_gamma));
    }
    Ok(1.0 - n as f64 / hazard_at_gamma)
}

/// Index of the component that governs the tail of the sum for large
/// thresholds (zero-based).
///
/// Components of one family are ranked by the family's closed rule
/// (Weibull: smallest shape, then largest scale; log-normal: largest σ, then
/// largest μ). Mixed families fall back to the smallest `Λᵢ(γ)`.
pub fn dominant_index(problem: &SumProblem) -> usize {
    let comps = problem.components();
    let family = comps[0].family();
    if comps.iter().all(|c| c.family() == family) {
        let mut best = 0;
        for (i, c) in comps.iter().enumerate().skip(1) {
            let (k, b) = c.law().dominance_key();
            let (bk, bb) = comps[best].law().dominance_key();
            if k > bk || (k == bk && b > bb) {
                best = i;
            }
        }
        best
    } else {
        let g = problem.gamma();
        let mut best = 0;
        let mut best_h = f64::INFINITY;
        for (i, c) in comps.iter().enumerate() {
            let h = -c.law().log_survival(g);
            if h < best_h {
                best_h = h;
                best = i;
            }
        }
        best
    }
}

/// Minimises `Σ Λᵢ(xᵢ)` subject to `xᵢ >= 0`, `Σ xᵢ = γ`, then derives `θ*`
/// and the second-moment bound.
///
/// Fails when a component does not have an eventually concave hazard
/// function (e.g. Weibull with shape >= 1).
pub fn solve_pprime(problem: &SumProblem) -> Result<MinmaxSolution> {
    let onsets = problem
        .components()
        .iter()
        .map(|c| c.concavity_onset())
        .collect::<Result<Vec<f64>>>()?;
    let laws: Vec<&dyn TailLaw> = problem.components().iter().map(|c| c.law()).collect();
    let gamma = problem.gamma();
    let n = laws.len();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut x in candidates(gamma, &onsets) {
        refine(&laws, gamma, &mut x);
        let obj = problem.hazard_sum(&x);
        // strict comparison keeps the lowest candidate index on ties
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    let (objective_a, x_star) = best.expect("at least one candidate");
    let ts = theta_star(objective_a, n)?;
    let dominant = x_star
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > x_star[b] { i } else { b });
    Ok(MinmaxSolution {
        dominant_index: dominant,
        second_moment_bound: second_moment_bound(ts.theta, objective_a, n),
        theta_star: ts.theta,
        clamped: ts.clamped,
        objective_a,
        x_star,
    })
}

fn candidates(gamma: f64, onsets: &[f64]) -> Vec<Vec<f64>> {
    let n = onsets.len();
    let mut out = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        let mut x = vec![0.0; n];
        x[i] = gamma;
        out.push(x);
    }
    if onsets.iter().any(|&e| e > 0.0) {
        let total: f64 = onsets.iter().sum();
        for i in 0..n {
            let rest = total - onsets[i];
            if rest < gamma {
                let mut x = onsets.to_vec();
                x[i] = gamma - rest;
                out.push(x);
            }
        }
    }
    if n > 1 {
        out.push(vec![gamma / n as f64; n]);
    }
    out
}

fn refine(laws: &[&dyn TailLaw], gamma: f64, x: &mut [f64]) {
    let n = laws.len();
    if n < 2 {
        return;
    }
    let hazard = |i: usize, v: f64| -laws[i].log_survival(v);
    for _ in 0..MAX_ROUNDS {
        let grads: Vec<f64> = (0..n).map(|i| laws[i].hazard_rate(x[i])).collect();
        let Some(donor) = (0..n)
            .filter(|&i| x[i] > 0.0)
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if grads[j] >= grads[i] => Some(j),
                _ => Some(i),
            })
        else {
            return;
        };
        let receiver = (0..n)
            .filter(|&i| i != donor)
            .fold(None, |b: Option<usize>, i| match b {
                Some(j) if grads[j] <= grads[i] => Some(j),
                _ => Some(i),
            })
            .expect("n >= 2");
        let slope = grads[donor] - grads[receiver];
        if !(slope > GRADIENT_TOL) {
            return;
        }

        let (xd, xr) = (x[donor], x[receiver]);
        let base = hazard(donor, xd) + hazard(receiver, xr);
        let change = |t: f64| {
            let from = if t >= xd { 0.0 } else { xd - t };
            hazard(donor, from) + hazard(receiver, xr + t) - base
        };

        // Backtracking from the full transfer, keeping the best trial.
        let (mut best_t, mut best) = (0.0, 0.0);
        let mut t = xd;
        for _ in 0..HALVINGS {
            let v = change(t);
            if v < best {
                best = v;
                best_t = t;
            }
            t *= 0.5;
        }
        if best_t == 0.0 {
            return;
        }
        let (t, v) = golden_polish(&change, 0.5 * best_t, (2.0 * best_t).min(xd));
        if v < best {
            best = v;
            best_t = t;
        }

        if best_t >= xd {
            x[donor] = 0.0;
            x[receiver] = xr + xd;
        } else {
            x[donor] = xd - best_t;
            x[receiver] = xr + best_t;
        }
        if best_t < STEP_TOL * gamma && -best < 1e-15 * (1.0 + base) {
            return;
        }
    }
}

fn golden_polish(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-15 * b.abs() {
            break;
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    fn weibull(k: f64, b: f64) -> DistributionSpec {
        DistributionSpec::weibull(k, b).unwrap()
    }

    #[test]
    fn theta_star_formula() {
        let t = theta_star(10.0, 2).unwrap();
        assert!((t.theta - 0.8).abs() < 1e-15 && !t.clamped);
        let t = theta_star(2.0, 2).unwrap();
        assert_eq!(t.theta, 0.0);
        assert!(t.clamped);
        assert!(theta_star(-1.0, 2).is_err());
        assert!(theta_star(f64::NAN, 2).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(second_moment_bound(0.0, 10.0, 2), 1.0);
        let b = second_moment_bound(0.8, 10.0, 2);
        let expected = 5f64.powi(4) * (-16.0f64).exp();
        assert!((b - expected).abs() <= 1e-13 * expected);
        assert!((b - 7.034_0e-5).abs() < 1e-8);
    }

    #[test]
    fn bound_at_theta_star_closed_form() {
        for &(a, n) in &[(10.0, 2usize), (17.78, 2), (40.0, 3), (5.5, 1)] {
            let t = theta_star(a, n).unwrap().theta;
            let nf = n as f64;
            let closed = (a / nf).powf(2.0 * nf) * (-2.0 * a + 2.0 * nf).exp();
            let b = second_moment_bound(t, a, n);
            assert!((b - closed).abs() <= 1e-12 * closed);
            // θ* minimises the bound
            for dt in [-0.05, -0.01, 0.01, 0.05] {
                let tt = t + dt;
                if (0.0..1.0).contains(&tt) {
                    assert!(b <= second_moment_bound(tt, a, n));
                }
            }
        }
    }

    #[test]
    fn iid_reference() {
        assert!((iid_theta_reference(10.0, 2).unwrap() - 0.8).abs() < 1e-15);
        assert!(iid_theta_reference(0.0, 2).is_err());
        assert!((iid_theta_reference(1.0, 2).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn weibull_pair_vertex() {
        let p = SumProblem::from_db(vec![weibull(0.5, 1.0), weibull(0.5, 1.0)], 20.0).unwrap();
        let s = solve_pprime(&p).unwrap();
        assert!((s.objective_a - 10.0).abs() <= 1e-12);
        assert!((s.theta_star - 0.8).abs() <= 1e-12);
        assert_eq!(s.dominant_index, 0);
        assert!(s.x_star[1] == 0.0);
        assert!(!s.clamped);
    }

    #[test]
    fn single_component_is_its_own_optimum() {
        for spec in [weibull(0.5, 2.0), DistributionSpec::lognormal_db(1.0, 5.0).unwrap()] {
            let p = SumProblem::new(vec![spec.clone()], 37.0).unwrap();
            let s = solve_pprime(&p).unwrap();
            assert_eq!(s.x_star, vec![37.0]);
            assert_eq!(s.objective_a, spec.hazard_function(37.0).unwrap());
        }
    }

    #[test]
    fn light_tail_weibull_rejected() {
        let p = SumProblem::new(vec![weibull(0.5, 1.0), weibull(1.5, 1.0)], 10.0).unwrap();
        assert!(solve_pprime(&p).is_err());
    }

    #[test]
    fn tiny_threshold_clamps() {
        let p = SumProblem::from_db(vec![weibull(0.5, 1.0), weibull(0.5, 1.0)], -100.0).unwrap();
        let s = solve_pprime(&p).unwrap();
        assert!(s.clamped);
        assert_eq!(s.theta_star, 0.0);
        assert_eq!(s.second_moment_bound, 1.0);
    }

    #[test]
    fn feasibility() {
        let ln = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let ln3 = DistributionSpec::lognormal_db(2.0, 4.0).unwrap();
        for db in [5.0, 15.0, 20.0, 30.0] {
            let p = SumProblem::from_db(vec![ln.clone(), ln3.clone(), weibull(0.6, 2.0)], db).unwrap();
            let s = solve_pprime(&p).unwrap();
            let sum: f64 = s.x_star.iter().sum();
            assert!((sum - p.gamma()).abs() <= 1e-9 * p.gamma());
            assert!(s.x_star.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn dominant_index_rules() {
        let p = SumProblem::new(vec![weibull(0.4, 1.0), weibull(0.8, 1.0)], 10.0).unwrap();
        assert_eq!(dominant_index(&p), 0);
        let p = SumProblem::new(vec![weibull(0.5, 1.0), weibull(0.5, 2.0)], 10.0).unwrap();
        assert_eq!(dominant_index(&p), 1);
        let a = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let b = DistributionSpec::lognormal_db(0.0, 3.0).unwrap();
        let p = SumProblem::new(vec![a.clone(), b], 10.0).unwrap();
        assert_eq!(dominant_index(&p), 0);
        let c = DistributionSpec::lognormal_db(2.0, 6.0).unwrap();
        let p = SumProblem::new(vec![a, c], 10.0).unwrap();
        assert_eq!(dominant_index(&p), 1);
        // mixed families fall back to the smallest hazard at the threshold
        let p = SumProblem::new(vec![weibull(0.9, 1.0), DistributionSpec::lognormal(0.0, 1.0).unwrap()], 1000.0)
            .unwrap();
        let h0 = p.components()[0].hazard_function(1000.0).unwrap();
        let h1 = p.components()[1].hazard_function(1000.0).unwrap();
        assert_eq!(dominant_index(&p), if h0 < h1 { 0 } else { 1 });
    }
}
