//! Tail probabilities `P(X₁ + … + X_N > γ)` for sums of independent
//! subexponential random variables, estimated by importance sampling with
//! hazard-rate twisting.
//!
//! Every component is sampled from the twisted law
//! `f_θ(x) = (1-θ) λ(x) exp(-(1-θ) Λ(x))`, where `λ` is the hazard rate and
//! `Λ = -ln(1-F)` the hazard function. The twist `θ` is chosen to minimise an
//! upper bound on the estimator's second moment ([`minmax::solve_pprime`]).
//!
//! ```
//! use hazard_twist::{distributions::DistributionSpec, problem::SumProblem};
//! use hazard_twist::{estimators::is_estimate, minmax::solve_pprime};
//!
//! let w = DistributionSpec::weibull(0.5, 1.0).unwrap();
//! let problem = SumProblem::from_db(vec![w.clone(), w], 20.0).unwrap();
//! let sol = solve_pprime(&problem).unwrap();
//! assert!((sol.theta_star - 0.8).abs() < 1e-12);
//! let est = is_estimate(&problem, sol.theta_star, 10_000, 1).unwrap();
//! assert!(est.alpha_hat > 5e-5 && est.alpha_hat < 2e-4);
//! ```

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod minmax;
pub mod normal;
pub mod oracles;
pub mod problem;
pub mod rng;
pub mod twisting;

pub use distributions::{DistributionSpec, FamilyRegistry, TailLaw};
pub use error::{Error, Result};
pub use estimators::{is_estimate, naive_mc, EstimateResult};
pub use minmax::{solve_pprime, MinmaxSolution};
pub use problem::SumProblem;
