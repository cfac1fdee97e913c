use serde::{Deserialize, Serialize};

use super::{TailLaw, XI};
use crate::error::{Error, Result};
use crate::normal;

/// Parameters of `ln X ~ N(mu, sigma²)`, optionally remembering the decibel
/// form they were given in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_db: Option<f64>,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("lognormal mu must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lognormal sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self {
            mu,
            sigma,
            mu_db: None,
            sigma_db: None,
        })
    }

    /// From the mean and standard deviation of `10 log10 X`.
    pub fn from_db(mu_db: f64, sigma_db: f64) -> Result<Self> {
        let mut p = Self::new(XI * mu_db, XI * sigma_db)?;
        p.mu_db = Some(mu_db);
        p.sigma_db = Some(sigma_db);
        Ok(p)
    }
}

/// Log-normal law.
///
/// The abscissa where the cumulative hazard turns concave is the maximiser of
/// the hazard rate. Writing `z = (ln x - mu)/sigma` and `h` for the normal
/// hazard, `d/dx ln λ(x) = ((h(z) - z)/sigma - 1)/x`, and `h(z) - z` decreases
/// from `+∞` to `0`, so the onset is the unique root of `h(z) - z = sigma`.
#[derive(Clone, Debug)]
pub struct Lognormal {
    params: LognormalParams,
    ln_sigma: f64,
    onset: f64,
}

impl Lognormal {
    pub fn new(params: LognormalParams) -> Self {
        let onset = (params.mu + params.sigma * hazard_peak_z(params.sigma)).exp();
        Self {
            params,
            ln_sigma: params.sigma.ln(),
            onset,
        }
    }

    pub fn params(&self) -> LognormalParams {
        self.params
    }

    fn z(&self, x: f64) -> f64 {
        (x.ln() - self.params.mu) / self.params.sigma
    }
}

/// Root of `h(z) - z = sigma` by bisection.
fn hazard_peak_z(sigma: f64) -> f64 {
    let gap = |z: f64| normal::hazard(z) - z - sigma;
    let mut lo = -sigma - 10.0;
    let mut hi = (2.0 / sigma).max(1.0);
    debug_assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl TailLaw for Lognormal {
    fn family(&self) -> &'static str {
        "lognormal"
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        normal::ln_pdf(self.z(x)) - self.ln_sigma - x.ln()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        normal::cdf(self.z(x))
    }

    fn log_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        normal::log_sf(self.z(x))
    }

    fn hazard_rate(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        normal::hazard(self.z(x)) / (self.params.sigma * x)
    }

    fn quantile_from_log_survival(&self, log_tail: f64) -> f64 {
        (self.params.mu + self.params.sigma * normal::inv_log_sf(log_tail)).exp()
    }

    fn concavity_onset(&self) -> Result<f64> {
        Ok(self.onset)
    }

    fn dominance_key(&self) -> (f64, f64) {
        (self.params.sigma, self.params.mu)
    }

    fn params(&self) -> serde_json::Value {
        let p = &self.params;
        match (p.mu_db, p.sigma_db) {
            (Some(mu_db), Some(sigma_db)) => serde_json::json!({
                "mu": p.mu, "sigma": p.sigma, "mu_db": mu_db, "sigma_db": sigma_db
            }),
            _ => serde_json::json!({ "mu": p.mu, "sigma": p.sigma }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    /// Λ computed from the CDF on a grid; the onset is where the second
    /// difference first stays nonpositive.
    fn second_difference_onset(spec: &DistributionSpec) -> f64 {
        let n = 4000;
        let xs: Vec<f64> = (0..n).map(|i| 1e-3 * 1.004f64.powi(i)).collect();
        let lam = |x: f64| spec.hazard_function(x).unwrap();
        let mut last_convex = xs[1];
        for w in xs.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            // divided second difference on a nonuniform grid
            let d = (lam(c) - lam(b)) / (c - b) - (lam(b) - lam(a)) / (b - a);
            if d > 0.0 {
                last_convex = b;
            }
        }
        last_convex
    }

    #[test]
    fn median_values() {
        let l = DistributionSpec::lognormal(0.0, 1.0).unwrap();
        assert!((l.pdf(1.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((l.survival(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((l.hazard_rate(1.0).unwrap() - 0.797_884_560_802_865_4).abs() < 1e-14);
        assert!((l.hazard_function(1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((l.quantile(0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn db_parameters() {
        let p = LognormalParams::from_db(3.0, 6.0).unwrap();
        assert!((p.mu - XI * 3.0).abs() <= 1e-15 * p.mu);
        assert!((p.sigma - 1.381_551_055_796_427_4).abs() <= 1e-15 * p.sigma);
        assert!(LognormalParams::new(0.0, 0.0).is_err());
        assert!(LognormalParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn tail_at_one_hundred() {
        // Reference from mpmath: 0.5*erfc(ln(100)/(sigma*sqrt 2)) with sigma = 0.6 ln 10.
        let l = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let s = l.survival(100.0).unwrap();
        assert!((s - 4.290_603_331_968_375e-4).abs() <= 1e-12 * 4.29e-4, "{s}");
        let h = l.hazard_function(100.0).unwrap();
        assert!((h - 7.753_913_012_102_223).abs() < 1e-11, "{h}");
    }

    #[test]
    fn quantile_975() {
        let l = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let q = l.quantile(0.975).unwrap();
        // Bisection on the cdf as an independent reference.
        let (mut lo, mut hi) = (1.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if l.cdf(mid).unwrap() < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((q - lo).abs() <= 1e-9 * q);
        assert!((q - 14.996_102_172_454_188).abs() < 1e-9, "{q}");
    }

    #[test]
    fn far_tail_log_survival() {
        let (mu, sigma) = (0.3, 1.2);
        let l = DistributionSpec::lognormal(mu, sigma).unwrap();
        let z = 40.0;
        let x = (mu + z * sigma).exp();
        let ls = l.log_survival(x).unwrap();
        let lead = -z * z / 2.0 - (z * (2.0 * std::f64::consts::PI).sqrt()).ln();
        assert!(ls.is_finite());
        assert!(((ls - lead) / lead).abs() < 0.01);
    }

    #[test]
    fn onset_matches_second_difference_scan() {
        let l = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let eta = l.concavity_onset().unwrap();
        let scan = second_difference_onset(&l);
        assert!((eta - scan).abs() <= 0.01 * eta, "eta={eta} scan={scan}");
        // Regression constant for σ_dB = 6.
        assert!((eta - 0.205_782_676_926_480_2).abs() < 1e-9, "{eta}");

        let l2 = DistributionSpec::lognormal(1.0, 0.5).unwrap();
        let eta2 = l2.concavity_onset().unwrap();
        let scan2 = second_difference_onset(&l2);
        assert!((eta2 - scan2).abs() <= 0.01 * eta2, "eta={eta2} scan={scan2}");
    }

    #[test]
    fn hazard_rate_decreasing_past_onset() {
        let l = DistributionSpec::lognormal_db(0.0, 6.0).unwrap();
        let eta = l.concavity_onset().unwrap();
        let mut prev = l.hazard_rate(eta).unwrap();
        for i in 1..2000 {
            let x = eta * 1.01f64.powi(i);
            let h = l.hazard_rate(x).unwrap();
            assert!(h <= prev, "x={x}");
            prev = h;
        }
        assert!(l.hazard_rate(0.5 * eta).unwrap() < l.hazard_rate(eta).unwrap());
    }
}
