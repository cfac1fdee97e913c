//! Standard normal density, distribution and tail functions.
//!
//! The upper tail is evaluated in the log domain so that the cumulative hazard
//! of a log-normal law stays finite far beyond the point where `1 - Φ(z)`
//! underflows. Inside `|z| <= 8` the tail comes from `erfc`; beyond that the
//! Mills ratio is evaluated by Laplace's continued fraction
//!
//! ```text
//! (1 - Φ(z)) / φ(z) = 1 / (z + 1/(z + 2/(z + 3/(z + ...))))
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

/// `ln(sqrt(2π))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this point the tail uses the continued fraction.
const CF_CUTOFF: f64 = 8.0;
const CF_TERMS: u32 = 80;

/// Standard normal density.
pub fn pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Log of the standard normal density.
pub fn ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF `Φ(z)`.
pub fn cdf(z: f64) -> f64 {
    sf(-z)
}

/// Upper tail `1 - Φ(z)`, computed without forming the difference.
pub fn sf(z: f64) -> f64 {
    if z > CF_CUTOFF {
        log_sf(z).exp()
    } else {
        0.5 * libm::erfc(z * FRAC_1_SQRT_2)
    }
}

/// `ln(1 - Φ(z))`.
pub fn log_sf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z > CF_CUTOFF {
        ln_pdf(z) + mills_ratio_cf(z).ln()
    } else if z >= 0.0 {
        (0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln()
    } else {
        // Φ(z) is small and known to full relative precision here.
        (-cdf(z)).ln_1p()
    }
}

/// `ln Φ(z)`.
pub fn log_cdf(z: f64) -> f64 {
    log_sf(-z)
}

/// Normal hazard `φ(z) / (1 - Φ(z))` (the inverse Mills ratio).
pub fn hazard(z: f64) -> f64 {
    if z > CF_CUTOFF {
        1.0 / mills_ratio_cf(z)
    } else {
        (ln_pdf(z) - log_sf(z)).exp()
    }
}

fn mills_ratio_cf(z: f64) -> f64 {
    let mut f = z;
    for k in (1..=CF_TERMS).rev() {
        f = z + f64::from(k) / f;
    }
    1.0 / f
}

// Rational approximation of the normal quantile (relative error about 1e-9),
// refined afterwards.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

/// Lower-tail rational approximation from `ln p`, valid for `p < P_LOW`.
fn approx_lower_tail(ln_p: f64) -> f64 {
    let q = (-2.0 * ln_p).sqrt();
    (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
        / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
}

fn approx_central(p: f64) -> f64 {
    let q = p - 0.5;
    let r = q * q;
    (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
        / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
}

/// Standard normal quantile `Φ⁻¹(u)` for `u` in `(0, 1)`.
///
/// Returns `-inf`/`+inf` at the endpoints and NaN outside `[0, 1]`.
pub fn inv_cdf(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return f64::NAN;
    }
    if u == 0.0 {
        return f64::NEG_INFINITY;
    }
    if u == 1.0 {
        return f64::INFINITY;
    }
    let x = if u < P_LOW {
        approx_lower_tail(u.ln())
    } else if u <= 1.0 - P_LOW {
        approx_central(u)
    } else {
        -approx_lower_tail((1.0 - u).ln())
    };
    // One Halley step; the residual is formed on whichever side is small.
    let e = if u <= 0.5 {
        cdf(x) - u
    } else {
        (1.0 - u) - sf(x)
    };
    let t = e * (0.5 * x * x + LN_SQRT_2PI).exp();
    x - t / (1.0 + 0.5 * x * t)
}

/// Inverse of [`log_sf`]: the `z` with `ln(1 - Φ(z)) = log_tail`.
///
/// Accepts any `log_tail <= 0`, including values far below the smallest
/// representable probability.
pub fn inv_log_sf(log_tail: f64) -> f64 {
    if log_tail.is_nan() || log_tail > 0.0 {
        return f64::NAN;
    }
    if log_tail == 0.0 {
        return f64::NEG_INFINITY;
    }
    if log_tail == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    if log_tail >= -LN_2 {
        // Lower half: Φ(z) = -expm1(log_tail) is accurate.
        return inv_cdf(-log_tail.exp_m1());
    }
    let mut z = if log_tail < P_LOW.ln() {
        -approx_lower_tail(log_tail)
    } else {
        -approx_central(log_tail.exp())
    };
    // Newton on the concave function log_sf.
    for _ in 0..3 {
        let step = (log_sf(z) - log_tail) / hazard(z);
        z += step;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}
