//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights at the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule for adaptive integration. The target is
/// `max(absolute_tolerance, relative_tolerance · |integral|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            absolute_tolerance: 0.0,
            relative_tolerance: 1e-10,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_abs = self.absolute_tolerance >= 0.0 && self.absolute_tolerance.is_finite();
        let ok_rel = self.relative_tolerance >= 0.0 && self.relative_tolerance.is_finite();
        if !(ok_abs && ok_rel) || (self.absolute_tolerance == 0.0 && self.relative_tolerance == 0.0) {
            return Err(Error::InvalidParameter("quadrature tolerance must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    /// Same limits with both tolerances halved.
    pub fn tightened(&self) -> Self {
        Self {
            absolute_tolerance: 0.5 * self.absolute_tolerance,
            relative_tolerance: 0.5 * self.relative_tolerance,
            ..*self
        }
    }
}

/// An integral with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub abs_error: f64,
}

impl std::ops::Add for QuadratureEstimate {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            abs_error: self.abs_error + o.abs_error,
        }
    }
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let (k, g) = (k * h, g * h);
    if !k.is_finite() {
        return Err(Error::OracleFailure(format!(
            "non-finite integrand on [{a:e}, {b:e}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value: k,
        error: (k - g).abs(),
    })
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// until the summed error meets the configured target.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadratureEstimate> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParameter(format!("bad integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureEstimate {
            value: 0.0,
            abs_error: 0.0,
        });
    }
    let mut panels = vec![kronrod(&f, a, b)?];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = cfg.absolute_tolerance.max(cfg.relative_tolerance * value.abs());
        if error <= target {
            return Ok(QuadratureEstimate {
                value,
                abs_error: error,
            });
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(Error::OracleFailure(format!(
                "quadrature did not converge in {} subdivisions (error {error:e}, target {target:e})",
                cfg.max_subdivisions
            )));
        }
        // first index on ties keeps the refinement sequence deterministic
        let worst = (0..panels.len())
            .fold(0, |w, i| if panels[i].error > panels[w].error { i } else { w });
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::OracleFailure(format!(
                "panel [{:e}, {:e}] cannot be split further",
                p.a, p.b
            )));
        }
        panels.push(kronrod(&f, p.a, mid)?);
        panels.push(kronrod(&f, mid, p.b)?);
    }
}
