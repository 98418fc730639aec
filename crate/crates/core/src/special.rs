//! Scalar special functions used by the error-rate formulas and the
//! closed-form power approximations.
//!
//! All functions are pure and thread-safe.

use std::f64::consts::{E, SQRT_2};

use crate::error::{Error, Result};

pub(crate) const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Branch point of the Lambert W function, `-1/e`.
pub const LAMBERT_BRANCH_POINT: f64 = -1.0 / E;

/// Largest `z` for which ₂F₁ is summed directly. Beyond it the `1 - z`
/// connection formula is used instead.
const HYP2F1_DIRECT_LIMIT: f64 = 0.9;
const HYP2F1_MAX_TERMS: usize = 20_000;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Saturates to 0 and 1 for large `|x|`.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Principal real branch `W₀` of the Lambert W function: the `w >= -1`
/// with `w·eʷ = x`.
///
/// Halley iteration from a branch-point series near `-1/e`, a `ln(1+x)`
/// guess on the middle range and the asymptotic `ln x - ln ln x` guess for
/// `x > e`. Arguments above `1e200` are solved in log form to keep `eʷ`
/// finite.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < LAMBERT_BRANCH_POINT - 4.0 * f64::EPSILON {
        return Err(Error::Domain { func: "lambert_w0", what: "x", value: x });
    }
    if x <= LAMBERT_BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > 1e200 {
        return Ok(lambert_w0_log_form(x));
    }

    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x <= E {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if f == 0.0 || wp1 == 0.0 {
            break;
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w.max(-1.0))
}

/// Newton on `w + ln w = ln x`, valid for large positive `x`.
fn lambert_w0_log_form(x: f64) -> f64 {
    let lx = x.ln();
    let mut w = lx - lx.ln();
    for _ in 0..32 {
        let dw = (w + w.ln() - lx) / (1.0 + 1.0 / w);
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

/// `₂F₁(1, m + 1/2; m + 1; z)` for `m >= 1/2` and `0 <= z < 1`.
///
/// This is the only hypergeometric pattern the Nakagami-averaged error
/// rates need. The series is summed directly for `z <= 0.9`; closer to 1
/// the connection formula in `1 - z` is used, which for this parameter
/// pattern collapses to
///
/// ```text
/// -2m·₂F₁(1, m+1/2; 3/2; 1-z) + √π·Γ(m+1)/Γ(m+1/2) · z^(-m) · (1-z)^(-1/2)
/// ```
pub fn hyp2f1_special(m: f64, z: f64) -> Result<f64> {
    if !(m >= 0.5 && m.is_finite()) {
        return Err(Error::Domain { func: "hyp2f1_special", what: "m", value: m });
    }
    if z.is_nan() || z < 0.0 {
        return Err(Error::Domain { func: "hyp2f1_special", what: "z", value: z });
    }
    if z >= 1.0 {
        return Err(Error::NonConvergence("hypergeometric series at z >= 1"));
    }
    hyp2f1_with_complement(m, z, 1.0 - z)
}

/// Same as [`hyp2f1_special`] with `1 - z` supplied separately so callers
/// that know it exactly avoid the cancellation in `1 - z`.
pub(crate) fn hyp2f1_with_complement(m: f64, z: f64, one_minus_z: f64) -> Result<f64> {
    if z <= HYP2F1_DIRECT_LIMIT {
        series_unit_a(m + 0.5, m + 1.0, z)
    } else {
        let s = series_unit_a(m + 0.5, 1.5, one_minus_z)?;
        Ok(-2.0 * m * s + SQRT_PI * gamma_ratio(m + 1.0, m + 0.5) * z.powf(-m) / one_minus_z.sqrt())
    }
}

/// `₂F₁(1, b; c; z)` by direct summation. With `a = 1` the `(1)_n / n!`
/// factors cancel, so consecutive terms differ by `(b+n)/(c+n)·z`.
pub(crate) fn series_unit_a(b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..HYP2F1_MAX_TERMS {
        let n = n as f64;
        term *= (b + n) / (c + n) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("hypergeometric series"))
}

/// `Γ(a) / Γ(b)` for positive arguments, through log-gamma.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    (libm::lgamma(a) - libm::lgamma(b)).exp()
}

/// Binomial coefficient as a float.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, r| acc * f64::from(n - r) / f64::from(r + 1))
}
