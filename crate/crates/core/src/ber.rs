//! Closed-form bit-error rates of the HP and LP layers.
//!
//! With Gray labeling and threshold detection, an HP bit is wrong when the
//! received point lands on the wrong side of an axis and an LP bit when it
//! crosses a ring boundary. For decision `i` and true state `j` the error
//! probabilities are sums of `Q(√(k·P_i·|h|²/σ_j²))` with fixed
//! coefficients `k` that depend only on `α_i`. Averaging over the state and
//! decision gives the instantaneous rates; averaging `Q(√(a·Z))` over a
//! Gamma-distributed `Z` gives the Nakagami-m rates.

use crate::channel::{ChannelEnv, Decision, FadingSpec, PrimaryState, SensingModel};
use crate::error::{check_probability, invalid, Result};
use crate::special::{binomial, gamma_ratio, gaussian_q, hyp2f1_with_complement, series_unit_a, SQRT_PI};

/// Weights of the LP upper-bound terms `β₀` and `β₁`.
pub const RHO: [f64; 2] = [2.0, 1.0];

/// Error-rate coefficients for one value of `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationCoeffs {
    /// HP terms: `(α+2)²/D` and `α²/D` with `D = (α+1)² + 1`.
    pub c: [f64; 2],
    /// LP terms: `1/D`, `(2α+1)²/D`, `(2α+3)²/D`.
    pub beta: [f64; 3],
}

impl ModulationCoeffs {
    pub fn new(alpha: f64) -> Self {
        let d = (alpha + 1.0).powi(2) + 1.0;
        Self {
            c: [(alpha + 2.0).powi(2) / d, alpha * alpha / d],
            beta: [1.0 / d, (2.0 * alpha + 1.0).powi(2) / d, (2.0 * alpha + 3.0).powi(2) / d],
        }
    }
}

/// Everything the error-rate and power-control formulas need apart from the
/// powers themselves: sensing statistics, noise levels and the
/// constellation shape used under each decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub sensing: SensingModel,
    pub env: ChannelEnv,
    /// `[α₀, α₁]`, indexed by sensing decision.
    pub alpha: [f64; 2],
}

impl Scenario {
    pub fn new(sensing: SensingModel, env: ChannelEnv, alpha: [f64; 2]) -> Result<Self> {
        for a in alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid("alpha", format!("{a} must be finite and > 0")));
            }
        }
        Ok(Self { sensing, env, alpha })
    }

    pub fn coeffs(&self, decision: Decision) -> ModulationCoeffs {
        ModulationCoeffs::new(self.alpha[decision.index()])
    }

    /// `(Pr{H_j, Ĥ_i}, σ_j², Ĥ_i, coefficients of Ĥ_i)` for every
    /// state-decision pair.
    fn terms(&self) -> impl Iterator<Item = (f64, f64, Decision, ModulationCoeffs)> + '_ {
        let joint = self.sensing.joint();
        Decision::ALL.into_iter().flat_map(move |d| {
            let k = self.coeffs(d);
            PrimaryState::ALL.into_iter().map(move |s| (joint.get(s, d), self.env.noise_var(s), d, k))
        })
    }
}

/// HP and LP error probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPair {
    pub hp: f64,
    pub lp: f64,
}

/// Which error rate to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerKind {
    Hp,
    Lp,
    /// LP rate without its negative `β₂` term.
    LpUpper,
}

impl BerKind {
    /// `(weight, coefficient)` pairs whose weighted `Q` sum, halved, is
    /// the error rate.
    fn weighted_coeffs(self, k: &ModulationCoeffs) -> Vec<(f64, f64)> {
        match self {
            BerKind::Hp => vec![(1.0, k.c[0]), (1.0, k.c[1])],
            BerKind::Lp => vec![(2.0, k.beta[0]), (1.0, k.beta[1]), (-1.0, k.beta[2])],
            BerKind::LpUpper => vec![(RHO[0], k.beta[0]), (RHO[1], k.beta[1])],
        }
    }
}

fn combine<F>(sc: &Scenario, kind: BerKind, powers: [f64; 2], mut term: F) -> f64
where
    F: FnMut(f64, f64) -> f64,
{
    let mut total = 0.0;
    for (pr, var, d, k) in sc.terms() {
        if pr == 0.0 {
            continue;
        }
        let p = powers[d.index()];
        let inner: f64 = kind.weighted_coeffs(&k).iter().map(|&(w, coef)| w * term(coef * p, var)).sum();
        total += pr * inner;
    }
    0.5 * total
}

/// Instantaneous error rate at channel gain `h2 = |h|²`.
pub fn ber_instant(sc: &Scenario, kind: BerKind, powers: [f64; 2], h2: f64) -> f64 {
    combine(sc, kind, powers, |a, var| gaussian_q((a * h2 / var).sqrt()))
}

pub fn ber_hp_instant(sc: &Scenario, powers: [f64; 2], h2: f64) -> f64 {
    ber_instant(sc, BerKind::Hp, powers, h2)
}

pub fn ber_lp_instant(sc: &Scenario, powers: [f64; 2], h2: f64) -> f64 {
    ber_instant(sc, BerKind::Lp, powers, h2)
}

pub fn ber_lp_upper_instant(sc: &Scenario, powers: [f64; 2], h2: f64) -> f64 {
    ber_instant(sc, BerKind::LpUpper, powers, h2)
}

/// `E[Q(√(a·Z))]` for `Z ~ Gamma(m, Ω/m)`, written in terms of
/// `x = a·Ω/(2m)`.
///
/// Uses `₂F₁(1, m+½; m+1; 1/(1+x))` when `x >= 1/9` and the equivalent
/// expansion in `x/(1+x)` below that, where the first form approaches its
/// singular point.
pub fn nakagami_avg_q(x: f64, m: f64) -> Result<f64> {
    if !(m >= 0.5 && m.is_finite()) {
        return Err(invalid("m", format!("Nakagami shape {m} must be >= 0.5")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(invalid("x", format!("{x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let ratio = gamma_ratio(m + 0.5, m + 1.0);
    let scale = (0.5 * x.ln() - (m + 0.5) * x.ln_1p()).exp();
    let w = x / (1.0 + x);
    let z = 1.0 / (1.0 + x);
    if z <= 0.9 {
        let f = hyp2f1_with_complement(m, z, w)?;
        Ok(ratio * scale * f / (2.0 * SQRT_PI))
    } else {
        let f = series_unit_a(m + 0.5, 1.5, w)?;
        Ok(0.5 - m / SQRT_PI * ratio * scale * f)
    }
}

/// `H(x) = ½(1 - √(x/(1+x)))`, the Rayleigh average of `Q`.
pub fn h_fn(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    0.5 * (1.0 - (x / (1.0 + x)).sqrt())
}

/// Finite-sum form of [`nakagami_avg_q`] for integer `m`.
pub fn nakagami_avg_q_integer(x: f64, m: u32) -> f64 {
    let h = h_fn(x);
    let sum: f64 = (0..m).map(|r| binomial(m - 1 + r, r) * (1.0 - h).powi(r as i32)).sum();
    h.powi(m as i32) * sum
}

/// Error rate averaged over Nakagami-m fading of the secondary link.
pub fn ber_nakagami(sc: &Scenario, kind: BerKind, powers: [f64; 2], fading: &FadingSpec) -> Result<f64> {
    let (m, omega) = (fading.m, fading.omega);
    let mut err = None;
    let v = combine(sc, kind, powers, |a, var| {
        nakagami_avg_q(a * omega / (2.0 * m * var), m).unwrap_or_else(|e| {
            err.get_or_insert(e);
            f64::NAN
        })
    });
    err.map_or(Ok(v), Err)
}

pub fn ber_hp_nakagami(sc: &Scenario, powers: [f64; 2], fading: &FadingSpec) -> Result<f64> {
    ber_nakagami(sc, BerKind::Hp, powers, fading)
}

pub fn ber_lp_nakagami(sc: &Scenario, powers: [f64; 2], fading: &FadingSpec) -> Result<f64> {
    ber_nakagami(sc, BerKind::Lp, powers, fading)
}

/// Integer-`m` error rate through [`h_fn`] instead of ₂F₁.
///
/// The LP form applies the same reduction to each of its three terms, with
/// weights +2, +1 and -1.
pub fn ber_integer_m(sc: &Scenario, kind: BerKind, powers: [f64; 2], m: u32, omega: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("m", "integer Nakagami shape must be >= 1"));
    }
    let mf = f64::from(m);
    Ok(combine(sc, kind, powers, |a, var| nakagami_avg_q_integer(a * omega / (2.0 * mf * var), m)))
}

/// `λ·BER_HP + (1-λ)·BER_LP`.
pub fn weighted_objective(lambda: f64, ber: BerPair) -> Result<f64> {
    check_probability("lambda", lambda)?;
    Ok(lambda * ber.hp + (1.0 - lambda) * ber.lp)
}

/// Weighted objective at a fixed channel gain, optionally with the LP
/// upper bound in place of the exact LP rate.
pub fn objective_instant(sc: &Scenario, lambda: f64, powers: [f64; 2], h2: f64, upper: bool) -> f64 {
    let lp_kind = if upper { BerKind::LpUpper } else { BerKind::Lp };
    lambda * ber_instant(sc, BerKind::Hp, powers, h2) + (1.0 - lambda) * ber_instant(sc, lp_kind, powers, h2)
}

/// Weighted objective averaged over Nakagami-m fading.
pub fn objective_nakagami(
    sc: &Scenario,
    lambda: f64,
    powers: [f64; 2],
    fading: &FadingSpec,
    upper: bool,
) -> Result<f64> {
    let lp_kind = if upper { BerKind::LpUpper } else { BerKind::Lp };
    Ok(lambda * ber_nakagami(sc, BerKind::Hp, powers, fading)?
        + (1.0 - lambda) * ber_nakagami(sc, lp_kind, powers, fading)?)
}
