use std::f64::consts::PI;

use crate::ber::{Scenario, RHO};
use crate::channel::{Decision, PrimaryState};
use crate::error::{Error, Result};

/// Lower end of the bisection bracket.
pub const P_LO: f64 = 1e-12;
/// Upper end of the bisection bracket.
pub const P_HI: f64 = 1e9;

const REL_TOL: f64 = 1e-10;

/// Left-hand side of the stationarity condition for decision `i`: the
/// negative derivative, with respect to `P_i`, of the weighted objective
/// that uses the LP upper bound.
///
/// Strictly decreasing in `p`, unbounded as `p → 0⁺` and vanishing as
/// `p → ∞`.
pub fn kkt_lhs(sc: &Scenario, decision: Decision, p: f64, h2: f64, lambda: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Domain { func: "kkt_lhs", what: "P", value: p });
    }
    Ok(Stationarity::new(sc, decision, h2, lambda).lhs(p))
}

/// Precomputed terms of [`kkt_lhs`] for one decision and channel gain,
/// as `(weight, rate)` pairs: the left-hand side is
/// `Σ weight·e^(-rate·P)/√P`.
#[derive(Debug, Clone)]
pub(crate) struct Stationarity {
    terms: Vec<(f64, f64)>,
}

impl Stationarity {
    pub(crate) fn new(sc: &Scenario, decision: Decision, h2: f64, lambda: f64) -> Self {
        let joint = sc.sensing.joint();
        let k = sc.coeffs(decision);
        let norm = 1.0 / (4.0 * (2.0 * PI).sqrt());
        let mut terms = Vec::with_capacity(8);
        for s in PrimaryState::ALL {
            let pr = joint.get(s, decision);
            if pr == 0.0 || h2 == 0.0 {
                continue;
            }
            let var = sc.env.noise_var(s);
            let mut push = |weight: f64, coef: f64| {
                if weight != 0.0 {
                    let a = coef * h2 / var;
                    terms.push((pr * norm * weight * a.sqrt(), 0.5 * a));
                }
            };
            for (l, rho) in RHO.iter().enumerate() {
                push(lambda, k.c[l]);
                push((1.0 - lambda) * rho, k.beta[l]);
            }
        }
        Self { terms }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn lhs(&self, p: f64) -> f64 {
        let inv_sqrt = 1.0 / p.sqrt();
        self.terms.iter().map(|&(w, rate)| w * (-rate * p).exp()).sum::<f64>() * inv_sqrt
    }

    /// Root of `lhs(P) = rhs` inside `[lo, hi]`, by bisection on `ln P`.
    /// The caller guarantees `lhs(lo) > rhs >= lhs(hi)`.
    fn bisect(&self, rhs: f64, mut lo: f64, mut hi: f64) -> f64 {
        while hi / lo - 1.0 > REL_TOL {
            let mid = (lo * hi).sqrt();
            if self.lhs(mid) > rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    }

    /// Root of `lhs(P) = rhs`, searching outward from `guess` when given.
    pub(crate) fn solve(&self, rhs: f64, guess: Option<f64>) -> Result<f64> {
        if self.lhs(P_LO) <= rhs {
            return Err(Error::BracketExpansion { rhs });
        }
        let (mut lo, mut hi) = match guess.filter(|g| *g > P_LO && *g < P_HI) {
            Some(g) => (g / 1.01, g * 1.01),
            None => (P_LO, 1.0),
        };
        lo = lo.max(P_LO);
        while self.lhs(lo) <= rhs {
            hi = lo;
            lo = (lo / 10.0).max(P_LO);
        }
        while self.lhs(hi) > rhs {
            if hi >= P_HI {
                return Err(Error::BracketExpansion { rhs });
            }
            lo = hi;
            hi = (hi * 10.0).min(P_HI);
        }
        Ok(self.bisect(rhs, lo, hi))
    }
}

/// The unique `P* > 0` with `kkt_lhs(P*) = rhs`, to relative tolerance
/// `1e-10`.
///
/// The bracket starts at `[1e-12, 1]` and its upper end grows tenfold until
/// the sign changes, up to `1e9`.
pub fn solve_p_star(sc: &Scenario, decision: Decision, rhs: f64, h2: f64, lambda: f64) -> Result<f64> {
    if !(rhs > 0.0 && rhs.is_finite()) {
        return Err(Error::Domain { func: "solve_p_star", what: "rhs", value: rhs });
    }
    if !(h2 > 0.0 && h2.is_finite()) {
        return Err(Error::ZeroChannel);
    }
    Stationarity::new(sc, decision, h2, lambda).solve(rhs, None)
}

/// Right-hand side of the stationarity condition for decision `i`:
/// `μ₁·Pr{Ĥ_i | interference}·g + μ₂·Pr{Ĥ_i}`, where the interference
/// weight is `1 - P_d` for the idle decision and `P_d` for the busy one.
pub fn stationarity_rhs(sc: &Scenario, decision: Decision, mu: [f64; 2], g_eff: f64) -> f64 {
    let p_d = sc.sensing.p_detect();
    let w = match decision {
        Decision::Idle => 1.0 - p_d,
        Decision::Busy => p_d,
    };
    let prob = sc.sensing.joint().decision_prob(decision);
    mu[0] * w * g_eff + mu[1] * prob
}
