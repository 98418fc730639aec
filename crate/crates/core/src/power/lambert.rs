use std::f64::consts::PI;

use super::{stationarity_rhs, Constraints, DualState, PowerLimit};
use crate::ber::Scenario;
use crate::channel::{Decision, PrimaryState};
use crate::error::{invalid, Result};
use crate::special::lambert_w0;

/// High-SNR closed form for the power under decision `i`, given the
/// stationarity right-hand side `rhs`.
///
/// Keeps only the slowest-decaying term (`c₁`, true state equal to the
/// decision) of the `λ = 1` stationarity condition, which then solves as
/// `P = σ²/(c₁h²)·W₀((c₁h²·Pr{H_i})² / (32π(σ²·rhs)²))`. Returns
/// `+∞` when `rhs = 0`; callers clip at their cap.
pub fn lambert_power(sc: &Scenario, decision: Decision, h2: f64, rhs: f64) -> f64 {
    let state = match decision {
        Decision::Idle => PrimaryState::Idle,
        Decision::Busy => PrimaryState::Busy,
    };
    let var = sc.env.noise_var(state);
    let c1 = sc.coeffs(decision).c[1];
    let prior = sc.sensing.prior(state);
    if h2 <= 0.0 || prior == 0.0 {
        return 0.0;
    }
    if rhs <= 0.0 {
        return f64::INFINITY;
    }
    let a = c1 * h2 * prior / (var * rhs);
    let arg = a * a / (32.0 * PI);
    let w = lambert_w0(arg).expect("argument is nonnegative");
    var / (c1 * h2) * w
}

/// Both closed-form powers for given multipliers, clipped at the peak limit
/// or at `p_max` under an average limit.
///
/// Under a peak limit `μ₂ = 0`, so the idle decision (which creates no
/// interference with perfect sensing) transmits at `P_pk`.
pub fn approx_lambertw(
    sc: &Scenario,
    cons: &Constraints,
    duals: DualState,
    h2: f64,
    g2: f64,
    p_max: f64,
) -> Result<[f64; 2]> {
    if !sc.sensing.is_perfect() {
        return Err(invalid("sensing", "the Lambert-W approximation assumes perfect sensing"));
    }
    let (cap, mu) = match cons.limit {
        PowerLimit::Peak(p) => (p, [duals.mu1, 0.0]),
        PowerLimit::Average(_) => (p_max, duals.as_array()),
    };
    let g_eff = g2 + sc.env.sigma_e2;
    Ok(Decision::ALL.map(|d| {
        let rhs = stationarity_rhs(sc, d, mu, g_eff);
        lambert_power(sc, d, h2, rhs).min(cap)
    }))
}
