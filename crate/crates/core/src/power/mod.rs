//! Optimal power control for the sensing-based secondary link.
//!
//! The transmitter picks `P₀` after an idle decision and `P₁` after a busy
//! one, to minimize `λ·BER_HP + (1-λ)·BER_LP` under a transmit-power limit
//! (peak or average) and an average interference limit at the primary
//! receiver. With instantaneous channel knowledge the powers are functions
//! of `(|h|², |g|²)` found from the stationarity conditions and a dual
//! iteration over a frozen sample set; with statistical knowledge they are
//! constants found by a search along the boundary of the feasible region.

mod dual;
mod kkt;
mod lambert;
mod statistical;

use rand::Rng;
use rayon::prelude::*;

use crate::ber::{ber_instant, BerKind, BerPair, Scenario};
use crate::channel::{ChannelEnv, Decision};
use crate::error::{check_positive, check_probability, invalid, Result};

pub use dual::{
    optimize_avg_avg, optimize_imperfect_csi, optimize_peak_avg, DualOptions, DualSolution, StepRule,
    TraceRow,
};
pub use kkt::{kkt_lhs, solve_p_star, stationarity_rhs, P_HI, P_LO};
pub use lambert::{approx_lambertw, lambert_power};
pub use statistical::{optimize_statistical, StatisticalSolution};

/// Power ceiling used when no peak limit applies: 60 dB.
pub const DEFAULT_P_MAX: f64 = 1e6;

/// Transmit-power limit of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLimit {
    /// `P_i ≤ P_pk` for every channel state.
    Peak(f64),
    /// `E{Pr{Ĥ₀}P₀ + Pr{Ĥ₁}P₁} ≤ P_avg`.
    Average(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    pub limit: PowerLimit,
    /// Average interference limit at the primary receiver.
    pub q_avg: f64,
}

impl Constraints {
    pub fn peak(p_pk: f64, q_avg: f64) -> Result<Self> {
        check_positive("p_pk", p_pk)?;
        check_positive("q_avg", q_avg)?;
        Ok(Self { limit: PowerLimit::Peak(p_pk), q_avg })
    }

    pub fn average(p_avg: f64, q_avg: f64) -> Result<Self> {
        check_positive("p_avg", p_avg)?;
        check_positive("q_avg", q_avg)?;
        Ok(Self { limit: PowerLimit::Average(p_avg), q_avg })
    }

    pub fn p_pk(&self) -> Option<f64> {
        match self.limit {
            PowerLimit::Peak(p) => Some(p),
            PowerLimit::Average(_) => None,
        }
    }

    pub fn p_avg(&self) -> Option<f64> {
        match self.limit {
            PowerLimit::Average(p) => Some(p),
            PowerLimit::Peak(_) => None,
        }
    }
}

/// Lagrange multipliers: `mu1` for the interference limit, `mu2` for the
/// average transmit-power limit (zero under a peak limit).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualState {
    pub mu1: f64,
    pub mu2: f64,
}

impl DualState {
    pub fn as_array(&self) -> [f64; 2] {
        [self.mu1, self.mu2]
    }
}

/// Frozen `(|h|², |g|²)` draws standing in for the expectations in the
/// average constraints. Under imperfect CSI the second entry is the
/// estimate `|ĝ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pairs: Vec<(f64, f64)>,
}

impl SampleSet {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("samples", "need at least one channel draw"));
        }
        if pairs.iter().any(|&(h, g)| !(h >= 0.0 && g >= 0.0 && h.is_finite() && g.is_finite())) {
            return Err(invalid("samples", "channel gains must be finite and >= 0"));
        }
        Ok(Self { pairs })
    }

    /// `n` independent draws of the transmission-link gain and of the
    /// interference-link gain the transmitter sees (exact or estimated,
    /// depending on `env.sigma_e2`).
    pub fn draw<R: Rng + ?Sized>(env: &ChannelEnv, n: usize, rng: &mut R) -> Result<Self> {
        let h = env.h_spec.sampler();
        let g = env.g_estimate_spec().sampler();
        Self::new((0..n).map(|_| (h.power_gain(rng), g.power_gain(rng))).collect())
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// How per-sample powers are obtained for given multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Bisection on the full stationarity condition.
    Exact,
    /// High-SNR Lambert-W closed form (perfect sensing, `λ = 1`).
    Lambert,
}

/// Power allocation as a function of the channel, for fixed multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantPolicy {
    pub scenario: Scenario,
    pub lambda: f64,
    pub duals: DualState,
    /// Per-sample ceiling: the peak limit, or [`DEFAULT_P_MAX`].
    pub cap: f64,
    pub solver: SolverKind,
    /// Transmission-link gain below which the transmitter stays silent.
    pub silent_threshold: Option<f64>,
}

impl InstantPolicy {
    pub fn new(
        scenario: Scenario,
        lambda: f64,
        duals: DualState,
        cap: f64,
        solver: SolverKind,
        silent_threshold: Option<f64>,
    ) -> Result<Self> {
        check_probability("lambda", lambda)?;
        check_positive("cap", cap)?;
        if duals.mu1 < 0.0 || duals.mu2 < 0.0 {
            return Err(invalid("duals", "multipliers must be >= 0"));
        }
        if solver == SolverKind::Lambert && !(scenario.sensing.is_perfect() && lambda == 1.0) {
            return Err(invalid(
                "solver",
                "the Lambert-W approximation needs perfect sensing and lambda = 1",
            ));
        }
        if let Some(t) = silent_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("silent_threshold", format!("{t} must be finite and >= 0")));
            }
        }
        Ok(Self { scenario, lambda, duals, cap, solver, silent_threshold })
    }

    pub fn is_silent(&self, h2: f64) -> bool {
        self.silent_threshold.is_some_and(|t| h2 < t)
    }

    /// Power for one decision. `g2` is the interference-link gain known to
    /// the transmitter (`|ĝ|²` under imperfect CSI).
    pub fn power(&self, decision: Decision, h2: f64, g2: f64) -> f64 {
        self.power_with_guess(decision, h2, g2, None)
    }

    pub(crate) fn power_with_guess(&self, decision: Decision, h2: f64, g2: f64, guess: Option<f64>) -> f64 {
        let sc = &self.scenario;
        if h2 <= 0.0 || self.is_silent(h2) || sc.sensing.joint().decision_prob(decision) == 0.0 {
            return 0.0;
        }
        let g_eff = g2 + sc.env.sigma_e2;
        let rhs = stationarity_rhs(sc, decision, self.duals.as_array(), g_eff);
        if rhs <= 0.0 {
            return self.cap;
        }
        match self.solver {
            SolverKind::Exact => {
                let st = kkt::Stationarity::new(sc, decision, h2, self.lambda);
                if st.is_zero() {
                    return 0.0;
                }
                if st.lhs(self.cap) >= rhs {
                    return self.cap;
                }
                // Below the bracket the optimum is indistinguishable from silence.
                st.solve(rhs, guess).unwrap_or(0.0)
            }
            SolverKind::Lambert => lambert_power(sc, decision, h2, rhs).min(self.cap),
        }
    }

    pub fn powers(&self, h2: f64, g2: f64) -> [f64; 2] {
        [self.power(Decision::Idle, h2, g2), self.power(Decision::Busy, h2, g2)]
    }
}

/// A power allocation: constant under statistical CSI, channel-dependent
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerPolicy {
    Constant([f64; 2]),
    Instantaneous(InstantPolicy),
}

impl PowerPolicy {
    pub fn powers(&self, h2: f64, g2: f64) -> [f64; 2] {
        match self {
            PowerPolicy::Constant(p) => *p,
            PowerPolicy::Instantaneous(pol) => pol.powers(h2, g2),
        }
    }

    pub fn power(&self, decision: Decision, h2: f64, g2: f64) -> f64 {
        match self {
            PowerPolicy::Constant(p) => p[decision.index()],
            PowerPolicy::Instantaneous(pol) => pol.power(decision, h2, g2),
        }
    }

    pub fn silent_threshold(&self) -> Option<f64> {
        match self {
            PowerPolicy::Constant(_) => None,
            PowerPolicy::Instantaneous(pol) => pol.silent_threshold,
        }
    }
}

/// Sample averages of a policy's error rates and constraint terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvaluation {
    pub ber: BerPair,
    /// Mean of `Pr{Ĥ₀}P₀ + Pr{Ĥ₁}P₁`.
    pub avg_power: f64,
    /// Mean of `[(1-P_d)P₀ + P_d P₁]·(|g|² + σ_e²)`.
    pub avg_interference: f64,
}

/// Averages the instantaneous error rates and constraint terms of `policy`
/// over `samples`.
pub fn evaluate_policy(sc: &Scenario, policy: &PowerPolicy, samples: &SampleSet) -> PolicyEvaluation {
    let terms: Vec<[f64; 4]> = samples
        .pairs()
        .par_iter()
        .map(|&(h2, g2)| {
            let p = policy.powers(h2, g2);
            [
                ber_instant(sc, BerKind::Hp, p, h2),
                ber_instant(sc, BerKind::Lp, p, h2),
                transmit_term(sc, p),
                interference_term(sc, p, g2 + sc.env.sigma_e2),
            ]
        })
        .collect();
    let [hp, lp, pw, intf] = terms.iter().fold([0.0; 4], |acc, t| std::array::from_fn(|k| acc[k] + t[k]));
    let n = samples.len() as f64;
    PolicyEvaluation {
        ber: BerPair { hp: hp / n, lp: lp / n },
        avg_power: pw / n,
        avg_interference: intf / n,
    }
}

pub(crate) fn transmit_term(sc: &Scenario, p: [f64; 2]) -> f64 {
    let j = sc.sensing.joint();
    j.decision_prob(Decision::Idle) * p[0] + j.decision_prob(Decision::Busy) * p[1]
}

pub(crate) fn interference_term(sc: &Scenario, p: [f64; 2], g_eff: f64) -> f64 {
    let p_d = sc.sensing.p_detect();
    ((1.0 - p_d) * p[0] + p_d * p[1]) * g_eff
}
