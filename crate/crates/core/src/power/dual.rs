use rayon::prelude::*;

use super::{
    interference_term, transmit_term, Constraints, DualState, InstantPolicy, PowerLimit, SampleSet,
    SolverKind, DEFAULT_P_MAX,
};
use crate::ber::Scenario;
use crate::channel::Decision;
use crate::error::{check_positive, invalid, Error, Result};

/// Multiplier update rule of the projected subgradient iteration
/// `μ ← max(0, μ + step)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Each multiplier moves by its own step length in the direction of its
    /// constraint residual. The length grows by `grow` while the residual
    /// keeps its sign and is halved when it flips, so the iteration adapts
    /// to multipliers whose scale is unknown in advance.
    Adaptive { initial: f64, grow: f64 },
    /// `μ ← max(0, μ + t·r)`. If the residual sign keeps flipping over a
    /// 1000-iteration window, the step decays as `t/√n` from then on.
    Fixed { t: [f64; 2] },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Adaptive { initial: 0.05, grow: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    pub step: StepRule,
    /// Bound on `|μ·r|` at convergence.
    pub tol: f64,
    /// Residual band, relative to `max(1, limit)`, inside which a
    /// constraint counts as met (and as tight when its multiplier is
    /// positive).
    pub feas_tol: f64,
    pub max_iter: usize,
    pub mu_init: [f64; 2],
    pub solver: SolverKind,
    pub silent_threshold: Option<f64>,
    /// Per-sample ceiling under an average power limit.
    pub p_max: f64,
    pub trace: bool,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            step: StepRule::default(),
            tol: 1e-7,
            feas_tol: 1e-6,
            max_iter: 10_000,
            mu_init: [0.1, 0.1],
            solver: SolverKind::Exact,
            silent_threshold: None,
            p_max: DEFAULT_P_MAX,
            trace: false,
        }
    }
}

/// One iteration of the dual method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub mu: [f64; 2],
    /// `[interference, transmit power]` sample average minus its limit.
    pub residuals: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub policy: InstantPolicy,
    /// Powers on the optimization samples, in sample order.
    pub powers: Vec<[f64; 2]>,
    pub iterations: usize,
    pub residuals: [f64; 2],
    /// Some sample sits at the `p_max` ceiling under an average limit.
    pub cap_limited: bool,
    pub trace: Vec<TraceRow>,
}

impl DualSolution {
    pub fn duals(&self) -> DualState {
        self.policy.duals
    }
}

/// Peak transmit power and average interference limits.
pub fn optimize_peak_avg(
    samples: &SampleSet,
    sc: &Scenario,
    lambda: f64,
    cons: &Constraints,
    opts: &DualOptions,
) -> Result<DualSolution> {
    if cons.p_pk().is_none() {
        return Err(invalid("constraints", "expected a peak power limit"));
    }
    optimize(samples, sc, lambda, cons, opts)
}

/// Average transmit power and average interference limits.
pub fn optimize_avg_avg(
    samples: &SampleSet,
    sc: &Scenario,
    lambda: f64,
    cons: &Constraints,
    opts: &DualOptions,
) -> Result<DualSolution> {
    if cons.p_avg().is_none() {
        return Err(invalid("constraints", "expected an average power limit"));
    }
    optimize(samples, sc, lambda, cons, opts)
}

/// Either limit type with an estimated interference link: the samples hold
/// `|ĝ|²` and every interference term uses `|ĝ|² + σ_e²`, with `σ_e²`
/// taken from the scenario. With `σ_e² = 0` this is the perfect-CSI
/// solver.
pub fn optimize_imperfect_csi(
    samples: &SampleSet,
    sc: &Scenario,
    lambda: f64,
    cons: &Constraints,
    opts: &DualOptions,
) -> Result<DualSolution> {
    optimize(samples, sc, lambda, cons, opts)
}

struct Stepper {
    rule: StepRule,
    len: [f64; 2],
    last_sign: [f64; 2],
    flips: [usize; 2],
    decay_from: [Option<usize>; 2],
}

const OSCILLATION_WINDOW: usize = 1000;
const OSCILLATION_FLIPS: usize = 10;

impl Stepper {
    fn new(rule: StepRule) -> Self {
        let len = match rule {
            StepRule::Adaptive { initial, .. } => [initial; 2],
            StepRule::Fixed { t } => t,
        };
        Self { rule, len, last_sign: [0.0; 2], flips: [0; 2], decay_from: [None; 2] }
    }

    fn update(&mut self, k: usize, iter: usize, mu: f64, r: f64) -> f64 {
        let sign = if r > 0.0 {
            1.0
        } else if r < 0.0 {
            -1.0
        } else {
            0.0
        };
        let flipped = sign * self.last_sign[k] < 0.0;
        let next = match self.rule {
            StepRule::Adaptive { grow, .. } => {
                if flipped {
                    self.len[k] *= 0.5;
                } else if sign * self.last_sign[k] > 0.0 && !(mu == 0.0 && sign < 0.0) {
                    self.len[k] *= grow;
                }
                (mu + self.len[k] * sign).max(0.0)
            }
            StepRule::Fixed { t } => {
                if flipped {
                    self.flips[k] += 1;
                }
                if (iter + 1).is_multiple_of(OSCILLATION_WINDOW) {
                    if self.decay_from[k].is_none() && self.flips[k] >= OSCILLATION_FLIPS {
                        self.decay_from[k] = Some(iter);
                    }
                    self.flips[k] = 0;
                }
                let t = match self.decay_from[k] {
                    Some(n0) => t[k] / ((iter - n0 + 1) as f64).sqrt(),
                    None => t[k],
                };
                (mu + t * r).max(0.0)
            }
        };
        if sign != 0.0 {
            self.last_sign[k] = sign;
        }
        next
    }
}

fn optimize(
    samples: &SampleSet,
    sc: &Scenario,
    lambda: f64,
    cons: &Constraints,
    opts: &DualOptions,
) -> Result<DualSolution> {
    check_positive("tol", opts.tol)?;
    check_positive("feas_tol", opts.feas_tol)?;
    check_positive("p_max", opts.p_max)?;
    if opts.mu_init.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(invalid("mu_init", "multipliers must be finite and >= 0"));
    }
    let (cap, limits, active) = match cons.limit {
        PowerLimit::Peak(p) => (p, [cons.q_avg, f64::INFINITY], [true, false]),
        PowerLimit::Average(p) => (opts.p_max, [cons.q_avg, p], [true, true]),
    };
    let band = limits.map(|l| opts.feas_tol * l.max(1.0));

    let mut mu = [opts.mu_init[0], if active[1] { opts.mu_init[1] } else { 0.0 }];
    let mut policy = InstantPolicy::new(
        *sc,
        lambda,
        DualState { mu1: mu[0], mu2: mu[1] },
        cap,
        opts.solver,
        opts.silent_threshold,
    )?;
    let mut powers = vec![[0.0; 2]; samples.len()];
    let mut stepper = Stepper::new(opts.step);
    let mut trace = Vec::new();

    for iter in 0..opts.max_iter {
        policy.duals = DualState { mu1: mu[0], mu2: mu[1] };
        solve_all(&policy, samples, &mut powers, iter > 0);
        let r = residuals(sc, samples, &powers, limits, active);
        if opts.trace {
            trace.push(TraceRow { iteration: iter, mu, residuals: r });
        }
        let done = (0..2).filter(|&k| active[k]).all(|k| {
            r[k] <= band[k] && (mu[k] == 0.0 || r[k] >= -band[k]) && (mu[k] * r[k]).abs() <= opts.tol
        });
        if done {
            let cap_limited = cons.p_avg().is_some() && powers.iter().flatten().any(|&p| p >= opts.p_max);
            return Ok(DualSolution { policy, powers, iterations: iter, residuals: r, cap_limited, trace });
        }
        for k in (0..2).filter(|&k| active[k]) {
            mu[k] = stepper.update(k, iter, mu[k], r[k]);
        }
    }
    let r = residuals(sc, samples, &powers, limits, active);
    Err(Error::DualNonConvergence { iterations: opts.max_iter, mu, residuals: r })
}

fn solve_all(policy: &InstantPolicy, samples: &SampleSet, powers: &mut [[f64; 2]], warm: bool) {
    powers.par_iter_mut().zip(samples.pairs().par_iter()).for_each(|(p, &(h2, g2))| {
        for d in Decision::ALL {
            let i = d.index();
            let guess = (warm && p[i] > 0.0).then_some(p[i]);
            p[i] = policy.power_with_guess(d, h2, g2, guess);
        }
    });
}

fn residuals(
    sc: &Scenario,
    samples: &SampleSet,
    powers: &[[f64; 2]],
    limits: [f64; 2],
    active: [bool; 2],
) -> [f64; 2] {
    let n = samples.len() as f64;
    // Sequential sums keep the result independent of the thread count.
    let (intf, tx) = powers.iter().zip(samples.pairs()).fold((0.0, 0.0), |acc, (&p, &(_, g2))| {
        (acc.0 + interference_term(sc, p, g2 + sc.env.sigma_e2), acc.1 + transmit_term(sc, p))
    });
    [intf / n - limits[0], if active[1] { tx / n - limits[1] } else { 0.0 }]
}
