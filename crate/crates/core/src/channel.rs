//! Spectrum-sensing statistics, fading models and the secondary link's
//! input-output relation.
//!
//! The primary user is either idle (`H₀`) or busy (`H₁`). The secondary
//! transmitter senses the band and acts on its decision (`Ĥ₀`/`Ĥ₁`); the
//! receiver sees `y = h·s + n`, plus the primary's signal `w` when the band
//! is actually busy.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{check_nonnegative, check_positive, check_probability, invalid, Error, Result};

/// True activity of the primary user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimaryState {
    Idle,
    Busy,
}

/// Outcome of spectrum sensing at the secondary transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Idle,
    Busy,
}

impl PrimaryState {
    pub const ALL: [PrimaryState; 2] = [PrimaryState::Idle, PrimaryState::Busy];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl Decision {
    pub const ALL: [Decision; 2] = [Decision::Idle, Decision::Busy];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Sensing performance and primary-user priors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingModel {
    p_detect: f64,
    p_false_alarm: f64,
    prior_busy: f64,
}

/// `Pr{H_j, Ĥ_i}` indexed as `[state][decision]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbs(pub [[f64; 2]; 2]);

impl JointProbs {
    pub fn get(&self, state: PrimaryState, decision: Decision) -> f64 {
        self.0[state.index()][decision.index()]
    }

    /// Marginal `Pr{Ĥ_i}`.
    pub fn decision_prob(&self, decision: Decision) -> f64 {
        let i = decision.index();
        self.0[0][i] + self.0[1][i]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().flatten().sum()
    }
}

impl SensingModel {
    pub fn new(p_detect: f64, p_false_alarm: f64, prior_busy: f64) -> Result<Self> {
        check_probability("p_detect", p_detect)?;
        check_probability("p_false_alarm", p_false_alarm)?;
        check_probability("prior_busy", prior_busy)?;
        Ok(Self { p_detect, p_false_alarm, prior_busy })
    }

    /// Error-free sensing (`P_d = 1`, `P_f = 0`).
    pub fn perfect(prior_busy: f64) -> Result<Self> {
        Self::new(1.0, 0.0, prior_busy)
    }

    pub fn p_detect(&self) -> f64 {
        self.p_detect
    }

    pub fn p_false_alarm(&self) -> f64 {
        self.p_false_alarm
    }

    pub fn prior_busy(&self) -> f64 {
        self.prior_busy
    }

    pub fn prior_idle(&self) -> f64 {
        1.0 - self.prior_busy
    }

    pub fn is_perfect(&self) -> bool {
        self.p_detect == 1.0 && self.p_false_alarm == 0.0
    }

    pub fn prior(&self, state: PrimaryState) -> f64 {
        match state {
            PrimaryState::Idle => self.prior_idle(),
            PrimaryState::Busy => self.prior_busy,
        }
    }

    /// `Pr{Ĥ_i | H_j}`.
    pub fn decision_given_state(&self, decision: Decision, state: PrimaryState) -> f64 {
        let p_busy = match state {
            PrimaryState::Idle => self.p_false_alarm,
            PrimaryState::Busy => self.p_detect,
        };
        match decision {
            Decision::Busy => p_busy,
            Decision::Idle => 1.0 - p_busy,
        }
    }

    pub fn joint(&self) -> JointProbs {
        let mut t = [[0.0; 2]; 2];
        for s in PrimaryState::ALL {
            for d in Decision::ALL {
                t[s.index()][d.index()] = self.prior(s) * self.decision_given_state(d, s);
            }
        }
        JointProbs(t)
    }

    /// `(Pr{H₀ | Ĥ_i}, Pr{H₁ | Ĥ_i})` by Bayes' rule.
    pub fn posterior(&self, decision: Decision) -> Result<[f64; 2]> {
        let joint = self.joint();
        let marginal = joint.decision_prob(decision);
        if marginal <= 0.0 {
            return Err(Error::DegenerateDecision(decision));
        }
        Ok([
            joint.get(PrimaryState::Idle, decision) / marginal,
            joint.get(PrimaryState::Busy, decision) / marginal,
        ])
    }

    /// Draws the true state from the priors, then the decision from
    /// `P_d`/`P_f` conditioned on it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (PrimaryState, Decision) {
        let state =
            if rng.random::<f64>() < self.prior_busy { PrimaryState::Busy } else { PrimaryState::Idle };
        let busy = rng.random::<f64>() < self.decision_given_state(Decision::Busy, state);
        (state, if busy { Decision::Busy } else { Decision::Idle })
    }
}

/// Free-function form of [`SensingModel::joint`].
pub fn joint_sensing_probs(s: &SensingModel) -> JointProbs {
    s.joint()
}

/// Free-function form of [`SensingModel::posterior`].
pub fn posterior_state_probs(s: &SensingModel, decision: Decision) -> Result<[f64; 2]> {
    s.posterior(decision)
}

/// Nakagami-m fading: `|h|²` is Gamma distributed with shape `m` and
/// mean `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub m: f64,
    pub omega: f64,
}

impl FadingSpec {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 0.5 && m.is_finite()) {
            return Err(invalid("m", format!("Nakagami shape {m} must be >= 0.5")));
        }
        check_positive("omega", omega)?;
        Ok(Self { m, omega })
    }

    /// Unit-mean Rayleigh fading (`m = 1`, exponential power gain).
    pub fn rayleigh() -> Self {
        Self { m: 1.0, omega: 1.0 }
    }

    pub fn sampler(&self) -> FadingSampler {
        FadingSampler { power: Gamma::new(self.m, self.omega / self.m).expect("validated fading spec") }
    }

    /// Density of the power gain `z = |h|²`.
    pub fn power_pdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return if self.m < 1.0 && z == 0.0 { f64::INFINITY } else { 0.0 };
        }
        let m = self.m;
        let rate = m / self.omega;
        (m * rate.ln() + (m - 1.0) * z.ln() - rate * z - libm::lgamma(m)).exp()
    }
}

/// Pre-built sampler for a [`FadingSpec`].
#[derive(Debug, Clone, Copy)]
pub struct FadingSampler {
    power: Gamma<f64>,
}

impl FadingSampler {
    pub fn power_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power.sample(rng)
    }

    pub fn coefficient<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let amplitude = self.power_gain(rng).sqrt();
        Complex64::from_polar(amplitude, TAU * rng.random::<f64>())
    }
}

/// Draws one fading coefficient with Gamma-distributed power and uniform
/// phase.
pub fn sample_fading<R: Rng + ?Sized>(spec: &FadingSpec, rng: &mut R) -> Complex64 {
    spec.sampler().coefficient(rng)
}

/// Noise and interference environment of the secondary link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEnv {
    pub sigma_n2: f64,
    pub sigma_w2: f64,
    pub h_spec: FadingSpec,
    pub g_spec: FadingSpec,
    /// Variance of the interference-link estimation error (0 = perfect CSI).
    pub sigma_e2: f64,
}

impl ChannelEnv {
    pub fn new(
        sigma_n2: f64,
        sigma_w2: f64,
        h_spec: FadingSpec,
        g_spec: FadingSpec,
        sigma_e2: f64,
    ) -> Result<Self> {
        check_positive("sigma_n2", sigma_n2)?;
        check_nonnegative("sigma_w2", sigma_w2)?;
        check_nonnegative("sigma_e2", sigma_e2)?;
        if sigma_e2 >= g_spec.omega && sigma_e2 > 0.0 {
            return Err(invalid(
                "sigma_e2",
                format!(
                    "estimation error {sigma_e2} must be below the interference-link gain {}",
                    g_spec.omega
                ),
            ));
        }
        Ok(Self { sigma_n2, sigma_w2, h_spec, g_spec, sigma_e2 })
    }

    /// `σ_j²`: noise alone when idle, noise plus primary signal when busy.
    pub fn noise_var(&self, state: PrimaryState) -> f64 {
        match state {
            PrimaryState::Idle => self.sigma_n2,
            PrimaryState::Busy => self.sigma_n2 + self.sigma_w2,
        }
    }

    /// Distribution of the interference-link gain known to the transmitter:
    /// the true gain under perfect CSI, otherwise the estimate, whose mean
    /// is reduced by the error variance.
    pub fn g_estimate_spec(&self) -> FadingSpec {
        FadingSpec { m: self.g_spec.m, omega: self.g_spec.omega - self.sigma_e2 }
    }

    /// Received sample for transmitted symbol `tx` over coefficient `h`.
    pub fn receive<R: Rng + ?Sized>(
        &self,
        state: PrimaryState,
        tx: Complex64,
        h: Complex64,
        rng: &mut R,
    ) -> Complex64 {
        h * tx + circular_gaussian(self.noise_var(state), rng)
    }
}

/// Zero-mean circularly symmetric complex Gaussian with total variance
/// `var`.
pub fn circular_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// One sensed channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub y: Complex64,
    pub state: PrimaryState,
    pub decision: Decision,
}

/// Senses the band, lets `symbol_for` pick the symbol for the decision,
/// and passes it through the channel.
///
/// `n` (variance `σₙ²`) is always added; the primary signal `w` (variance
/// `σ_w²`) only when the band is truly busy. Both are redrawn per call.
pub fn sense_and_transmit<R, F>(
    env: &ChannelEnv,
    sensing: &SensingModel,
    h: Complex64,
    rng: &mut R,
    symbol_for: F,
) -> Transmission
where
    R: Rng + ?Sized,
    F: FnOnce(Decision) -> Complex64,
{
    let (state, decision) = sensing.sample(rng);
    let tx = symbol_for(decision);
    let y = env.receive(state, tx, h, rng);
    Transmission { y, state, decision }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn joint_table_examples() {
        let s = SensingModel::new(0.9, 0.1, 0.4).unwrap();
        let j = s.joint();
        assert!(close(j.get(PrimaryState::Busy, Decision::Busy), 0.36));
        assert!(close(j.get(PrimaryState::Busy, Decision::Idle), 0.04));
        assert!(close(j.get(PrimaryState::Idle, Decision::Busy), 0.06));
        assert!(close(j.get(PrimaryState::Idle, Decision::Idle), 0.54));

        let p = SensingModel::perfect(0.4).unwrap().joint();
        assert_eq!(p.0, [[0.6, 0.0], [0.0, 0.4]]);

        let u = SensingModel::new(0.5, 0.5, 0.5).unwrap().joint();
        assert!(u.0.iter().flatten().all(|&v| close(v, 0.25)));
    }

    #[test]
    fn posterior_examples() {
        let p = SensingModel::perfect(0.4).unwrap();
        assert_eq!(p.posterior(Decision::Idle).unwrap(), [1.0, 0.0]);

        let s = SensingModel::new(0.9, 0.1, 0.4).unwrap();
        let post = s.posterior(Decision::Busy).unwrap();
        assert!(close(post[0], 0.06 / 0.42));
        assert!(close(post[1], 0.36 / 0.42));

        let u = SensingModel::new(0.5, 0.5, 0.5).unwrap();
        for d in Decision::ALL {
            let post = u.posterior(d).unwrap();
            assert!(close(post[0], 0.5) && close(post[1], 0.5));
        }
    }

    #[test]
    fn degenerate_decision() {
        let s = SensingModel::new(1.0, 0.0, 1.0).unwrap();
        assert_eq!(s.posterior(Decision::Idle), Err(Error::DegenerateDecision(Decision::Idle)));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(SensingModel::new(1.2, 0.1, 0.4).is_err());
        assert!(SensingModel::new(0.9, -0.1, 0.4).is_err());
        assert!(FadingSpec::new(0.4, 1.0).is_err());
        assert!(FadingSpec::new(1.0, 0.0).is_err());
    }

    #[test]
    fn noise_only_residual_variance() {
        let env = ChannelEnv::new(0.01, 0.0, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).unwrap();
        let s = SensingModel::new(0.9, 0.1, 0.4).unwrap();
        let mut rng = seeded(7);
        let h = Complex64::new(0.3, -1.1);
        let tx = Complex64::new(1.0, 1.0);
        let n = 100_000;
        let var = (0..n)
            .map(|_| (sense_and_transmit(&env, &s, h, &mut rng, |_| tx).y - h * tx).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((var / 0.01 - 1.0).abs() < 0.02, "var = {var}");
    }

    #[test]
    fn always_busy_residual_variance() {
        let env = ChannelEnv::new(0.01, 0.5, FadingSpec::rayleigh(), FadingSpec::rayleigh(), 0.0).unwrap();
        let s = SensingModel::new(1.0, 0.1, 1.0).unwrap();
        let mut rng = seeded(8);
        let h = Complex64::new(1.0, 0.0);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let t = sense_and_transmit(&env, &s, h, &mut rng, |_| Complex64::new(0.0, 0.0));
            assert_eq!(t.decision, Decision::Busy);
            acc += t.y.norm_sqr();
        }
        assert!((acc / n as f64 / 0.51 - 1.0).abs() < 0.02);
    }

    #[test]
    fn power_pdf_integrates_to_one() {
        for &(m, omega) in &[(1.0, 1.0), (2.0, 0.5), (3.3, 2.0)] {
            let spec = FadingSpec::new(m, omega).unwrap();
            let dz = 1e-4;
            let total: f64 = (0..200_000).map(|k| spec.power_pdf((k as f64 + 0.5) * dz) * dz).sum();
            assert!((total - 1.0).abs() < 1e-6, "m = {m}: {total}");
        }
    }
}
