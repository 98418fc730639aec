use std::f64::consts::PI;

use num_complex::Complex64;

use super::constellation::{HqamConstellation, Word};
use crate::channel::{ChannelEnv, Decision, PrimaryState, SensingModel};
use crate::error::{Error, Result};

/// MAP detector for one sensing decision.
///
/// Given the decision, the received sample is a two-component circular
/// Gaussian mixture around `h·s_k`: variance `σₙ²` weighted by
/// `Pr{H₀|Ĥ_i}` and `σₙ² + σ_w²` weighted by `Pr{H₁|Ĥ_i}`. Symbols are
/// equiprobable, so the rule maximizes the mixture likelihood.
#[derive(Debug, Clone)]
pub struct MapDetector {
    points: [Complex64; 16],
    /// `(ln(w_j / (π σ_j²)), 1/σ_j²)` for components with nonzero weight.
    components: Vec<(f64, f64)>,
}

impl MapDetector {
    pub fn new(
        c: &HqamConstellation,
        decision: Decision,
        sensing: &SensingModel,
        env: &ChannelEnv,
    ) -> Result<Self> {
        let posterior = sensing.posterior(decision)?;
        let mut components: Vec<(f64, f64)> = PrimaryState::ALL
            .iter()
            .filter(|s| posterior[s.index()] > 0.0)
            .map(|&s| {
                let var = env.noise_var(s);
                ((posterior[s.index()] / (PI * var)).ln(), 1.0 / var)
            })
            .collect();
        // Equal variances collapse to a single Gaussian.
        if components.len() == 2 && components[0].1 == components[1].1 {
            components = vec![(0.0, components[0].1)];
        }
        Ok(Self { points: *c.points(), components })
    }

    /// Log-likelihood of `y` given point `k`, up to a constant shared by
    /// all points.
    fn log_likelihood(&self, y: Complex64, h: Complex64, k: usize) -> f64 {
        let d2 = (y - h * self.points[k]).norm_sqr();
        match self.components.as_slice() {
            [(_, inv)] => -d2 * inv,
            [(a0, inv0), (a1, inv1)] => {
                let t0 = a0 - d2 * inv0;
                let t1 = a1 - d2 * inv1;
                let (hi, lo) = if t0 >= t1 { (t0, t1) } else { (t1, t0) };
                hi + (lo - hi).exp().ln_1p()
            }
            _ => unreachable!("posterior always has positive mass"),
        }
    }

    /// Most likely label, lowest label on exact ties.
    pub fn detect(&self, y: Complex64, h: Complex64) -> Result<Word> {
        if h.norm_sqr() == 0.0 {
            return Err(Error::ZeroChannel);
        }
        let mut best = 0;
        let mut best_ll = self.log_likelihood(y, h, 0);
        for k in 1..16 {
            let ll = self.log_likelihood(y, h, k);
            if ll > best_ll {
                best_ll = ll;
                best = k;
            }
        }
        Ok(best as Word)
    }
}

/// One-shot MAP detection. Prefer [`MapDetector`] in loops.
pub fn map_detect(
    y: Complex64,
    h: Complex64,
    decision: Decision,
    c: &HqamConstellation,
    sensing: &SensingModel,
    env: &ChannelEnv,
) -> Result<Word> {
    MapDetector::new(c, decision, sensing, env)?.detect(y, h)
}
