use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::constellation::{HqamConstellation, Word, HP_MASK, LP_MASK};
use super::detector::MapDetector;
use crate::channel::{sense_and_transmit, ChannelEnv, Decision, FadingSpec, SensingModel};
use crate::error::{invalid, Result};
use crate::rng::stream;

const BLOCK: usize = 1 << 15;

/// Channel seen by the Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkChannel {
    /// The same coefficient for every symbol.
    Fixed(Complex64),
    /// A fresh coefficient per symbol.
    Fading(FadingSpec),
}

/// Empirical bit-error rates with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McBer {
    pub hp: f64,
    pub lp: f64,
    pub hp_stderr: f64,
    pub lp_stderr: f64,
    /// Bits per class (two per symbol).
    pub bits: u64,
}

impl McBer {
    fn from_counts(hp_err: u64, lp_err: u64, symbols: u64) -> Self {
        let bits = 2 * symbols;
        let n = bits as f64;
        let hp = hp_err as f64 / n;
        let lp = lp_err as f64 / n;
        Self {
            hp,
            lp,
            hp_stderr: (hp * (1.0 - hp) / n).sqrt(),
            lp_stderr: (lp * (1.0 - lp) / n).sqrt(),
            bits,
        }
    }
}

/// Sends uniformly random words through sensing, fading and the MAP
/// detector. The constellation used on each symbol is the one for the
/// sensing decision (`constellations[0]` for idle, `[1]` for busy).
///
/// Work is split into fixed-size blocks, each on its own RNG stream keyed
/// by a seed drawn from `rng`, so the result does not depend on the
/// thread count.
pub fn monte_carlo_ber<R: Rng + ?Sized>(
    constellations: [&HqamConstellation; 2],
    sensing: &SensingModel,
    env: &ChannelEnv,
    channel: LinkChannel,
    n_symbols: usize,
    rng: &mut R,
) -> Result<McBer> {
    if n_symbols == 0 {
        return Err(invalid("n_symbols", "must be positive"));
    }
    if let LinkChannel::Fixed(h) = channel {
        if h.norm_sqr() == 0.0 {
            return Err(crate::Error::ZeroChannel);
        }
    }
    let joint = sensing.joint();
    let detectors: Vec<Option<MapDetector>> = Decision::ALL
        .iter()
        .map(|&d| {
            if joint.decision_prob(d) > 0.0 {
                MapDetector::new(constellations[d.index()], d, sensing, env).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let sampler = match channel {
        LinkChannel::Fading(spec) => Some(spec.sampler()),
        LinkChannel::Fixed(_) => None,
    };

    let seed: u64 = rng.random();
    let n_blocks = n_symbols.div_ceil(BLOCK);
    let (hp_err, lp_err) = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, b as u64);
            let len = BLOCK.min(n_symbols - b * BLOCK);
            let mut errs = (0u64, 0u64);
            for _ in 0..len {
                let word: Word = rng.random_range(0..16);
                let h = match (channel, &sampler) {
                    (LinkChannel::Fixed(h), _) => h,
                    (_, Some(s)) => s.coefficient(&mut rng),
                    _ => unreachable!(),
                };
                let t = sense_and_transmit(env, sensing, h, &mut rng, |d| {
                    constellations[d.index()].modulate(word)
                });
                let det = detectors[t.decision.index()]
                    .as_ref()
                    .expect("sampled decision has positive probability");
                let diff = word ^ det.detect(t.y, h).expect("nonzero channel");
                errs.0 += u64::from((diff & HP_MASK).count_ones());
                errs.1 += u64::from((diff & LP_MASK).count_ones());
            }
            errs
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(McBer::from_counts(hp_err, lp_err, n_symbols as u64))
}
