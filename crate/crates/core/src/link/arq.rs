use rand::Rng;

use super::coder::ChannelCoder;
use super::packet::Packet;
use crate::ber::Scenario;
use crate::error::{invalid, Error, Result};
use crate::hqam::{HqamConstellation, MapDetector, Word};
use crate::power::PowerPolicy;

/// Consecutive silent slots after which a packet is abandoned as
/// undeliverable.
const MAX_SILENT_SLOTS: u64 = 1_000_000;

/// How the four bits of a symbol are placed on the constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    /// HP bits always on the quadrant (most protected) positions.
    Hqam,
    /// Conventional QAM: the label positions rotate with the symbol index,
    /// so neither layer is favored. Intended for `α = 1`.
    Qam,
}

/// ARQ settings of a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Received-power threshold `P_i·|h|²` below which the receiver asks
    /// for a retransmission.
    pub thr: f64,
    /// Session-wide retransmission budget; `None` for unlimited.
    pub n_upper: Option<u64>,
    pub modulation: Modulation,
}

impl LinkParams {
    pub fn new(thr: f64, n_upper: Option<u64>, modulation: Modulation) -> Result<Self> {
        if thr.is_nan() || thr < 0.0 {
            return Err(invalid("thr", format!("{thr} must be >= 0")));
        }
        if thr.is_infinite() && n_upper.is_none() {
            return Err(invalid("thr", "an infinite threshold needs a retransmission cap"));
        }
        Ok(Self { thr, n_upper, modulation })
    }
}

/// Remaining retransmissions shared by all packets of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetxBudget {
    remaining: Option<u64>,
}

impl RetxBudget {
    pub fn new(cap: Option<u64>) -> Self {
        Self { remaining: cap }
    }

    pub fn remaining(&self) -> Option<u64> {
        self.remaining
    }

    fn take(&mut self) -> bool {
        match &mut self.remaining {
            None => true,
            Some(0) => false,
            Some(n) => {
                *n -= 1;
                true
            }
        }
    }
}

/// Result of delivering one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketOutcome {
    pub received: Packet,
    pub retransmissions: u64,
    /// Slots skipped because the policy assigned zero power.
    pub silent: u64,
    /// Σ over transmitted attempts of `P_i × symbols`.
    pub energy: f64,
    /// Symbols put on the air, over all attempts.
    pub symbols_sent: u64,
    pub hp_errors: u64,
    pub lp_errors: u64,
}

fn label(bits: [u8; 4], k: usize, modulation: Modulation) -> Word {
    let shift = match modulation {
        Modulation::Hqam => 0,
        Modulation::Qam => k % 4,
    };
    (0..4).fold(0, |w, pos| w | (bits[pos] << (3 - (pos + shift) % 4)))
}

fn unlabel(word: Word, k: usize, modulation: Modulation) -> [u8; 4] {
    let shift = match modulation {
        Modulation::Hqam => 0,
        Modulation::Qam => k % 4,
    };
    std::array::from_fn(|pos| (word >> (3 - (pos + shift) % 4)) & 1)
}

/// Sends one packet with ARQ.
///
/// Each attempt draws the primary state and sensing decision, the
/// transmission-link coefficient and the interference-link gain the
/// policy sees. A zero power is a silent slot. Otherwise the attempt costs
/// `P_i × symbols` of energy and is rejected while `P_i·|h|² < thr` and the
/// budget allows; the accepted (or forced, once the budget is spent)
/// attempt is modulated symbol by symbol, passed through the channel with
/// fresh noise and primary interference per symbol, and MAP-detected.
pub fn transmit_packet<R: Rng + ?Sized>(
    packet: &Packet,
    sc: &Scenario,
    policy: &PowerPolicy,
    params: &LinkParams,
    coder: &dyn ChannelCoder,
    budget: &mut RetxBudget,
    rng: &mut R,
) -> Result<PacketOutcome> {
    let hp_code = coder.encode(&packet.hp_bits);
    let lp_code = coder.encode(&packet.lp_bits);
    let n_sym = hp_code.len().max(lp_code.len()).div_ceil(2);
    let h_sampler = sc.env.h_spec.sampler();
    let g_sampler = sc.env.g_estimate_spec().sampler();

    let mut out = PacketOutcome {
        received: packet.clone(),
        retransmissions: 0,
        silent: 0,
        energy: 0.0,
        symbols_sent: 0,
        hp_errors: 0,
        lp_errors: 0,
    };
    let mut silent_run = 0;
    loop {
        let (state, decision) = sc.sensing.sample(rng);
        let h = h_sampler.coefficient(rng);
        let g2 = g_sampler.power_gain(rng);
        let h2 = h.norm_sqr();
        let p = policy.power(decision, h2, g2);
        if p <= 0.0 {
            out.silent += 1;
            silent_run += 1;
            if silent_run >= MAX_SILENT_SLOTS {
                return Err(Error::NonConvergence("silent-slot deferral"));
            }
            continue;
        }
        silent_run = 0;
        out.energy += p * n_sym as f64;
        out.symbols_sent += n_sym as u64;
        if p * h2 < params.thr && budget.take() {
            out.retransmissions += 1;
            continue;
        }

        let c = HqamConstellation::new(sc.alpha[decision.index()], p)?;
        let det = MapDetector::new(&c, decision, &sc.sensing, &sc.env)?;
        let mut hp_rx = vec![0u8; 2 * n_sym];
        let mut lp_rx = vec![0u8; 2 * n_sym];
        let bit = |v: &[u8], i: usize| v.get(i).copied().unwrap_or(0);
        for k in 0..n_sym {
            let bits = [
                bit(&hp_code, 2 * k),
                bit(&hp_code, 2 * k + 1),
                bit(&lp_code, 2 * k),
                bit(&lp_code, 2 * k + 1),
            ];
            let tx = c.modulate(label(bits, k, params.modulation));
            let y = sc.env.receive(state, tx, h, rng);
            let rx = unlabel(det.detect(y, h)?, k, params.modulation);
            hp_rx[2 * k..2 * k + 2].copy_from_slice(&rx[..2]);
            lp_rx[2 * k..2 * k + 2].copy_from_slice(&rx[2..]);
        }
        hp_rx.truncate(hp_code.len());
        lp_rx.truncate(lp_code.len());
        let hp = coder.decode(&hp_rx, packet.hp_bits.len());
        let lp = coder.decode(&lp_rx, packet.lp_bits.len());
        let diff = |a: &[u8], b: &[u8]| a.iter().zip(b).filter(|(x, y)| x != y).count() as u64;
        out.hp_errors = diff(&hp, &packet.hp_bits);
        out.lp_errors = diff(&lp, &packet.lp_bits);
        out.received = Packet { index: packet.index, hp_bits: hp, lp_bits: lp };
        return Ok(out);
    }
}
