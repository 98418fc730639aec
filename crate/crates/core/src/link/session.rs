use rand::Rng;

use super::arq::{transmit_packet, LinkParams, RetxBudget};
use super::coder::{ChannelCoder, IdentityCoder};
use super::image::{psnr, GrayImage};
use super::packet::{depacketize, packetize, partition_bitplanes, recombine_bitplanes};
use crate::ber::Scenario;
use crate::error::Result;
use crate::power::PowerPolicy;
use crate::rng::stream;

/// Outcome of sending a whole image.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    /// Reconstruction quality in dB; `+∞` when the image arrives intact.
    pub psnr: f64,
    pub n_re: u64,
    pub n_silent: u64,
    /// Transmitted attempts, including retransmissions.
    pub n_attempts: u64,
    /// Σ over attempts of `P_i × symbols`.
    pub energy: f64,
    /// Energy per transmitted symbol.
    pub avg_power: f64,
    pub ber_hp_emp: f64,
    pub ber_lp_emp: f64,
    pub received: GrayImage,
}

/// [`run_session_with_coder`] with the identity code.
pub fn run_session<R: Rng + ?Sized>(
    img: &GrayImage,
    n_packets: usize,
    sc: &Scenario,
    policy: &PowerPolicy,
    params: &LinkParams,
    rng: &mut R,
) -> Result<SessionReport> {
    run_session_with_coder(img, n_packets, sc, policy, params, &IdentityCoder, rng)
}

/// Splits the image into layers and packets, sends every packet with ARQ,
/// and rebuilds the image from what was received.
///
/// Packet `k` draws from its own stream of a session seed taken from `rng`,
/// so runs that differ only in policy or modulation see the same channel
/// for every packet.
pub fn run_session_with_coder<R: Rng + ?Sized>(
    img: &GrayImage,
    n_packets: usize,
    sc: &Scenario,
    policy: &PowerPolicy,
    params: &LinkParams,
    coder: &dyn ChannelCoder,
    rng: &mut R,
) -> Result<SessionReport> {
    let (hp, lp) = partition_bitplanes(img);
    let packets = packetize(&hp, &lp, n_packets)?;
    let mut budget = RetxBudget::new(params.n_upper);
    let mut received = Vec::with_capacity(packets.len());
    let (mut n_re, mut n_silent, mut n_attempts) = (0, 0, 0);
    let (mut energy, mut symbols) = (0.0, 0u64);
    let (mut hp_err, mut lp_err, mut hp_bits, mut lp_bits) = (0u64, 0u64, 0u64, 0u64);
    let seed: u64 = rng.random();
    for p in &packets {
        let mut prng = stream(seed, p.index as u64);
        let o = transmit_packet(p, sc, policy, params, coder, &mut budget, &mut prng)?;
        n_re += o.retransmissions;
        n_silent += o.silent;
        n_attempts += o.retransmissions + 1;
        energy += o.energy;
        symbols += o.symbols_sent;
        hp_err += o.hp_errors;
        lp_err += o.lp_errors;
        hp_bits += p.hp_bits.len() as u64;
        lp_bits += p.lp_bits.len() as u64;
        received.push(o.received);
    }
    let (hp_rx, lp_rx) = depacketize(&received, hp.len(), lp.len())?;
    let out = recombine_bitplanes(&hp_rx, &lp_rx, img.width(), img.height())?;
    Ok(SessionReport {
        psnr: psnr(img, &out)?,
        n_re,
        n_silent,
        n_attempts,
        energy,
        avg_power: if symbols > 0 { energy / symbols as f64 } else { 0.0 },
        ber_hp_emp: hp_err as f64 / hp_bits.max(1) as f64,
        ber_lp_emp: lp_err as f64 / lp_bits.max(1) as f64,
        received: out,
    })
}
