use super::image::GrayImage;
use crate::error::{invalid, Result};

/// Bits of the dimension header at the front of the HP stream.
pub const HEADER_BITS: usize = 64;

/// One bit per byte, values 0 or 1.
pub type Bits = Vec<u8>;

/// Splits an image into priority layers: the HP stream is a 64-bit header
/// (width, height as `u32`, most significant bit first) followed by the
/// four most significant bitplanes of every pixel; the LP stream holds the
/// four least significant ones. Bits are pixel-major, high bit first.
pub fn partition_bitplanes(img: &GrayImage) -> (Bits, Bits) {
    let n = img.pixels().len();
    let mut hp = Vec::with_capacity(HEADER_BITS + 4 * n);
    for v in [img.width(), img.height()] {
        hp.extend((0..32).rev().map(|k| ((v >> k) & 1) as u8));
    }
    let mut lp = Vec::with_capacity(4 * n);
    for &p in img.pixels() {
        hp.extend((4..8).rev().map(|k| (p >> k) & 1));
        lp.extend((0..4).rev().map(|k| (p >> k) & 1));
    }
    (hp, lp)
}

/// Inverse of [`partition_bitplanes`]. The dimensions are taken as known
/// (delivered out of band), so header bits in `hp` are skipped unread.
pub fn recombine_bitplanes(hp: &[u8], lp: &[u8], width: u32, height: u32) -> Result<GrayImage> {
    let n = (width as usize) * (height as usize);
    if hp.len() < HEADER_BITS + 4 * n || lp.len() < 4 * n {
        return Err(invalid("bitplanes", "streams too short for the image size"));
    }
    let pixels = (0..n)
        .map(|i| {
            let hi = &hp[HEADER_BITS + 4 * i..HEADER_BITS + 4 * i + 4];
            let lo = &lp[4 * i..4 * i + 4];
            hi.iter().chain(lo).fold(0u8, |acc, &b| (acc << 1) | (b & 1))
        })
        .collect();
    GrayImage::new(width, height, pixels)
}

/// A fixed-size slice of both layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub index: usize,
    pub hp_bits: Bits,
    pub lp_bits: Bits,
}

impl Packet {
    /// Symbols needed to carry the packet, two HP and two LP bits each.
    pub fn symbols(&self) -> usize {
        self.hp_bits.len().max(self.lp_bits.len()).div_ceil(2)
    }
}

/// Cuts both streams into `n_packets` packets of `⌈|hp|/N⌉` HP bits and
/// `⌈|lp|/N⌉` LP bits, zero-padding the tail.
pub fn packetize(hp: &[u8], lp: &[u8], n_packets: usize) -> Result<Vec<Packet>> {
    if n_packets == 0 {
        return Err(invalid("n_packets", "must be at least 1"));
    }
    let hp_len = hp.len().div_ceil(n_packets);
    let lp_len = lp.len().div_ceil(n_packets);
    let chunk = |src: &[u8], len: usize, i: usize| {
        let mut v: Vec<u8> = src.iter().skip(i * len).take(len).copied().collect();
        v.resize(len, 0);
        v
    };
    Ok((0..n_packets)
        .map(|i| Packet { index: i, hp_bits: chunk(hp, hp_len, i), lp_bits: chunk(lp, lp_len, i) })
        .collect())
}

/// Concatenates packets in index order and trims the padding.
pub fn depacketize(packets: &[Packet], hp_len: usize, lp_len: usize) -> Result<(Bits, Bits)> {
    let mut sorted: Vec<&Packet> = packets.iter().collect();
    sorted.sort_by_key(|p| p.index);
    let mut hp: Bits = sorted.iter().flat_map(|p| p.hp_bits.iter().copied()).collect();
    let mut lp: Bits = sorted.iter().flat_map(|p| p.lp_bits.iter().copied()).collect();
    if hp.len() < hp_len || lp.len() < lp_len {
        return Err(invalid("packets", "fewer bits than requested"));
    }
    hp.truncate(hp_len);
    lp.truncate(lp_len);
    Ok((hp, lp))
}
