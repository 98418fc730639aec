//! Link-level simulation: an 8-bit image is split into a high-priority
//! layer (top four bitplanes) and a low-priority layer (bottom four),
//! packetized, sent over the sensed fading channel with threshold ARQ, and
//! rebuilt at the receiver.

mod arq;
mod coder;
mod image;
mod packet;
mod session;

pub use arq::{transmit_packet, LinkParams, Modulation, PacketOutcome, RetxBudget};
pub use coder::{ChannelCoder, IdentityCoder};
pub use image::{mse, psnr, GrayImage};
pub use packet::{
    depacketize, packetize, partition_bitplanes, recombine_bitplanes, Bits, Packet, HEADER_BITS,
};
pub use session::{run_session, run_session_with_coder, SessionReport};
