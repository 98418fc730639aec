/// Channel code applied to each layer of a packet before modulation.
pub trait ChannelCoder: Send + Sync {
    fn encode(&self, bits: &[u8]) -> Vec<u8>;

    /// Recovers `len` information bits from received code bits.
    fn decode(&self, bits: &[u8], len: usize) -> Vec<u8>;
}

/// Passes bits through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityCoder;

impl ChannelCoder for IdentityCoder {
    fn encode(&self, bits: &[u8]) -> Vec<u8> {
        bits.to_vec()
    }

    fn decode(&self, bits: &[u8], len: usize) -> Vec<u8> {
        bits[..len.min(bits.len())].to_vec()
    }
}
