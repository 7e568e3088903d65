/// How a decode attempt is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoderModel {
    /// Outage rule on the analytic post-MRC SINR.
    Threshold { rate_bits_per_symbol: f64 },
    /// Full chain: MRC, hard QPSK decisions, FEC, CRC.
    BitLevel,
}

impl DecoderModel {
    pub fn threshold(rate_bits_per_symbol: f64) -> Self {
        DecoderModel::Threshold {
            rate_bits_per_symbol,
        }
    }

    pub fn is_bit_level(&self) -> bool {
        matches!(self, DecoderModel::BitLevel)
    }
}

/// Succeeds iff `log2(1 + gamma) >= rate`; the boundary counts as success.
pub fn threshold_decode(gamma: f64, rate: f64) -> bool {
    debug_assert!(rate > 0.0);
    if gamma.is_infinite() && gamma > 0.0 {
        return true;
    }
    (1.0 + gamma).log2() >= rate
}
