//! Hard-decision FEC schemes.

use super::{Bits, FrameError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FecScheme {
    #[default]
    Identity,
    Repetition3,
}

impl FecScheme {
    pub fn repetition(self) -> usize {
        match self {
            FecScheme::Identity => 1,
            FecScheme::Repetition3 => 3,
        }
    }

    /// Code rate as `(numerator, denominator)`.
    pub fn rate(self) -> (u32, u32) {
        (1, self.repetition() as u32)
    }
}

pub fn fec_encode(bits: &[u8], scheme: FecScheme) -> Bits {
    let r = scheme.repetition();
    bits.iter().flat_map(|&b| std::iter::repeat_n(b, r)).collect()
}

pub fn fec_decode(bits: &[u8], scheme: FecScheme) -> Result<Bits, FrameError> {
    let r = scheme.repetition();
    if !bits.len().is_multiple_of(r) {
        return Err(FrameError::FecLength {
            len: bits.len(),
            factor: r,
        });
    }
    Ok(bits
        .chunks_exact(r)
        .map(|c| {
            let ones = c.iter().filter(|&&b| b != 0).count();
            u8::from(2 * ones > r)
        })
        .collect())
}
