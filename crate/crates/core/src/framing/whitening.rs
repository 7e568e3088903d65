//! PN9 data whitening, `x^9 + x^5 + 1`, seeded with all ones at the start
//! of every frame.

use super::Bits;

pub const PN9_PERIOD: usize = 511;
const SEED: u16 = 0x1FF;

/// Maximal-length sequence source for `s[n+9] = s[n+5] ^ s[n]`.
#[derive(Debug, Clone)]
pub struct Pn9 {
    state: u16,
}

impl Pn9 {
    pub fn new() -> Self {
        Self { state: SEED }
    }

    pub fn state(&self) -> u16 {
        self.state
    }
}

impl Default for Pn9 {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for Pn9 {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        let out = (self.state & 1) as u8;
        let feedback = (self.state ^ (self.state >> 5)) & 1;
        self.state = (self.state >> 1) | (feedback << 8);
        Some(out)
    }
}

pub fn whiten(bits: &[u8]) -> Bits {
    bits.iter().zip(Pn9::new()).map(|(&b, p)| b ^ p).collect()
}
