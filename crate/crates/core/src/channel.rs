//! Channel coefficients and additive noise.
//!
//! Noise is always circularly-symmetric complex Gaussian with unit variance;
//! the transmit power is the only SNR knob. Block fading draws one
//! coefficient per HARQ round.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::phy::SymbolBlock;

/// Kind of channel coefficient process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Fixed unit gain, `h = 1`.
    AwgnFixed,
    /// I.i.d. `CN(0, mean_square_gain)` coefficient per HARQ round.
    RayleighBlock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    /// `E[|h|^2]` for Rayleigh block fading. Ignored by the fixed model.
    pub mean_square_gain: f64,
}

impl ChannelModel {
    pub fn awgn() -> Self {
        Self {
            kind: ChannelKind::AwgnFixed,
            mean_square_gain: 1.0,
        }
    }

    pub fn rayleigh() -> Self {
        Self {
            kind: ChannelKind::RayleighBlock,
            mean_square_gain: 1.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.mean_square_gain.is_finite() && self.mean_square_gain > 0.0
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::awgn()
    }
}

/// Deterministic random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so distinct ids never overlap and each stream can be
/// reconstructed independently of any other.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One `CN(0, variance)` draw.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let sigma = (variance / 2.0).sqrt();
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(sigma * re, sigma * im)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws one channel coefficient `h_l`.
pub fn sample_channel(model: &ChannelModel, rng: &mut RngStream) -> Complex64 {
    match model.kind {
        ChannelKind::AwgnFixed => Complex64::new(1.0, 0.0),
        ChannelKind::RayleighBlock => rng.complex_gaussian(model.mean_square_gain),
    }
}

/// Adds an independent `CN(0, 1)` sample to every symbol.
pub fn add_noise(symbols: &SymbolBlock, rng: &mut RngStream) -> SymbolBlock {
    let mut out = symbols.clone();
    add_noise_in_place(&mut out, rng);
    out
}

pub fn add_noise_in_place(symbols: &mut SymbolBlock, rng: &mut RngStream) {
    for s in symbols.iter_mut() {
        *s += rng.complex_gaussian(1.0);
    }
}
