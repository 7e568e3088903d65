//! Baseband symbol processing: QPSK, power-domain superposition, MRC,
//! SIC and the post-combining SINR bookkeeping.

mod combining;
mod qpsk;
mod sinr;

pub use combining::{mrc_combine, sic_cancel, superimpose};
pub use qpsk::{qpsk_demodulate, qpsk_modulate};
pub use sinr::{
    estimate_post_mrc_sinr, sinr_from_terms, sinr_general, SinrResult, SinrTerm,
    NOISELESS_RESIDUAL_RATIO,
};

use std::fmt;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("block lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("combining window is empty")]
    EmptyWindow,
    #[error("channel norm over the window is zero")]
    ZeroNorm,
    #[error("vector dimensions differ")]
    DimensionMismatch,
    #[error("alpha must lie in [0, 1/sqrt(2)) and power must be finite and non-negative (alpha = {alpha}, power = {power})")]
    InvalidSuperposition { alpha: f64, power: f64 },
    #[error("a round carries one or two messages, got {0}")]
    ConstituentCount(usize),
    #[error("message {0} is not part of round {1}")]
    UnknownMessage(MessageId, u64),
    #[error("message {0} was already cancelled from round {1}")]
    AlreadyCancelled(MessageId, u64),
}

/// Message index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MessageId(pub u64);

impl MessageId {
    pub fn next(self) -> Self {
        MessageId(self.0 + 1)
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A sequence of complex baseband samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymbolBlock(Vec<Complex64>);

impl SymbolBlock {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self(samples)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// `mean(|x|^2)`, zero for an empty block.
    pub fn mean_power(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.0.len() as f64
    }

    pub fn scaled(&self, gain: Complex64) -> Self {
        Self(self.0.iter().map(|&s| s * gain).collect())
    }
}

impl Deref for SymbolBlock {
    type Target = Vec<Complex64>;

    fn deref(&self) -> &Vec<Complex64> {
        &self.0
    }
}

impl DerefMut for SymbolBlock {
    fn deref_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for SymbolBlock {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl FromIterator<Complex64> for SymbolBlock {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Power split between the old (weak) and new (strong) message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionSpec {
    alpha: f64,
    power: f64,
}

impl SuperpositionSpec {
    /// `alpha` is the amplitude fraction of the old packet; `alpha = 0`
    /// degenerates to sending the new packet alone.
    pub fn new(alpha: f64, power: f64) -> Result<Self, PhyError> {
        let ok = alpha.is_finite()
            && (0.0..std::f64::consts::FRAC_1_SQRT_2).contains(&alpha)
            && power.is_finite()
            && power >= 0.0;
        if !ok {
            return Err(PhyError::InvalidSuperposition { alpha, power });
        }
        Ok(Self { alpha, power })
    }

    pub fn from_alpha2(alpha2: f64, power: f64) -> Result<Self, PhyError> {
        if alpha2.is_nan() || alpha2 < 0.0 {
            return Err(PhyError::InvalidSuperposition {
                alpha: alpha2,
                power,
            });
        }
        Self::new(alpha2.sqrt(), power)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// `alpha * sqrt(P)`.
    pub fn amplitude_old(&self) -> f64 {
        self.alpha * self.power.sqrt()
    }

    /// `sqrt((1 - alpha^2) * P)`.
    pub fn amplitude_new(&self) -> f64 {
        ((1.0 - self.alpha * self.alpha) * self.power).sqrt()
    }

    /// `sqrt(P)`, the single-message amplitude.
    pub fn amplitude_full(&self) -> f64 {
        self.power.sqrt()
    }
}

/// One message's share of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constituent {
    pub id: MessageId,
    pub amplitude: f64,
    pub cancelled: bool,
}

/// What the receiver stores for one HARQ round.
///
/// Records without samples (`y` empty) are used by the threshold decoder,
/// which only needs the channel coefficient and amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub index: u64,
    pub y: SymbolBlock,
    pub h: Complex64,
    constituents: Vec<Constituent>,
}

impl RoundRecord {
    pub fn new(
        index: u64,
        y: SymbolBlock,
        h: Complex64,
        parts: &[(MessageId, f64)],
    ) -> Result<Self, PhyError> {
        if parts.is_empty() || parts.len() > 2 {
            return Err(PhyError::ConstituentCount(parts.len()));
        }
        let constituents = parts
            .iter()
            .map(|&(id, amplitude)| Constituent {
                id,
                amplitude,
                cancelled: false,
            })
            .collect();
        Ok(Self {
            index,
            y,
            h,
            constituents,
        })
    }

    pub fn constituents(&self) -> &[Constituent] {
        &self.constituents
    }

    pub fn constituent(&self, id: MessageId) -> Option<&Constituent> {
        self.constituents.iter().find(|c| c.id == id)
    }

    pub fn contains(&self, id: MessageId) -> bool {
        self.constituent(id).is_some()
    }

    /// Subtracts `h * amplitude * known` and flags the message cancelled.
    pub fn cancel(&mut self, id: MessageId, known: &SymbolBlock) -> Result<(), PhyError> {
        let index = self.index;
        let part = self
            .constituents
            .iter_mut()
            .find(|c| c.id == id)
            .ok_or(PhyError::UnknownMessage(id, index))?;
        if part.cancelled {
            return Err(PhyError::AlreadyCancelled(id, index));
        }
        if known.len() != self.y.len() {
            return Err(PhyError::LengthMismatch(self.y.len(), known.len()));
        }
        let gain = self.h * part.amplitude;
        for (y, &x) in self.y.iter_mut().zip(known.iter()) {
            *y -= gain * x;
        }
        part.cancelled = true;
        Ok(())
    }
}
