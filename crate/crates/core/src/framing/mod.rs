//! Fixed-length frame codec.
//!
//! Layout before whitening and FEC, MSB first:
//!
//! | field       | bits | value                                   |
//! |-------------|------|-----------------------------------------|
//! | sync        | 16   | `0x2DD4`                                |
//! | seq         | 16   | message index, big-endian               |
//! | round_index | 8    | redundancy slot (always 0 for chase)    |
//! | payload     | N    | `payload_bits`, 200 by default          |
//! | crc32       | 32   | over `seq ‖ round_index ‖ payload`, BE  |
//! | tail        | 8    | `0x00`                                  |
//!
//! The whole 280-bit block is whitened, then FEC encoded.

mod crc;
mod fec;
mod whitening;

pub use crc::{crc32, RESIDUE as CRC32_RESIDUE};
pub use fec::{fec_decode, fec_encode, FecScheme};
pub use whitening::{whiten, Pn9, PN9_PERIOD};

use thiserror::Error;

/// One bit per element, values 0 or 1.
pub type Bits = Vec<u8>;

pub const SYNC_WORD: u16 = 0x2DD4;
pub const TAIL: u8 = 0x00;
/// sync + seq + round_index + crc32 + tail.
pub const OVERHEAD_BITS: usize = 16 + 16 + 8 + 32 + 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("payload_bits must be a positive multiple of 8, got {0}")]
    InvalidPayloadBits(usize),
    #[error("payload is {got} bytes, frame config expects {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("frame is {got} bits, frame config expects {expected}")]
    FrameLength { expected: usize, got: usize },
    #[error("FEC input of {len} bits is not a multiple of {factor}")]
    FecLength { len: usize, factor: usize },
    #[error("invalid frame header")]
    BadHeader,
    #[error("CRC mismatch")]
    BadCrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub payload_bits: usize,
    pub fec: FecScheme,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            payload_bits: 200,
            fec: FecScheme::Identity,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<(), FrameError> {
        if self.payload_bits == 0 || !self.payload_bits.is_multiple_of(8) {
            return Err(FrameError::InvalidPayloadBits(self.payload_bits));
        }
        Ok(())
    }

    pub fn payload_bytes(&self) -> usize {
        self.payload_bits / 8
    }

    /// Bits before FEC.
    pub fn raw_bits(&self) -> usize {
        OVERHEAD_BITS + self.payload_bits
    }

    pub fn encoded_bits(&self) -> usize {
        self.raw_bits() * self.fec.repetition()
    }

    /// QPSK symbols per frame.
    pub fn symbols_per_frame(&self) -> usize {
        self.encoded_bits() / 2
    }

    /// Information bits per coded bit, framing overhead included.
    pub fn code_rate(&self) -> f64 {
        self.payload_bits as f64 / self.encoded_bits() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub seq: u16,
    pub round_index: u8,
    pub payload: Vec<u8>,
    pub encoded_bits: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub seq: u16,
    pub round_index: u8,
    pub payload: Vec<u8>,
}

pub fn build_frame(payload: &[u8], cfg: &FrameConfig, seq: u16) -> Result<Frame, FrameError> {
    build_frame_with_round(payload, cfg, seq, 0)
}

pub fn build_frame_with_round(
    payload: &[u8],
    cfg: &FrameConfig,
    seq: u16,
    round_index: u8,
) -> Result<Frame, FrameError> {
    cfg.validate()?;
    if payload.len() != cfg.payload_bytes() {
        return Err(FrameError::PayloadLength {
            expected: cfg.payload_bytes(),
            got: payload.len(),
        });
    }
    let mut protected = Vec::with_capacity(3 + payload.len());
    protected.extend_from_slice(&seq.to_be_bytes());
    protected.push(round_index);
    protected.extend_from_slice(payload);
    let crc = crc32(&protected);

    let mut bytes = Vec::with_capacity(cfg.raw_bits() / 8);
    bytes.extend_from_slice(&SYNC_WORD.to_be_bytes());
    bytes.extend_from_slice(&protected);
    bytes.extend_from_slice(&crc.to_be_bytes());
    bytes.push(TAIL);

    let encoded_bits = fec_encode(&whiten(&bytes_to_bits(&bytes)), cfg.fec);
    Ok(Frame {
        seq,
        round_index,
        payload: payload.to_vec(),
        encoded_bits,
    })
}

pub fn parse_frame(bits: &[u8], cfg: &FrameConfig) -> Result<ParsedFrame, FrameError> {
    cfg.validate()?;
    if bits.len() != cfg.encoded_bits() {
        return Err(FrameError::FrameLength {
            expected: cfg.encoded_bits(),
            got: bits.len(),
        });
    }
    let raw = whiten(&fec_decode(bits, cfg.fec)?);
    let bytes = bits_to_bytes(&raw);
    let n = bytes.len();
    if u16::from_be_bytes([bytes[0], bytes[1]]) != SYNC_WORD || bytes[n - 1] != TAIL {
        return Err(FrameError::BadHeader);
    }
    let protected = &bytes[2..n - 5];
    let crc = u32::from_be_bytes([bytes[n - 5], bytes[n - 4], bytes[n - 3], bytes[n - 2]]);
    if crc32(protected) != crc {
        return Err(FrameError::BadCrc);
    }
    Ok(ParsedFrame {
        seq: u16::from_be_bytes([protected[0], protected[1]]),
        round_index: protected[2],
        payload: protected[3..].to_vec(),
    })
}

pub fn bytes_to_bits(bytes: &[u8]) -> Bits {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Packs MSB-first; a trailing partial byte is zero padded.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn payload(fill: u8) -> Vec<u8> {
        (0..25u8).map(|i| i.wrapping_mul(37) ^ fill).collect()
    }

    #[test]
    fn default_layout_is_280_bits() {
        let cfg = FrameConfig::default();
        assert_eq!(cfg.raw_bits(), 16 + 16 + 8 + 200 + 32 + 8);
        let frame = build_frame(&payload(0), &cfg, 3).unwrap();
        assert_eq!(frame.encoded_bits.len(), 280);
        assert_eq!(cfg.symbols_per_frame(), 140);
        let rep = FrameConfig {
            fec: FecScheme::Repetition3,
            ..cfg
        };
        assert_eq!(build_frame(&payload(0), &rep, 3).unwrap().encoded_bits.len(), 840);
    }

    #[test]
    fn deterministic() {
        let cfg = FrameConfig::default();
        let a = build_frame(&payload(9), &cfg, 77).unwrap();
        let b = build_frame(&payload(9), &cfg, 77).unwrap();
        assert_eq!(a.encoded_bits, b.encoded_bits);
    }

    #[test]
    fn roundtrip_recovers_payload_and_seq() {
        let cfg = FrameConfig::default();
        let frame = build_frame_with_round(&payload(5), &cfg, 0xBEEF, 7).unwrap();
        let parsed = parse_frame(&frame.encoded_bits, &cfg).unwrap();
        assert_eq!(parsed.payload, payload(5));
        assert_eq!(parsed.seq, 0xBEEF);
        assert_eq!(parsed.round_index, 7);
    }

    #[test]
    fn wrong_payload_length() {
        let cfg = FrameConfig::default();
        assert_eq!(
            build_frame(&[0u8; 24], &cfg, 0),
            Err(FrameError::PayloadLength {
                expected: 25,
                got: 24
            })
        );
    }

    #[test]
    fn invalid_payload_bits() {
        let cfg = FrameConfig {
            payload_bits: 12,
            ..Default::default()
        };
        assert_eq!(cfg.validate(), Err(FrameError::InvalidPayloadBits(12)));
    }

    #[test]
    fn wrong_frame_length() {
        let cfg = FrameConfig::default();
        assert!(matches!(
            parse_frame(&[0u8; 10], &cfg),
            Err(FrameError::FrameLength { expected: 280, got: 10 })
        ));
    }

    #[test]
    fn every_single_payload_flip_is_bad_crc() {
        let cfg = FrameConfig::default();
        let frame = build_frame(&payload(1), &cfg, 12).unwrap();
        let payload_start = 16 + 16 + 8;
        for pos in payload_start..payload_start + 200 {
            let mut bits = frame.encoded_bits.clone();
            bits[pos] ^= 1;
            assert_eq!(parse_frame(&bits, &cfg), Err(FrameError::BadCrc), "bit {pos}");
        }
    }

    #[test]
    fn corrupted_sync_is_bad_header() {
        let cfg = FrameConfig::default();
        let frame = build_frame(&payload(2), &cfg, 1).unwrap();
        for pos in 0..16 {
            let mut bits = frame.encoded_bits.clone();
            bits[pos] ^= 1;
            assert_eq!(parse_frame(&bits, &cfg), Err(FrameError::BadHeader));
        }
    }

    #[test]
    fn repetition_frame_survives_one_flip_per_triple() {
        let cfg = FrameConfig {
            fec: FecScheme::Repetition3,
            ..Default::default()
        };
        let frame = build_frame(&payload(3), &cfg, 4).unwrap();
        let mut bits = frame.encoded_bits.clone();
        for t in 0..cfg.raw_bits() {
            bits[3 * t + (t % 3)] ^= 1;
        }
        assert_eq!(parse_frame(&bits, &cfg).unwrap().payload, payload(3));
    }

    #[test]
    fn bit_packing() {
        assert_eq!(bytes_to_bits(&[0xA5]), vec![1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits_to_bytes(&[1, 0, 1, 0, 0, 1, 0, 1]), vec![0xA5]);
    }

    proptest! {
        #[test]
        fn roundtrip_any_payload(
            bytes in proptest::collection::vec(any::<u8>(), 25),
            seq in any::<u16>(),
            rep in any::<bool>(),
        ) {
            let cfg = FrameConfig {
                payload_bits: 200,
                fec: if rep { FecScheme::Repetition3 } else { FecScheme::Identity },
            };
            let frame = build_frame(&bytes, &cfg, seq).unwrap();
            prop_assert_eq!(frame.encoded_bits.len(), cfg.encoded_bits());
            let parsed = parse_frame(&frame.encoded_bits, &cfg).unwrap();
            prop_assert_eq!(parsed.payload, bytes);
            prop_assert_eq!(parsed.seq, seq);
        }

        #[test]
        fn whitening_is_an_involution(bits in proptest::collection::vec(0u8..2, 0..2000)) {
            prop_assert_eq!(whiten(&whiten(&bits)), bits);
        }
    }
}
