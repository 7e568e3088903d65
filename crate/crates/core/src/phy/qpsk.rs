//! Gray-mapped QPSK, unit average power.
//!
//! | bits | symbol          |
//! |------|-----------------|
//! | 00   | `(+1 + i) / √2` |
//! | 01   | `(-1 + i) / √2` |
//! | 11   | `(-1 - i) / √2` |
//! | 10   | `(+1 - i) / √2` |
//!
//! The first bit of a pair selects the sign of the quadrature part, the
//! second the sign of the in-phase part. A coordinate of exactly zero
//! decides as positive.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{PhyError, SymbolBlock};
use crate::framing::Bits;

fn level(bit: u8) -> f64 {
    if bit == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    }
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<SymbolBlock, PhyError> {
    if !bits.len().is_multiple_of(2) {
        return Err(PhyError::OddBitCount(bits.len()));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|pair| Complex64::new(level(pair[1]), level(pair[0])))
        .collect())
}

pub fn qpsk_demodulate(symbols: &SymbolBlock) -> Bits {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols.iter() {
        bits.push(u8::from(s.im < 0.0));
        bits.push(u8::from(s.re < 0.0));
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gray_table() {
        let s = qpsk_modulate(&[0, 0, 0, 1, 1, 1, 1, 0]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s.as_slice(), &[c(r, r), c(-r, r), c(-r, -r), c(r, -r)]);
        assert!((s[0].norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pair_0011() {
        let s = qpsk_modulate(&[0, 0, 1, 1]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s.as_slice(), &[c(r, r), c(-r, -r)]);
    }

    #[test]
    fn odd_length_rejected() {
        assert_eq!(qpsk_modulate(&[1, 0, 1]), Err(PhyError::OddBitCount(3)));
    }

    #[test]
    fn unit_modulus() {
        let bits: Vec<u8> = (0..64).map(|i| (i / 3 % 2) as u8).collect();
        let s = qpsk_modulate(&bits).unwrap();
        for x in s.iter() {
            assert!((x.norm() - 1.0).abs() <= f64::EPSILON);
        }
        assert!((s.mean_power() - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn quadrant_decisions() {
        assert_eq!(qpsk_demodulate(&vec![c(0.9, 1.1)].into()), vec![0, 0]);
        assert_eq!(qpsk_demodulate(&vec![c(-0.2, 3.0)].into()), vec![0, 1]);
        assert_eq!(qpsk_demodulate(&vec![c(-0.2, -3.0)].into()), vec![1, 1]);
        assert_eq!(qpsk_demodulate(&vec![c(5.0, -0.1)].into()), vec![1, 0]);
    }

    #[test]
    fn axis_ties_decide_positive() {
        assert_eq!(qpsk_demodulate(&vec![c(0.0, 1.0)].into()), vec![0, 0]);
        assert_eq!(qpsk_demodulate(&vec![c(-1.0, 0.0)].into()), vec![0, 1]);
        assert_eq!(qpsk_demodulate(&vec![c(0.0, 0.0)].into()), vec![0, 0]);
        assert_eq!(qpsk_demodulate(&vec![c(-0.0, -0.0)].into()), vec![0, 0]);
    }

    #[test]
    fn roundtrip_random_pairs() {
        let mut state = 0xDEAD_BEEFu32;
        let bits: Vec<u8> = (0..20_000)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 17;
                state ^= state << 5;
                (state & 1) as u8
            })
            .collect();
        assert_eq!(qpsk_demodulate(&qpsk_modulate(&bits).unwrap()), bits);
    }
}
