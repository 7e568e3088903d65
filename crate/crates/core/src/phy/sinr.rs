//! Post-MRC SINR for chase-combined, possibly superimposed, rounds.
//!
//! With unit-variance noise and plain `conj(h_i)` weights, a target whose
//! amplitude in round `i` is `a_i`, and a coherent interferer of amplitude
//! `b_i`, the combiner output has SINR
//!
//! ```text
//!            (sum a_i |h_i|^2)^2
//! gamma = ------------------------------
//!         (sum b_i |h_i|^2)^2 + sum |h_i|^2
//! ```
//!
//! Distinct interferers are independent, so their terms add per interferer.

use num_complex::Complex64;

use super::{MessageId, PhyError, SymbolBlock};

#[derive(Debug, Clone, PartialEq)]
pub struct SinrResult {
    /// Linear SINR, `+inf` for a noiseless observation.
    pub gamma: f64,
    /// Round indices that were combined.
    pub window: Vec<u64>,
}

impl SinrResult {
    pub fn db(&self) -> f64 {
        10.0 * self.gamma.log10()
    }
}

/// One round's contribution to a combining window.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTerm {
    pub h: Complex64,
    /// Target amplitude in this round.
    pub signal: f64,
    /// Uncancelled interferers and their amplitudes.
    pub interference: Vec<(MessageId, f64)>,
}

pub fn sinr_from_terms(terms: &[SinrTerm]) -> Result<f64, PhyError> {
    if terms.is_empty() {
        return Err(PhyError::EmptyWindow);
    }
    let mut norm = 0.0;
    let mut signal = 0.0;
    let mut coherent: Vec<(MessageId, f64)> = Vec::new();
    for t in terms {
        let g = t.h.norm_sqr();
        norm += g;
        signal += t.signal * g;
        for &(id, b) in &t.interference {
            match coherent.iter_mut().find(|(k, _)| *k == id) {
                Some((_, acc)) => *acc += b * g,
                None => coherent.push((id, b * g)),
            }
        }
    }
    if norm <= 0.0 {
        return Err(PhyError::ZeroNorm);
    }
    let interference: f64 = coherent.iter().map(|(_, s)| s * s).sum();
    Ok(signal * signal / (interference + norm))
}

/// SINR for per-round target amplitudes `a` and a single coherent
/// interferer with per-round amplitudes `b` (zero where absent or
/// cancelled).
pub fn sinr_general(h: &[Complex64], a: &[f64], b: &[f64]) -> Result<SinrResult, PhyError> {
    if h.len() != a.len() || h.len() != b.len() {
        return Err(PhyError::DimensionMismatch);
    }
    let terms: Vec<SinrTerm> = h
        .iter()
        .zip(a)
        .zip(b)
        .map(|((&h, &a), &b)| SinrTerm {
            h,
            signal: a,
            interference: if b != 0.0 { vec![(MessageId(0), b)] } else { Vec::new() },
        })
        .collect();
    let gamma = sinr_from_terms(&terms)?;
    Ok(SinrResult {
        gamma,
        window: (0..h.len() as u64).collect(),
    })
}

/// Residual-to-signal power ratio below which an observation is treated
/// as noiseless and reported as infinite SINR.
pub const NOISELESS_RESIDUAL_RATIO: f64 = 1e-24;

/// Least-squares SINR estimate of `combined` against the transmitted
/// unit-power `reference`.
pub fn estimate_post_mrc_sinr(
    combined: &SymbolBlock,
    reference: &SymbolBlock,
) -> Result<SinrResult, PhyError> {
    if combined.len() != reference.len() {
        return Err(PhyError::LengthMismatch(combined.len(), reference.len()));
    }
    if combined.is_empty() {
        return Err(PhyError::EmptyWindow);
    }
    let ref_energy: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if ref_energy <= 0.0 {
        return Err(PhyError::ZeroNorm);
    }
    let cross: Complex64 = reference
        .iter()
        .zip(combined.iter())
        .map(|(r, y)| r.conj() * y)
        .sum();
    let coef = cross / ref_energy;
    let n = combined.len() as f64;
    let residual = combined
        .iter()
        .zip(reference.iter())
        .map(|(y, r)| (y - coef * r).norm_sqr())
        .sum::<f64>()
        / n;
    let signal = coef.norm_sqr() * ref_energy / n;
    let gamma = if residual <= NOISELESS_RESIDUAL_RATIO * signal {
        f64::INFINITY
    } else {
        signal / residual
    };
    Ok(SinrResult {
        gamma,
        window: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{add_noise, RngStream};
    use crate::phy::qpsk_modulate;
    use rand::Rng;

    fn gains(g: &[f64]) -> Vec<Complex64> {
        g.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)).collect()
    }

    // direct evaluation of the three printed closed forms
    fn new_message_formula(alpha2: f64, p: f64, norm: f64) -> f64 {
        (1.0 - alpha2) * p * norm / (alpha2 * p * norm + 1.0)
    }

    fn old_message_formula(alpha2: f64, p: f64, norm: f64) -> f64 {
        alpha2 * p * norm
    }

    fn sic_failure_formula(alpha2: f64, p: f64, norm: f64, sub_norm: f64) -> f64 {
        alpha2 * p * norm * norm / ((1.0 - alpha2) * p * sub_norm * sub_norm + norm)
    }

    #[test]
    fn single_round_new_message() {
        let r = sinr_general(&gains(&[1.0]), &[8f64.sqrt()], &[2f64.sqrt()]).unwrap();
        assert!((r.gamma - 8.0 / 3.0).abs() < 1e-12);
        assert!((new_message_formula(0.2, 10.0, 1.0) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn two_round_old_message() {
        let a = 2f64.sqrt();
        let r = sinr_general(&gains(&[1.0, 0.5]), &[a, a], &[0.0, 0.0]).unwrap();
        assert!((r.gamma - 3.0).abs() < 1e-12);
        assert!((old_message_formula(0.2, 10.0, 1.5) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_sic_failure() {
        let a = 2f64.sqrt();
        let b = 8f64.sqrt();
        let r = sinr_general(&gains(&[1.0, 1.0]), &[a, a], &[b, 0.0]).unwrap();
        assert!((r.gamma - 0.8).abs() < 1e-12);
        assert!((sic_failure_formula(0.2, 10.0, 2.0, 1.0) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_on_random_windows() {
        let mut rng = RngStream::new(17, 0);
        for _ in 0..500 {
            let m = rng.random_range(1..=6usize);
            let alpha2 = rng.random_range(0.01..0.49);
            let p = 10f64.powf(rng.random_range(-1.0..3.0));
            let h: Vec<Complex64> = (0..m).map(|_| rng.complex_gaussian(1.0)).collect();
            let norm: f64 = h.iter().map(|x| x.norm_sqr()).sum();
            let a_new = vec![((1.0 - alpha2) * p).sqrt(); m];
            let a_old = vec![(alpha2 * p).sqrt(); m];
            let b_old = vec![(alpha2 * p).sqrt(); m];

            let g = sinr_general(&h, &a_new, &b_old).unwrap().gamma;
            let want = new_message_formula(alpha2, p, norm);
            assert!((g - want).abs() <= 1e-12 * want);

            let g = sinr_general(&h, &a_old, &vec![0.0; m]).unwrap().gamma;
            let want = old_message_formula(alpha2, p, norm);
            assert!((g - want).abs() <= 1e-12 * want);

            let l1 = rng.random_range(0..=m);
            let sub_norm: f64 = h[..l1].iter().map(|x| x.norm_sqr()).sum();
            let b: Vec<f64> = (0..m)
                .map(|i| if i < l1 { ((1.0 - alpha2) * p).sqrt() } else { 0.0 })
                .collect();
            let g = sinr_general(&h, &a_old, &b).unwrap().gamma;
            let want = sic_failure_formula(alpha2, p, norm, sub_norm);
            assert!((g - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn new_message_sinr_monotone_and_bounded() {
        let (alpha2, p): (f64, f64) = (0.2, 1.0);
        let bound = (1.0 - alpha2) / alpha2;
        let grid: Vec<f64> = (0..=30).map(|i| 0.1 * 10f64.powf(i as f64 / 10.0)).collect();
        let mut prev = 0.0;
        for &norm in &grid {
            let g = sinr_general(
                &gains(&[norm]),
                &[((1.0 - alpha2) * p).sqrt()],
                &[(alpha2 * p).sqrt()],
            )
            .unwrap()
            .gamma;
            assert!(g > prev && g < bound);
            prev = g;
        }
    }

    #[test]
    fn old_message_sinr_is_additive_over_rounds() {
        let g = [0.3, 1.7, 0.05, 2.2];
        let a = vec![0.9; 4];
        let total = sinr_general(&gains(&g), &a, &[0.0; 4]).unwrap().gamma;
        let parts: f64 = g
            .iter()
            .map(|&x| sinr_general(&gains(&[x]), &[0.9], &[0.0]).unwrap().gamma)
            .sum();
        assert!((total - parts).abs() <= 1e-12 * total);
    }

    #[test]
    fn empty_interference_window_matches_no_failure() {
        let (alpha2, p) = (0.2, 10.0);
        let norm = 0.4 + 0.9 + 1.3;
        assert_eq!(
            sic_failure_formula(alpha2, p, norm, 0.0),
            old_message_formula(alpha2, p, norm)
        );
        let a = vec![(alpha2 * p).sqrt(); 3];
        let g = sinr_general(&gains(&[0.4, 0.9, 1.3]), &a, &[0.0; 3]).unwrap().gamma;
        assert!((g - old_message_formula(alpha2, p, norm)).abs() < 1e-12);
    }

    #[test]
    fn distinct_interferers_add_in_power() {
        let h = Complex64::new(1.0, 0.0);
        let terms = vec![
            SinrTerm { h, signal: 2.0, interference: vec![(MessageId(1), 1.0)] },
            SinrTerm { h, signal: 2.0, interference: vec![(MessageId(2), 1.0)] },
        ];
        // signal 4^2, interference 1^2 + 1^2, noise 2
        assert!((sinr_from_terms(&terms).unwrap() - 16.0 / 4.0).abs() < 1e-12);
        let coherent = vec![
            SinrTerm { h, signal: 2.0, interference: vec![(MessageId(1), 1.0)] },
            SinrTerm { h, signal: 2.0, interference: vec![(MessageId(1), 1.0)] },
        ];
        assert!((sinr_from_terms(&coherent).unwrap() - 16.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn general_errors() {
        assert_eq!(
            sinr_general(&gains(&[1.0]), &[1.0, 1.0], &[0.0]),
            Err(PhyError::DimensionMismatch)
        );
        assert_eq!(
            sinr_general(&[Complex64::new(0.0, 0.0)], &[1.0], &[0.0]),
            Err(PhyError::ZeroNorm)
        );
        assert_eq!(sinr_general(&[], &[], &[]), Err(PhyError::EmptyWindow));
    }

    fn random_qpsk(rng: &mut RngStream, n: usize) -> SymbolBlock {
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
        qpsk_modulate(&bits).unwrap()
    }

    #[test]
    fn estimator_noiseless_is_infinite() {
        let mut rng = RngStream::new(8, 0);
        let x = random_qpsk(&mut rng, 1000);
        let r = estimate_post_mrc_sinr(&x.scaled(Complex64::new(3.0, 0.0)), &x).unwrap();
        assert!(r.gamma.is_infinite());
    }

    #[test]
    fn estimator_calibration() {
        let mut rng = RngStream::new(8, 1);
        let x = random_qpsk(&mut rng, 100_000);
        let y = add_noise(&x, &mut rng);
        let g = estimate_post_mrc_sinr(&y, &x).unwrap().gamma;
        assert!((g - 1.0).abs() < 0.02, "gamma {g}");
        let y = add_noise(&x.scaled(Complex64::new(2.0, 0.0)), &mut rng);
        let g = estimate_post_mrc_sinr(&y, &x).unwrap().gamma;
        assert!((g / 4.0 - 1.0).abs() < 0.02, "gamma {g}");
    }

    #[test]
    fn estimator_length_mismatch() {
        assert_eq!(
            estimate_post_mrc_sinr(&SymbolBlock::zeros(3), &SymbolBlock::zeros(2)),
            Err(PhyError::LengthMismatch(3, 2))
        );
    }
}
