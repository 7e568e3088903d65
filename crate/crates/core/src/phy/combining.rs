use num_complex::Complex64;

use super::{MessageId, PhyError, RoundRecord, SuperpositionSpec, SymbolBlock};

/// Transmit composite `alpha*sqrt(P)*x_old + sqrt((1-alpha^2)*P)*x_new`.
pub fn superimpose(
    x_old: &SymbolBlock,
    x_new: &SymbolBlock,
    spec: &SuperpositionSpec,
) -> Result<SymbolBlock, PhyError> {
    if x_old.len() != x_new.len() {
        return Err(PhyError::LengthMismatch(x_old.len(), x_new.len()));
    }
    let (a_old, a_new) = (spec.amplitude_old(), spec.amplitude_new());
    Ok(x_old
        .iter()
        .zip(x_new.iter())
        .map(|(&o, &n)| o * a_old + n * a_new)
        .collect())
}

/// Plain MRC: `(1 / sum |h_i|^2) * sum conj(h_i) * y_i`.
///
/// The weights ignore per-round amplitudes even when those differ.
pub fn mrc_combine(records: &[&RoundRecord]) -> Result<SymbolBlock, PhyError> {
    let first = records.first().ok_or(PhyError::EmptyWindow)?;
    let len = first.y.len();
    if let Some(r) = records.iter().find(|r| r.y.len() != len) {
        return Err(PhyError::LengthMismatch(len, r.y.len()));
    }
    let norm: f64 = records.iter().map(|r| r.h.norm_sqr()).sum();
    if norm <= 0.0 {
        return Err(PhyError::ZeroNorm);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for r in records {
        let w = r.h.conj();
        for (acc, &y) in out.iter_mut().zip(r.y.iter()) {
            *acc += w * y;
        }
    }
    let scale = 1.0 / norm;
    Ok(out.into_iter().map(|s| s * scale).collect())
}

/// Returns a copy of `record` with `message_id` subtracted out.
pub fn sic_cancel(
    record: &RoundRecord,
    message_id: MessageId,
    known_symbols: &SymbolBlock,
) -> Result<RoundRecord, PhyError> {
    let mut out = record.clone();
    out.cancel(message_id, known_symbols)?;
    Ok(out)
}
