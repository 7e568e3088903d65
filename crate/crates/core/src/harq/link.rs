//! Forward link and receiver store shared by every HARQ engine.
//!
//! The link owns the channel RNG, the transmitted frames, and the stored
//! round records. Decoding a message combines all of its listed copies;
//! a delivered message is cancelled from every stored round it appears in.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_complex::Complex64;
use rand::RngCore;

use crate::channel::{add_noise_in_place, sample_channel, ChannelModel, RngStream};
use crate::framing::{build_frame_with_round, parse_frame, FrameConfig, FrameError};
use crate::phy::{
    mrc_combine, qpsk_demodulate, qpsk_modulate, sinr_from_terms, MessageId, RoundRecord,
    SinrResult, SinrTerm, SymbolBlock,
};

use super::{threshold_decode, DecoderModel, HarqError};

/// Replaces the per-round amplitudes seen by the SINR calculation with
/// constant values (the idealized constant old-message amplitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeOverride {
    pub signal: f64,
    pub interference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeAttempt {
    pub success: bool,
    /// Payload bit errors of a delivered frame (undetected by CRC).
    pub bit_errors: u32,
    /// Analytic post-MRC SINR of the window.
    pub sinr: SinrResult,
    /// Bit-level failure reason.
    pub failure: Option<FrameError>,
}

#[derive(Debug, Clone)]
struct TxMessage {
    payload: Vec<u8>,
    symbols: SymbolBlock,
}

#[derive(Debug)]
pub struct Link {
    decoder: DecoderModel,
    channel: ChannelModel,
    frame_cfg: FrameConfig,
    rng: RngStream,
    rounds: BTreeMap<u64, RoundRecord>,
    sent: HashMap<MessageId, TxMessage>,
    decoded: HashMap<MessageId, SymbolBlock>,
    abandoned: HashSet<MessageId>,
    symbols_sent: u64,
}

impl Link {
    pub fn new(
        decoder: DecoderModel,
        channel: ChannelModel,
        frame_cfg: FrameConfig,
        rng: RngStream,
    ) -> Self {
        Self {
            decoder,
            channel,
            frame_cfg,
            rng,
            rounds: BTreeMap::new(),
            sent: HashMap::new(),
            decoded: HashMap::new(),
            abandoned: HashSet::new(),
            symbols_sent: 0,
        }
    }

    pub fn symbols_sent(&self) -> u64 {
        self.symbols_sent
    }

    pub fn record(&self, round: u64) -> Option<&RoundRecord> {
        self.rounds.get(&round)
    }

    pub fn stored_rounds(&self) -> usize {
        self.rounds.len()
    }

    fn tx_message(&mut self, id: MessageId) -> Result<&TxMessage, HarqError> {
        if !self.sent.contains_key(&id) {
            let mut payload = vec![0u8; self.frame_cfg.payload_bytes()];
            self.rng.fill_bytes(&mut payload);
            let frame = build_frame_with_round(&payload, &self.frame_cfg, id.0 as u16, 0)?;
            let symbols = qpsk_modulate(&frame.encoded_bits)?;
            self.sent.insert(id, TxMessage { payload, symbols });
        }
        Ok(&self.sent[&id])
    }

    /// Sends one round carrying `parts` (message, amplitude) and stores
    /// what the receiver observes.
    pub fn transmit(&mut self, round: u64, parts: &[(MessageId, f64)]) -> Result<&RoundRecord, HarqError> {
        let h = sample_channel(&self.channel, &mut self.rng);
        let y = if self.decoder.is_bit_level() {
            let n = self.frame_cfg.symbols_per_frame();
            let mut composite = vec![Complex64::new(0.0, 0.0); n];
            for &(id, amp) in parts {
                let symbols = &self.tx_message(id)?.symbols;
                for (acc, &x) in composite.iter_mut().zip(symbols.iter()) {
                    *acc += x * amp;
                }
            }
            let mut y: SymbolBlock = composite.into_iter().map(|s| s * h).collect();
            add_noise_in_place(&mut y, &mut self.rng);
            y
        } else {
            SymbolBlock::default()
        };
        self.symbols_sent += self.frame_cfg.symbols_per_frame() as u64;
        let record = RoundRecord::new(round, y, h, parts)?;
        self.rounds.insert(round, record);
        Ok(&self.rounds[&round])
    }

    /// Attempts to decode `id` by combining the rounds in `copies`.
    pub fn decode(
        &mut self,
        id: MessageId,
        copies: &[u64],
        amplitudes: Option<AmplitudeOverride>,
    ) -> Result<DecodeAttempt, HarqError> {
        let records = copies
            .iter()
            .map(|r| self.rounds.get(r).ok_or(HarqError::UnknownRound(*r)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut polluter: Option<MessageId> = None;
        let mut terms = Vec::with_capacity(records.len());
        for rec in &records {
            let me = rec
                .constituent(id)
                .ok_or(crate::phy::PhyError::UnknownMessage(id, rec.index))?;
            let mut interference = Vec::new();
            for other in rec.constituents().iter().filter(|c| c.id != id && !c.cancelled) {
                if self.abandoned.contains(&other.id) {
                    match polluter {
                        Some(p) if p != other.id => {
                            return Err(HarqError::MultipleAbandonedInterferers {
                                target: id,
                                round: rec.index,
                            })
                        }
                        _ => polluter = Some(other.id),
                    }
                }
                let b = amplitudes.map_or(other.amplitude, |o| o.interference);
                interference.push((other.id, b));
            }
            terms.push(SinrTerm {
                h: rec.h,
                signal: amplitudes.map_or(me.amplitude, |o| o.signal),
                interference,
            });
        }
        let sinr = SinrResult {
            gamma: sinr_from_terms(&terms)?,
            window: copies.to_vec(),
        };

        match self.decoder {
            DecoderModel::Threshold {
                rate_bits_per_symbol,
            } => Ok(DecodeAttempt {
                success: threshold_decode(sinr.gamma, rate_bits_per_symbol),
                bit_errors: 0,
                sinr,
                failure: None,
            }),
            DecoderModel::BitLevel => {
                let combined = mrc_combine(&records)?;
                let bits = qpsk_demodulate(&combined);
                match parse_frame(&bits, &self.frame_cfg) {
                    Ok(parsed) => {
                        let truth = &self
                            .sent
                            .get(&id)
                            .ok_or(HarqError::UnknownMessage(id))?
                            .payload;
                        let bit_errors = truth
                            .iter()
                            .zip(&parsed.payload)
                            .map(|(a, b)| (a ^ b).count_ones())
                            .sum();
                        let frame = build_frame_with_round(
                            &parsed.payload,
                            &self.frame_cfg,
                            parsed.seq,
                            parsed.round_index,
                        )?;
                        self.decoded.insert(id, qpsk_modulate(&frame.encoded_bits)?);
                        Ok(DecodeAttempt {
                            success: true,
                            bit_errors,
                            sinr,
                            failure: None,
                        })
                    }
                    Err(e @ (FrameError::BadHeader | FrameError::BadCrc)) => Ok(DecodeAttempt {
                        success: false,
                        bit_errors: 0,
                        sinr,
                        failure: Some(e),
                    }),
                    Err(e) => Err(e.into()),
                }
            }
        }
    }

    /// Subtracts a decoded message from every stored round that carries it.
    pub fn cancel_everywhere(&mut self, id: MessageId) -> Result<(), HarqError> {
        let known = if self.decoder.is_bit_level() {
            self.decoded
                .get(&id)
                .cloned()
                .ok_or(HarqError::UnknownMessage(id))?
        } else {
            SymbolBlock::default()
        };
        for rec in self.rounds.values_mut() {
            if rec.constituent(id).is_some_and(|c| !c.cancelled) {
                rec.cancel(id, &known)?;
            }
        }
        Ok(())
    }

    pub fn mark_abandoned(&mut self, id: MessageId) {
        self.abandoned.insert(id);
    }

    /// Drops transmitter/receiver state for a terminated message.
    pub fn forget(&mut self, id: MessageId) {
        self.sent.remove(&id);
        self.decoded.remove(&id);
    }

    /// Keeps only the rounds for which `keep` holds.
    pub fn retain_rounds(&mut self, keep: impl Fn(u64) -> bool) {
        self.rounds.retain(|&r, _| keep(r));
        let rounds = &self.rounds;
        self.abandoned
            .retain(|id| rounds.values().any(|rec| rec.contains(*id)));
    }
}
