//! Round-by-round drivers for N-HARQ-CC and the two baselines.

use std::collections::HashMap;

use crate::channel::{ChannelModel, RngStream};
use crate::framing::FrameConfig;
use crate::phy::{MessageId, SuperpositionSpec};

use super::link::{AmplitudeOverride, DecodeAttempt, Link};
use super::state::{
    Ack, Feedback, HarqEngineState, MessageStatus, TransmitDecision,
};
use super::{DecoderModel, HarqError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Linear transmit power `P` (noise variance is 1).
    pub power: f64,
    /// Old-packet power fraction `alpha^2`; unused by the baselines.
    pub alpha2: f64,
    pub max_rounds: u32,
    pub decoder: DecoderModel,
    pub channel: ChannelModel,
    pub frame_cfg: FrameConfig,
    /// Decode the old message against the constant `alpha*sqrt(P)`
    /// amplitude over its whole window, ignoring a full-power first copy.
    pub constant_old_amplitude: bool,
}

impl EngineConfig {
    fn superposition(&self) -> Result<SuperpositionSpec, HarqError> {
        Ok(SuperpositionSpec::from_alpha2(self.alpha2, self.power)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageOutcome {
    pub id: MessageId,
    pub status: MessageStatus,
    pub rounds_used: u32,
    /// Payload bit errors of a delivered frame; zero otherwise.
    pub bit_errors: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundLog {
    pub round: u64,
    pub decision: TransmitDecision,
    pub feedback: Feedback,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunOutcomes {
    /// One entry per counted message, in id order.
    pub messages: Vec<MessageOutcome>,
    pub rounds: u64,
    /// Sum of per-round symbol counts as recorded by the link.
    pub symbols_recorded: u64,
    pub transcript: Vec<RoundLog>,
}

impl RunOutcomes {
    pub fn delivered(&self) -> usize {
        self.messages
            .iter()
            .filter(|m| m.status == MessageStatus::Delivered)
            .count()
    }

    pub fn abandoned(&self) -> usize {
        self.messages
            .iter()
            .filter(|m| m.status == MessageStatus::Abandoned)
            .count()
    }
}

/// Decodes one N-HARQ-CC round: the new (or sole) message first, then the
/// old message after cancelling the new one. Returns the feedback and the
/// attempts made, in decode order.
pub fn receive_round(
    state: &HarqEngineState,
    link: &mut Link,
    old_amplitudes: Option<AmplitudeOverride>,
) -> Result<(Feedback, Vec<(MessageId, DecodeAttempt)>), HarqError> {
    let new = state.new_message();
    let new_attempt = link.decode(new.id, &new.copies, None)?;
    let new_ok = new_attempt.success;
    if new_ok {
        link.cancel_everywhere(new.id)?;
    }
    let mut attempts = vec![(new.id, new_attempt)];
    let Some(old) = state.old() else {
        return Ok((Feedback::itm(Ack::from_success(new_ok)), attempts));
    };
    if !new_ok {
        // SIC cannot proceed without the new message
        return Ok((Feedback::rm(Ack::Nack, Ack::Nack), attempts));
    }
    let old_attempt = link.decode(old.id, &old.copies, old_amplitudes)?;
    let old_ok = old_attempt.success;
    if old_ok {
        link.cancel_everywhere(old.id)?;
    }
    attempts.push((old.id, old_attempt));
    Ok((Feedback::rm(Ack::from_success(old_ok), Ack::Ack), attempts))
}

/// Runs N-HARQ-CC until messages `0..messages` have all terminated.
///
/// Fresh messages keep entering behind them so the tail sees the same
/// superposition pattern as the bulk; those extra messages are not
/// counted.
pub fn run_nharq_engine(
    cfg: &EngineConfig,
    messages: u64,
    rng: RngStream,
) -> Result<RunOutcomes, HarqError> {
    let spec = cfg.superposition()?;
    let mut state = HarqEngineState::new(cfg.max_rounds)?;
    let mut link = Link::new(cfg.decoder, cfg.channel, cfg.frame_cfg, rng);
    let old_amplitudes = cfg.constant_old_amplitude.then(|| AmplitudeOverride {
        signal: spec.amplitude_old(),
        interference: spec.amplitude_new(),
    });

    let mut out = RunOutcomes::default();
    let mut bit_errors: HashMap<MessageId, u32> = HashMap::new();
    let mut remaining = messages;
    while remaining > 0 {
        let (round, decision) = state.begin_round()?;
        let parts = match decision {
            TransmitDecision::Itm(k) => vec![(k, spec.amplitude_full())],
            TransmitDecision::Rm { old, new } => {
                vec![(old, spec.amplitude_old()), (new, spec.amplitude_new())]
            }
        };
        link.transmit(round, &parts)?;
        let (feedback, attempts) = receive_round(&state, &mut link, old_amplitudes)?;
        for (id, a) in attempts.iter().filter(|(_, a)| a.success) {
            bit_errors.insert(*id, a.bit_errors);
        }
        out.transcript.push(RoundLog {
            round,
            decision,
            feedback,
        });
        out.rounds += 1;

        let transition = state.schedule_next(feedback)?;
        for ctx in transition.terminated {
            if ctx.status == MessageStatus::Abandoned {
                link.mark_abandoned(ctx.id);
            }
            link.forget(ctx.id);
            let errors = bit_errors.remove(&ctx.id).unwrap_or(0);
            if ctx.id.0 < messages {
                out.messages.push(MessageOutcome {
                    id: ctx.id,
                    status: ctx.status,
                    rounds_used: ctx.rounds_used,
                    bit_errors: errors,
                });
                remaining -= 1;
            }
        }
        let live: Vec<u64> = state.active().flat_map(|c| c.copies.iter().copied()).collect();
        link.retain_rounds(|r| live.contains(&r));
    }
    out.messages.sort_by_key(|m| m.id);
    out.symbols_recorded = link.symbols_sent();
    Ok(out)
}

/// Type-I HARQ: full power, each round decoded from its own copy only.
pub fn run_type1_engine(
    cfg: &EngineConfig,
    messages: u64,
    rng: RngStream,
) -> Result<RunOutcomes, HarqError> {
    run_single_stream(cfg, messages, rng, false)
}

/// HARQ-CC: full power, every round MRC-combines all copies so far.
pub fn run_harqcc_engine(
    cfg: &EngineConfig,
    messages: u64,
    rng: RngStream,
) -> Result<RunOutcomes, HarqError> {
    run_single_stream(cfg, messages, rng, true)
}

fn run_single_stream(
    cfg: &EngineConfig,
    messages: u64,
    rng: RngStream,
    combine: bool,
) -> Result<RunOutcomes, HarqError> {
    if cfg.max_rounds == 0 {
        return Err(HarqError::InvalidMaxRounds);
    }
    let amplitude = cfg.power.sqrt();
    let mut link = Link::new(cfg.decoder, cfg.channel, cfg.frame_cfg, rng);
    let mut out = RunOutcomes::default();
    let mut round = 0u64;
    for k in 0..messages {
        let id = MessageId(k);
        let mut copies = Vec::with_capacity(cfg.max_rounds as usize);
        let mut outcome = MessageOutcome {
            id,
            status: MessageStatus::Abandoned,
            rounds_used: 0,
            bit_errors: 0,
        };
        for _ in 0..cfg.max_rounds {
            link.transmit(round, &[(id, amplitude)])?;
            copies.push(round);
            outcome.rounds_used += 1;
            let window = if combine { &copies[..] } else { &copies[copies.len() - 1..] };
            let attempt = link.decode(id, window, None)?;
            out.transcript.push(RoundLog {
                round,
                decision: TransmitDecision::Itm(id),
                feedback: Feedback::itm(Ack::from_success(attempt.success)),
            });
            round += 1;
            if attempt.success {
                outcome.status = MessageStatus::Delivered;
                outcome.bit_errors = attempt.bit_errors;
                break;
            }
        }
        link.forget(id);
        link.retain_rounds(|_| false);
        out.messages.push(outcome);
    }
    out.rounds = round;
    out.symbols_recorded = link.symbols_sent();
    Ok(out)
}
