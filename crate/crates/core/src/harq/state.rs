//! Transmitter-side protocol state of N-HARQ-CC.
//!
//! In initial transmission mode (ITM) one message is sent at full
//! power. After a NACK the retransmission mode (RM) superimposes the
//! failed message (old) with the next fresh message (new). The next
//! round after RM feedback is
//!
//! | old  | new  | next round                   |
//! |------|------|------------------------------|
//! | NACK | NACK | RM(old, new)                 |
//! | ACK  | NACK | RM(new, fresh)               |
//! | NACK | ACK  | RM(old, fresh)               |
//! | ACK  | ACK  | ITM(fresh)                   |
//!
//! A message that is NACKed on its `M`-th round is abandoned and leaves
//! the schedule. If it shared rounds with a surviving message, that
//! message carries uncancellable interference in those rounds, recorded
//! as a SIC-failure bookmark.

use crate::phy::MessageId;

use super::HarqError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ack {
    Ack,
    Nack,
}

impl Ack {
    pub fn from_success(success: bool) -> Self {
        if success {
            Ack::Ack
        } else {
            Ack::Nack
        }
    }

    pub fn is_ack(self) -> bool {
        self == Ack::Ack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Feedback {
    /// Present iff the round was RM.
    pub old_ack: Option<Ack>,
    pub new_ack: Ack,
}

impl Feedback {
    pub fn itm(ack: Ack) -> Self {
        Self {
            old_ack: None,
            new_ack: ack,
        }
    }

    pub fn rm(old: Ack, new: Ack) -> Self {
        Self {
            old_ack: Some(old),
            new_ack: new,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Itm,
    Rm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageStatus {
    Pending,
    Delivered,
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageContext {
    pub id: MessageId,
    pub rounds_used: u32,
    /// Round indices carrying a copy of this message, oldest first.
    pub copies: Vec<u64>,
    pub status: MessageStatus,
    /// Last round `l1` in which an abandoned interferer shared this
    /// message's window.
    pub sic_failure_round: Option<u64>,
    pub sic_failure_source: Option<MessageId>,
}

impl MessageContext {
    fn fresh(id: MessageId) -> Self {
        Self {
            id,
            rounds_used: 0,
            copies: Vec::new(),
            status: MessageStatus::Pending,
            sic_failure_round: None,
            sic_failure_source: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransmitDecision {
    Itm(MessageId),
    Rm { old: MessageId, new: MessageId },
}

impl TransmitDecision {
    pub fn mode(&self) -> Mode {
        match self {
            TransmitDecision::Itm(_) => Mode::Itm,
            TransmitDecision::Rm { .. } => Mode::Rm,
        }
    }

    pub fn messages(&self) -> Vec<MessageId> {
        match *self {
            TransmitDecision::Itm(k) => vec![k],
            TransmitDecision::Rm { old, new } => vec![old, new],
        }
    }
}

/// Result of applying one round's feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub next: TransmitDecision,
    /// Messages that left the schedule this round, with final status.
    pub terminated: Vec<MessageContext>,
}

#[derive(Debug, Clone)]
pub struct HarqEngineState {
    max_rounds: u32,
    old: Option<MessageContext>,
    /// The new message in RM, the sole message in ITM.
    new: MessageContext,
    next_seq: u64,
    round: u64,
    in_flight: bool,
}

impl HarqEngineState {
    /// Starts in ITM with message 0 scheduled for round 0.
    pub fn new(max_rounds: u32) -> Result<Self, HarqError> {
        if max_rounds == 0 {
            return Err(HarqError::InvalidMaxRounds);
        }
        Ok(Self {
            max_rounds,
            old: None,
            new: MessageContext::fresh(MessageId(0)),
            next_seq: 1,
            round: 0,
            in_flight: false,
        })
    }

    pub fn max_rounds(&self) -> u32 {
        self.max_rounds
    }

    pub fn mode(&self) -> Mode {
        if self.old.is_some() {
            Mode::Rm
        } else {
            Mode::Itm
        }
    }

    pub fn old(&self) -> Option<&MessageContext> {
        self.old.as_ref()
    }

    pub fn new_message(&self) -> &MessageContext {
        &self.new
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Index of the round about to be (or being) transmitted.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn active(&self) -> impl Iterator<Item = &MessageContext> {
        self.old.iter().chain(std::iter::once(&self.new))
    }

    pub fn decision(&self) -> TransmitDecision {
        match &self.old {
            None => TransmitDecision::Itm(self.new.id),
            Some(old) => TransmitDecision::Rm {
                old: old.id,
                new: self.new.id,
            },
        }
    }

    /// Puts the scheduled round on the air and returns its index.
    pub fn begin_round(&mut self) -> Result<(u64, TransmitDecision), HarqError> {
        if self.in_flight {
            return Err(HarqError::AwaitingFeedback(self.round));
        }
        let round = self.round;
        if let Some(old) = self.old.as_mut() {
            old.rounds_used += 1;
            old.copies.push(round);
        }
        self.new.rounds_used += 1;
        self.new.copies.push(round);
        self.in_flight = true;
        Ok((round, self.decision()))
    }

    fn fresh(&mut self) -> MessageContext {
        let ctx = MessageContext::fresh(MessageId(self.next_seq));
        self.next_seq += 1;
        ctx
    }

    fn resolve(&self, ctx: &mut MessageContext, ack: Ack) {
        ctx.status = match ack {
            Ack::Ack => MessageStatus::Delivered,
            Ack::Nack if ctx.rounds_used >= self.max_rounds => MessageStatus::Abandoned,
            Ack::Nack => MessageStatus::Pending,
        };
    }

    fn bookmark(
        survivor: &mut MessageContext,
        source: &MessageContext,
        round: u64,
    ) -> Result<(), HarqError> {
        if let Some(prev) = survivor.sic_failure_source {
            if prev != source.id {
                return Err(HarqError::MultipleSicFailures(survivor.id));
            }
        }
        survivor.sic_failure_round = Some(round);
        survivor.sic_failure_source = Some(source.id);
        Ok(())
    }

    /// Applies the feedback for the round in flight and schedules the next.
    pub fn schedule_next(&mut self, fb: Feedback) -> Result<Transition, HarqError> {
        if !self.in_flight {
            return Err(HarqError::NothingInFlight);
        }
        let mode = self.mode();
        match (mode, fb.old_ack) {
            (Mode::Itm, None) | (Mode::Rm, Some(_)) => {}
            _ => return Err(HarqError::FeedbackMismatch { mode }),
        }
        let round = self.round;
        let mut new = std::mem::replace(&mut self.new, MessageContext::fresh(MessageId(u64::MAX)));
        self.resolve(&mut new, fb.new_ack);
        let mut terminated = Vec::new();

        match self.old.take() {
            None => {
                if new.status == MessageStatus::Pending {
                    self.old = Some(new);
                } else {
                    terminated.push(new);
                }
                self.new = self.fresh();
            }
            Some(mut old) => {
                self.resolve(&mut old, fb.old_ack.unwrap_or(Ack::Nack));
                match (old.status, new.status) {
                    (MessageStatus::Pending, MessageStatus::Pending) => {
                        self.old = Some(old);
                        self.new = new;
                    }
                    (MessageStatus::Pending, _) => {
                        if new.status == MessageStatus::Abandoned {
                            Self::bookmark(&mut old, &new, round)?;
                        }
                        terminated.push(new);
                        self.old = Some(old);
                        self.new = self.fresh();
                    }
                    (_, MessageStatus::Pending) => {
                        if old.status == MessageStatus::Abandoned {
                            Self::bookmark(&mut new, &old, round)?;
                        }
                        terminated.push(old);
                        self.old = Some(new);
                        self.new = self.fresh();
                    }
                    _ => {
                        terminated.push(old);
                        terminated.push(new);
                        self.new = self.fresh();
                    }
                }
            }
        }
        self.round += 1;
        self.in_flight = false;
        self.check_invariants()?;
        Ok(Transition {
            next: self.decision(),
            terminated,
        })
    }

    pub fn check_invariants(&self) -> Result<(), HarqError> {
        for ctx in self.active() {
            if ctx.rounds_used > self.max_rounds {
                return Err(HarqError::Invariant(format!(
                    "{} used {} rounds, limit {}",
                    ctx.id, ctx.rounds_used, self.max_rounds
                )));
            }
            if ctx.status != MessageStatus::Pending {
                return Err(HarqError::Invariant(format!("{} active but not pending", ctx.id)));
            }
        }
        if let Some(old) = &self.old {
            if old.id >= self.new.id {
                return Err(HarqError::Invariant(format!(
                    "RM pair out of order: {} / {}",
                    old.id, self.new.id
                )));
            }
        }
        Ok(())
    }
}
