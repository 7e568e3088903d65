//! The N-HARQ-CC protocol engine and the Type-I / HARQ-CC baselines.

mod decoder;
mod engine;
mod link;
mod state;

pub use decoder::{threshold_decode, DecoderModel};
pub use engine::{
    receive_round, run_harqcc_engine, run_nharq_engine, run_type1_engine, EngineConfig,
    MessageOutcome, RoundLog, RunOutcomes,
};
pub use link::{AmplitudeOverride, DecodeAttempt, Link};
pub use state::{
    Ack, Feedback, HarqEngineState, MessageContext, MessageStatus, Mode, TransmitDecision,
    Transition,
};

use thiserror::Error;

use crate::framing::FrameError;
use crate::phy::{MessageId, PhyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarqError {
    #[error("max_rounds must be at least 1")]
    InvalidMaxRounds,
    #[error("feedback does not match the {mode:?} round in flight")]
    FeedbackMismatch { mode: Mode },
    #[error("round {0} is still awaiting feedback")]
    AwaitingFeedback(u64),
    #[error("no round in flight")]
    NothingInFlight,
    #[error("message {0} would carry a second abandoned interferer")]
    MultipleSicFailures(MessageId),
    #[error("window of {target} holds more than one abandoned interferer (round {round})")]
    MultipleAbandonedInterferers { target: MessageId, round: u64 },
    #[error("round {0} is not stored")]
    UnknownRound(u64),
    #[error("no frame state for message {0}")]
    UnknownMessage(MessageId),
    #[error("protocol invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}
