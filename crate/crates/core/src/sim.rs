//! Monte Carlo driver: runs a scheme over an SNR grid and aggregates
//! BER, spectral efficiency, round counts and abandonment.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{ChannelModel, RngStream};
use crate::framing::{FrameConfig, FrameError};
use crate::harq::{
    run_harqcc_engine, run_nharq_engine, run_type1_engine, DecoderModel, EngineConfig, HarqError,
    MessageOutcome, MessageStatus, RunOutcomes,
};

/// Code rate assumed by the threshold decoder when no override is given.
pub const DEFAULT_THRESHOLD_CODE_RATE: f64 = 0.6;

/// QPSK carries two coded bits per symbol.
pub const BITS_PER_SYMBOL: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("SNR grid is empty")]
    EmptyGrid,
    #[error("SNR grid value {0} is not finite")]
    NonFiniteSnr(f64),
    #[error("frames must be at least 1")]
    NoFrames,
    #[error("alpha2 must lie in (0, 0.5) so the new packet out-powers the old one, got {0}")]
    Alpha2OutOfRange(f64),
    #[error("max_rounds must be at least 1")]
    InvalidMaxRounds,
    #[error("channel mean-square gain must be positive and finite")]
    InvalidChannel,
    #[error("code rate must lie in (0, 1], got {0}")]
    InvalidCodeRate(f64),
    #[error("{0} dB is not a point of the configured grid")]
    SnrNotInGrid(f64),
    #[error("no delivered frames to score when abandoned frames are excluded")]
    NothingDelivered,
    #[error("symbol accounting mismatch: {rounds} rounds x {per_round} symbols != {recorded} recorded")]
    SymbolAccounting {
        rounds: u64,
        per_round: u64,
        recorded: u64,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Harq(#[from] HarqError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Type1,
    HarqCc,
    NharqCc,
}

impl Scheme {
    /// Short name used on the command line and in output rows.
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Type1 => "type1",
            Scheme::HarqCc => "cc",
            Scheme::NharqCc => "n-cc",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Threshold,
    BitLevel,
}

/// How abandoned frames enter the BER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BerPolicy {
    /// Every payload bit of an abandoned frame counts as an error.
    #[default]
    CountAbandoned,
    /// Score delivered frames only.
    ExcludeAbandoned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub snr_db_grid: Vec<f64>,
    pub alpha2: f64,
    pub max_rounds: u32,
    pub frames: u64,
    pub decoder: DecoderKind,
    pub channel: ChannelModel,
    pub frame_cfg: FrameConfig,
    pub seed: u64,
    /// Replaces the code rate used for the decoder threshold and the SE
    /// normalization.
    pub code_rate_override: Option<f64>,
    pub constant_old_amplitude: bool,
    pub ber_policy: BerPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::NharqCc,
            snr_db_grid: (4..=14).map(f64::from).collect(),
            alpha2: 0.2,
            max_rounds: 3,
            frames: 1757,
            decoder: DecoderKind::Threshold,
            channel: ChannelModel::awgn(),
            frame_cfg: FrameConfig::default(),
            seed: 0,
            code_rate_override: None,
            constant_old_amplitude: false,
            ber_policy: BerPolicy::CountAbandoned,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.snr_db_grid.is_empty() {
            return Err(SimError::EmptyGrid);
        }
        if let Some(&bad) = self.snr_db_grid.iter().find(|s| !s.is_finite()) {
            return Err(SimError::NonFiniteSnr(bad));
        }
        if self.frames == 0 {
            return Err(SimError::NoFrames);
        }
        if !(self.alpha2 > 0.0 && self.alpha2 < 0.5) {
            return Err(SimError::Alpha2OutOfRange(self.alpha2));
        }
        if self.max_rounds == 0 {
            return Err(SimError::InvalidMaxRounds);
        }
        if !self.channel.is_valid() {
            return Err(SimError::InvalidChannel);
        }
        if let Some(r) = self.code_rate_override {
            if !(r > 0.0 && r <= 1.0) {
                return Err(SimError::InvalidCodeRate(r));
            }
        }
        self.frame_cfg.validate()?;
        Ok(())
    }

    /// Information bits per coded bit used for thresholds and SE.
    pub fn code_rate(&self) -> f64 {
        match (self.code_rate_override, self.decoder) {
            (Some(r), _) => r,
            (None, DecoderKind::Threshold) => DEFAULT_THRESHOLD_CODE_RATE,
            (None, DecoderKind::BitLevel) => self.frame_cfg.code_rate(),
        }
    }

    /// Symbols one round is charged in the SE denominator.
    pub fn symbols_per_round(&self) -> f64 {
        self.frame_cfg.payload_bits as f64 / (BITS_PER_SYMBOL * self.code_rate())
    }

    pub fn decoder_model(&self) -> DecoderModel {
        match self.decoder {
            DecoderKind::Threshold => DecoderModel::threshold(BITS_PER_SYMBOL * self.code_rate()),
            DecoderKind::BitLevel => DecoderModel::BitLevel,
        }
    }

    pub fn engine_config(&self, snr_db: f64) -> EngineConfig {
        EngineConfig {
            power: 10f64.powf(snr_db / 10.0),
            alpha2: self.alpha2,
            max_rounds: self.max_rounds,
            decoder: self.decoder_model(),
            channel: self.channel,
            frame_cfg: self.frame_cfg,
            constant_old_amplitude: self.constant_old_amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub ber: f64,
    pub se: f64,
    pub avg_rounds: f64,
    pub abandon_rate: f64,
    pub frames: u64,
    pub seed: u64,
}

/// Stream id of grid point `index`, trial `trial`.
pub fn stream_id(index: usize, trial: u32) -> u64 {
    ((index as u64) << 32) | u64::from(trial)
}

pub fn aggregate_ber(
    outcomes: &[MessageOutcome],
    payload_bits: usize,
    policy: BerPolicy,
) -> Result<f64, SimError> {
    if outcomes.is_empty() {
        return Err(SimError::NoFrames);
    }
    let bits = payload_bits as u64;
    let (mut errors, mut scored) = (0u64, 0u64);
    for m in outcomes {
        match (m.status, policy) {
            (MessageStatus::Delivered, _) => {
                errors += u64::from(m.bit_errors);
                scored += bits;
            }
            (_, BerPolicy::CountAbandoned) => {
                errors += bits;
                scored += bits;
            }
            (_, BerPolicy::ExcludeAbandoned) => {}
        }
    }
    if scored == 0 {
        return Err(SimError::NothingDelivered);
    }
    Ok(errors as f64 / scored as f64)
}

pub fn aggregate_se(
    outcomes: &[MessageOutcome],
    payload_bits: usize,
    symbols_per_round: f64,
    rounds: u64,
) -> Result<f64, SimError> {
    if outcomes.is_empty() || rounds == 0 {
        return Err(SimError::NoFrames);
    }
    let delivered = outcomes
        .iter()
        .filter(|m| m.status == MessageStatus::Delivered)
        .count();
    Ok((payload_bits * delivered) as f64 / (symbols_per_round * rounds as f64))
}

/// Runs the configured engine for one SNR value and returns raw outcomes.
pub fn run_outcomes(cfg: &SimConfig, snr_db: f64, stream: u64) -> Result<RunOutcomes, SimError> {
    let engine = cfg.engine_config(snr_db);
    let rng = RngStream::new(cfg.seed, stream);
    let out = match cfg.scheme {
        Scheme::Type1 => run_type1_engine(&engine, cfg.frames, rng)?,
        Scheme::HarqCc => run_harqcc_engine(&engine, cfg.frames, rng)?,
        Scheme::NharqCc => run_nharq_engine(&engine, cfg.frames, rng)?,
    };
    let per_round = cfg.frame_cfg.symbols_per_frame() as u64;
    if out.rounds * per_round != out.symbols_recorded {
        return Err(SimError::SymbolAccounting {
            rounds: out.rounds,
            per_round,
            recorded: out.symbols_recorded,
        });
    }
    Ok(out)
}

fn grid_index(cfg: &SimConfig, snr_db: f64) -> Option<usize> {
    cfg.snr_db_grid
        .iter()
        .position(|&s| (s - snr_db).abs() <= 1e-9 * s.abs().max(1.0))
}

pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<MetricsRow, SimError> {
    cfg.validate()?;
    let index = grid_index(cfg, snr_db).ok_or(SimError::SnrNotInGrid(snr_db))?;
    point_at(cfg, index)
}

fn point_at(cfg: &SimConfig, index: usize) -> Result<MetricsRow, SimError> {
    let snr_db = cfg.snr_db_grid[index];
    let out = run_outcomes(cfg, snr_db, stream_id(index, 0))?;
    let bits = cfg.frame_cfg.payload_bits;
    let n = out.messages.len() as f64;
    let total_rounds: u64 = out.messages.iter().map(|m| u64::from(m.rounds_used)).sum();
    Ok(MetricsRow {
        scheme: cfg.scheme,
        snr_db,
        ber: aggregate_ber(&out.messages, bits, cfg.ber_policy)?,
        se: aggregate_se(&out.messages, bits, cfg.symbols_per_round(), out.rounds)?,
        avg_rounds: total_rounds as f64 / n,
        abandon_rate: out.abandoned() as f64 / n,
        frames: out.messages.len() as u64,
        seed: cfg.seed,
    })
}

/// One row per grid point, computed in parallel, in grid order.
pub fn sweep(cfg: &SimConfig) -> Result<Vec<MetricsRow>, SimError> {
    cfg.validate()?;
    (0..cfg.snr_db_grid.len())
        .into_par_iter()
        .map(|i| point_at(cfg, i))
        .collect()
}

pub fn sweep_serial(cfg: &SimConfig) -> Result<Vec<MetricsRow>, SimError> {
    cfg.validate()?;
    (0..cfg.snr_db_grid.len()).map(|i| point_at(cfg, i)).collect()
}
