//! Retransmission controllers.
//!
//! Both controllers Chase-combine LLRs of repeated transmissions. The CRC
//! controller acknowledges on a passing checksum. The semantic controller
//! acknowledges when the estimated corruption fraction `f` of the received
//! block-mean grid is at most `τ`, and walks a fallback ladder otherwise.
//! Feedback is instantaneous and error-free; round `r` (1-based) uses channel
//! seed `derive(seed, r)`.

mod crc;
mod semantic;

pub use crc::run_crc_harq;
pub use semantic::run_semantic_harq;

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{BitStream, LlrStream};
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::phy::ChannelConfig;
use crate::rng::derive;

pub const DEFAULT_MAX_ROUNDS: usize = 4;
pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarqKind {
    CrcBased,
    SemanticAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderStep {
    /// Resend the same payload and combine.
    ChaseRetransmit,
    /// Halve the block size (floor 1) and restart the combining buffer.
    Recompress,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarqPolicy {
    pub kind: HarqKind,
    pub max_rounds: usize,
    /// Acknowledge when `f ≤ tau`.
    pub tau: f64,
    /// Steps applied after round 1, cycled.
    pub ladder: Vec<LadderStep>,
    /// Outlier threshold for the error mask.
    pub delta: u8,
}

impl Default for HarqPolicy {
    fn default() -> Self {
        HarqPolicy {
            kind: HarqKind::SemanticAware,
            max_rounds: DEFAULT_MAX_ROUNDS,
            tau: DEFAULT_TAU,
            ladder: vec![LadderStep::ChaseRetransmit, LadderStep::Recompress],
            delta: crate::semdec::DEFAULT_DELTA,
        }
    }
}

impl HarqPolicy {
    pub fn crc_based(max_rounds: usize) -> Self {
        HarqPolicy {
            kind: HarqKind::CrcBased,
            max_rounds,
            ..HarqPolicy::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig("max_rounds must be at least 1"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidConfig("tau must lie in (0, 1)"));
        }
        if self.ladder.is_empty() {
            return Err(Error::InvalidConfig("fallback ladder must not be empty"));
        }
        Ok(())
    }

    /// Action taken in round `round` (1-based).
    pub fn action(&self, round: usize) -> RoundAction {
        if round <= 1 {
            return RoundAction::Initial;
        }
        match self.ladder[(round - 2) % self.ladder.len()] {
            LadderStep::ChaseRetransmit => RoundAction::Chase,
            LadderStep::Recompress => RoundAction::Recompress,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundAction {
    Initial,
    Chase,
    Recompress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ack,
    NackExhausted,
}

/// One line of the session trace.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub action: RoundAction,
    pub snr_db: f64,
    pub seed: u64,
    /// LPF block size of the payload sent this round (semantic sessions).
    pub block_size: Option<usize>,
    pub message_bits: usize,
    pub coded_bits: usize,
    /// Hard-decision error rate of this round's coded bits alone.
    pub ber_pre: f64,
    /// Error rate of the decoded message after combining.
    pub ber_post: f64,
    /// Rounds currently held in the combining buffer.
    pub combined: usize,
    pub crc_ok: Option<bool>,
    pub corruption: Option<f64>,
    pub ack: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarqSession {
    pub kind: HarqKind,
    pub records: Vec<RoundRecord>,
    pub outcome: Outcome,
    /// Chase buffer of the last payload.
    pub buffer: LlrStream,
    /// Message of the last payload as sent.
    pub sent: BitStream,
    /// Decoded message of the last round.
    pub decoded: BitStream,
    /// Restored image (semantic sessions only).
    pub image: Option<Image>,
}

impl HarqSession {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn retransmissions(&self) -> usize {
        self.rounds().saturating_sub(1)
    }

    pub fn final_corruption(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.corruption)
    }
}

pub(crate) fn round_channel(channel: &ChannelConfig, round: usize) -> ChannelConfig {
    channel.with_seed(derive(channel.seed, round as u64))
}
