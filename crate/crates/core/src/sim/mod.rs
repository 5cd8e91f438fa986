//! Deterministic slot loop for the DARS family and the DcC model.
//!
//! Every slot runs the same phases in the same order: arrivals, rate
//! control, scheduling, the feasibility gate, transfer realization, queue
//! update and recording. Policies see beginning-of-slot backlogs only.

mod dcc;
mod engine;
mod metrics;
mod replicate;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dcc::DccError;
use crate::model::Network;
use crate::policies::{DarsParams, Infeasibility, PolicyError, PolicyKind};
use crate::queueing::LossMode;

pub use dcc::{dcc_run_check, run_dcc, run_dcc_replication, DccRecord, DccReport, DccSimConfig, DccTrace};
pub use engine::{run_replication, run_simulation, Engine};
pub use metrics::{compute_metrics, growth_ratio, window_mean, Metrics};
pub use replicate::{run_replications, Execution, Pooled, Replications, RunSummary};
pub use trace::{SlotRecord, Trace, TraceDigest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Dcc(#[from] DccError),
    #[error("warm-up {warmup} must be shorter than the horizon {slots}")]
    BadWarmup { warmup: u64, slots: u64 },
    #[error("slot {slot}: {policy} produced an infeasible activation set: {reason}")]
    Infeasible { slot: u64, policy: String, reason: Infeasibility },
    #[error("measurement window [{start}, {end}) is empty or outside the trace of {len} slots")]
    EmptyWindow { start: u64, end: u64, len: u64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// One DARS-family experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub network: Network,
    pub policy: PolicyKind,
    pub params: DarsParams,
    pub slots: u64,
    /// Slots excluded from averages; `None` means `slots / 10`.
    pub warmup: Option<u64>,
    pub seed: u64,
    pub loss_mode: LossMode,
}

impl SimConfig {
    pub fn new(network: Network, policy: PolicyKind, slots: u64, seed: u64) -> Self {
        Self {
            network,
            policy,
            params: DarsParams::default(),
            slots,
            warmup: None,
            seed,
            loss_mode: LossMode::Stochastic,
        }
    }

    pub fn warmup_slots(&self) -> u64 {
        self.warmup.unwrap_or(self.slots / 10)
    }

    pub fn check(&self) -> Result<(), SimError> {
        check_horizon(self.warmup_slots(), self.slots)
    }
}

pub(crate) fn check_horizon(warmup: u64, slots: u64) -> Result<(), SimError> {
    if slots > 0 && warmup >= slots {
        return Err(SimError::BadWarmup { warmup, slots });
    }
    Ok(())
}

/// `[W, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: u64,
    pub end: u64,
}

impl Window {
    pub fn new(start: u64, end: u64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
