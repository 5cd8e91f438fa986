//! Integer per-node, per-flow packet queues, the queue recursion, and the
//! physical realization (capacity limits and losses) of scheduled transfers.

use serde::{Deserialize, Serialize};

use crate::model::{NodeId, RngStream};

/// How link losses are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Each sent packet survives independently with probability `1 - loss_p`.
    #[default]
    Stochastic,
    /// Deterministic thinning: `sent * (1 - loss_p)` accumulated in a carry
    /// register, delivering whole packets as the register fills.
    FluidExpectation,
}

/// Fractional accumulator turning a real per-slot rate into whole packets.
///
/// `grant(rate)` returns `floor(rate + carry)` and keeps the fractional
/// remainder, so the long-run average of the grants equals `rate`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Credit(f64);

impl Credit {
    pub fn new(carry: f64) -> Self {
        Credit(carry)
    }

    pub fn carry(&self) -> f64 {
        self.0
    }

    pub fn grant(&mut self, rate: f64) -> u64 {
        let total = rate.max(0.0) + self.0;
        // 1e-9 absorbs representation error in sums like 0.1 * 10.
        let whole = (total + 1e-9).floor();
        self.0 = (total - whole).max(0.0);
        whole as u64
    }
}

/// Scheduled, dequeued and delivered packet counts of one transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransferOutcome {
    pub scheduled: u64,
    pub sent: u64,
    pub delivered: u64,
}

impl TransferOutcome {
    pub fn lost(&self) -> u64 {
        self.sent - self.delivered
    }
}

/// Inputs of one transfer attempt. The allowances are the whole-packet
/// grants of the link-rate and receiver-capability credits for this slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferRequest {
    pub scheduled: f64,
    pub link_allowance: u64,
    pub receiver_allowance: u64,
    pub backlog: u64,
    pub loss_p: f64,
}

/// `sent = min(scheduled, link, receiver, backlog)`, then losses thin `sent`
/// into `delivered`. Scheduled packets the physical limits refuse stay
/// queued at the sender.
pub fn realize_transfer(
    req: &TransferRequest,
    mode: LossMode,
    rng: &mut RngStream,
    loss_carry: &mut f64,
) -> TransferOutcome {
    let scheduled = (req.scheduled.max(0.0) + 1e-9).floor() as u64;
    let sent = scheduled.min(req.link_allowance).min(req.receiver_allowance).min(req.backlog);
    let survive = 1.0 - req.loss_p.clamp(0.0, 1.0);
    let delivered = match mode {
        LossMode::Stochastic => rng.binomial(sent, survive),
        LossMode::FluidExpectation => {
            let total = sent as f64 * survive + *loss_carry;
            let whole = (total + 1e-9).floor().min(sent as f64);
            *loss_carry = (total - whole).max(0.0);
            whole as u64
        }
    };
    TransferOutcome { scheduled, sent, delivered }
}

/// `max(U - out, 0) + in + admitted`.
pub fn update_queue(backlog: u64, total_out: u64, total_in: u64, admitted: u64) -> u64 {
    backlog.saturating_sub(total_out) + total_in + admitted
}

/// Backlog table `U[node][flow]` plus the per-flow admission carry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueueState {
    n_nodes: usize,
    n_flows: usize,
    backlog: Vec<u64>,
}

impl QueueState {
    pub fn new(n_nodes: usize, n_flows: usize) -> Self {
        Self { n_nodes, n_flows, backlog: vec![0; n_nodes * n_flows] }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_flows(&self) -> usize {
        self.n_flows
    }

    fn idx(&self, node: NodeId, flow: usize) -> usize {
        debug_assert!(node.0 < self.n_nodes && flow < self.n_flows);
        node.0 * self.n_flows + flow
    }

    pub fn get(&self, node: NodeId, flow: usize) -> u64 {
        self.backlog[self.idx(node, flow)]
    }

    pub fn set(&mut self, node: NodeId, flow: usize, value: u64) {
        let i = self.idx(node, flow);
        self.backlog[i] = value;
    }

    /// Multiplies every entry by `c` (used by scaling-invariance tests).
    pub fn scaled(&self, c: u64) -> Self {
        Self { backlog: self.backlog.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    pub fn entries(&self) -> &[u64] {
        &self.backlog
    }
}

pub fn total_backlog(state: &QueueState) -> u64 {
    state.backlog.iter().sum()
}

pub fn per_flow_backlog(state: &QueueState, flow: usize) -> u64 {
    (0..state.n_nodes).map(|v| state.get(NodeId(v), flow)).sum()
}
