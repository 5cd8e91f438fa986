//! Per-slot control policies: DARS (queue-priced admission plus
//! device-aware max-weight routing and scheduling) and three baselines.

mod baselines;
mod maxweight;
mod rate_control;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Link, Network, NodeId, Topology};
use crate::queueing::QueueState;

pub use baselines::{equal_split_next_hops, equal_split_policy, receive_forward_policy};
pub use maxweight::{
    activation_weight, candidates, exact_max_weight, greedy_max_weight, max_weight_schedule, Candidate,
    EXACT_LINK_LIMIT,
};
pub use rate_control::{dars_rate_control, golden_section_max};

/// `gamma_{i,j}^s = 1`: link `link` (from `src` to `dst`) carries flow `flow`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Activation {
    pub src: NodeId,
    pub dst: NodeId,
    pub flow: usize,
    pub link: usize,
}

impl Activation {
    pub fn new(link: &Link, index: usize, flow: usize) -> Self {
        Self { src: link.src, dst: link.dst, flow, link: index }
    }

    /// Tie-break order: (sender, receiver, flow).
    pub fn key(&self) -> (NodeId, NodeId, usize) {
        (self.src, self.dst, self.flow)
    }
}

/// One slot's control: admitted rates, activations and the per-activation
/// transfer attempt `f = F_max`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotDecision {
    pub admitted: Vec<f64>,
    pub activations: Vec<Activation>,
    pub scheduled: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkWeighting {
    /// `min{R_P, R_E, R_W}` of the receiver (DARS).
    ReceiverCapability,
    /// `R_{i,j}` (backpressure).
    LinkRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Dars,
    Backpressure,
    EqualSplit,
    ReceiveForward,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Dars, PolicyKind::Backpressure, PolicyKind::EqualSplit, PolicyKind::ReceiveForward];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dars => "dars",
            PolicyKind::Backpressure => "backpressure",
            PolicyKind::EqualSplit => "equal_split",
            PolicyKind::ReceiveForward => "receive_forward",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// `M`, `R_max`, `F_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarsParams {
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "one")]
    pub r_max: f64,
    #[serde(default = "one")]
    pub f_max: f64,
}

fn default_m() -> f64 {
    200.0
}

fn one() -> f64 {
    1.0
}

impl Default for DarsParams {
    fn default() -> Self {
        Self { m: default_m(), r_max: 1.0, f_max: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("{policy} cannot run on this network: {reason}")]
    Unsupported { policy: PolicyKind, reason: String },
}

impl DarsParams {
    /// `F_max` must be at least every link rate and every capability so that
    /// it is an attempt cap only and never the binding limit.
    pub fn check(&self, net: &Network) -> Result<(), PolicyError> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(PolicyError::BadParams(format!("M must be positive, got {}", self.m)));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(PolicyError::BadParams(format!("R_max must be positive, got {}", self.r_max)));
        }
        let needed = net.topology().max_rate().max(net.max_capability());
        if !(self.f_max >= needed && self.f_max.is_finite()) {
            return Err(PolicyError::BadParams(format!(
                "F_max = {} is below the largest link rate or capability ({needed})",
                self.f_max
            )));
        }
        Ok(())
    }
}

/// Activation set maximizing `sum cap_j (U_i^s - U_j^s)` over feasible sets.
pub fn dars_schedule(net: &Network, queues: &QueueState) -> Vec<Activation> {
    max_weight_schedule(net, queues, LinkWeighting::ReceiverCapability)
}

/// Activation set maximizing `sum R_ij (U_i^s - U_j^s)`; device capability is
/// ignored here and only binds when transfers are realized.
pub fn backpressure_schedule(net: &Network, queues: &QueueState) -> Vec<Activation> {
    max_weight_schedule(net, queues, LinkWeighting::LinkRate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    params: DarsParams,
}

impl Policy {
    /// Checks parameters and the topology preconditions of `kind`.
    pub fn new(kind: PolicyKind, params: DarsParams, net: &Network) -> Result<Self, PolicyError> {
        params.check(net)?;
        match kind {
            PolicyKind::EqualSplit => {
                equal_split_next_hops(net)?;
            }
            PolicyKind::ReceiveForward => {
                if !net.topology().is_line() {
                    return Err(PolicyError::Unsupported { policy: kind, reason: "topology is not a line".into() });
                }
            }
            PolicyKind::Dars | PolicyKind::Backpressure => {}
        }
        Ok(Self { kind, params })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn params(&self) -> &DarsParams {
        &self.params
    }

    /// Decision for `slot` from beginning-of-slot backlogs.
    pub fn decide(&self, slot: u64, net: &Network, queues: &QueueState) -> SlotDecision {
        let p = &self.params;
        let (admitted, activations) = match self.kind {
            PolicyKind::Dars => {
                let admitted = net
                    .flows()
                    .iter()
                    .enumerate()
                    .map(|(s, f)| dars_rate_control(queues.get(f.source, s) as f64, p.m, p.r_max, &f.utility))
                    .collect();
                (admitted, dars_schedule(net, queues))
            }
            PolicyKind::Backpressure => {
                let admitted = net
                    .flows()
                    .iter()
                    .enumerate()
                    .map(|(s, f)| dars_rate_control(queues.get(f.source, s) as f64, p.m, p.r_max, &f.utility))
                    .collect();
                (admitted, backpressure_schedule(net, queues))
            }
            PolicyKind::EqualSplit => (vec![p.r_max; net.flows().len()], equal_split_policy(slot, net, queues)),
            PolicyKind::ReceiveForward => (vec![p.r_max; net.flows().len()], receive_forward_policy(net, queues)),
        };
        let scheduled = vec![p.f_max; activations.len()];
        SlotDecision { admitted, activations, scheduled }
    }
}

/// Why an activation set is outside the feasible set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Infeasibility {
    #[error("activation refers to unknown link {0}")]
    UnknownLink(usize),
    #[error("activation endpoints do not match link {0}")]
    EndpointMismatch(usize),
    #[error("links {0} and {1} conflict under the interference model")]
    Conflict(usize, usize),
}

/// Membership in the feasible set: pairwise compatibility under the
/// topology's interference model (which also makes every receiver unique).
pub fn check_feasible(topology: &Topology, set: &[Activation]) -> Result<(), Infeasibility> {
    for a in set {
        let l = topology.links.get(a.link).ok_or(Infeasibility::UnknownLink(a.link))?;
        if l.src != a.src || l.dst != a.dst {
            return Err(Infeasibility::EndpointMismatch(a.link));
        }
    }
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            let (la, lb) = (&topology.links[a.link], &topology.links[b.link]);
            if a.link == b.link || !topology.interference.compatible(la, lb) {
                return Err(Infeasibility::Conflict(a.link, b.link));
            }
        }
    }
    Ok(())
}
