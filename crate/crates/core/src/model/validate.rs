use std::fmt;

use serde::Serialize;

use super::profile::DeviceProfile;
use super::topology::{FlowSpec, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop { node: NodeId },
    DuplicateLink { src: NodeId, dst: NodeId },
    NodeOutOfRange { node: NodeId },
    BadLinkRate { src: NodeId, dst: NodeId, rate: f64 },
    BadLossProbability { src: NodeId, dst: NodeId, loss_p: f64 },
    ProfileCount { expected: usize, found: usize },
    BadProfile { node: NodeId },
    ZeroCapabilityRelay { node: NodeId },
    SourceIsDestination { flow: usize },
    Unreachable { flow: usize, source: NodeId, dest: NodeId },
    BadUtility { flow: usize, reason: String },
    BadArrivals { flow: usize, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateLink { src, dst } => write!(f, "duplicate link {src}->{dst}"),
            Violation::NodeOutOfRange { node } => write!(f, "node {node} out of range"),
            Violation::BadLinkRate { src, dst, rate } => {
                write!(f, "link {src}->{dst} has invalid rate {rate}")
            }
            Violation::BadLossProbability { src, dst, loss_p } => {
                write!(f, "link {src}->{dst} has loss probability {loss_p} outside [0,1]")
            }
            Violation::ProfileCount { expected, found } => {
                write!(f, "expected {expected} device profiles, found {found}")
            }
            Violation::BadProfile { node } => write!(f, "device profile of node {node} is invalid"),
            Violation::ZeroCapabilityRelay { node } => {
                write!(f, "relay node {node} has zero effective capability")
            }
            Violation::SourceIsDestination { flow } => {
                write!(f, "flow {flow} has identical source and destination")
            }
            Violation::Unreachable { flow, source, dest } => {
                write!(f, "flow {flow}: destination {dest} unreachable from {source}")
            }
            Violation::BadUtility { flow, reason } => write!(f, "flow {flow}: utility {reason}"),
            Violation::BadArrivals { flow, reason } => write!(f, "flow {flow}: arrivals {reason}"),
        }
    }
}

/// Every violation found, in discovery order. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ValidationReport {}

pub fn validate_topology(topology: &Topology, profiles: &[DeviceProfile<f64>], flows: &[FlowSpec]) -> ValidationReport {
    let n = topology.n_nodes;
    let mut out = Vec::new();
    let in_range = |v: NodeId| v.0 < n;

    for (i, l) in topology.links.iter().enumerate() {
        for v in [l.src, l.dst] {
            if !in_range(v) {
                out.push(Violation::NodeOutOfRange { node: v });
            }
        }
        if l.src == l.dst {
            out.push(Violation::SelfLoop { node: l.src });
        }
        if topology.links[..i].iter().any(|p| p.src == l.src && p.dst == l.dst) {
            out.push(Violation::DuplicateLink { src: l.src, dst: l.dst });
        }
        if !(l.rate.is_finite() && l.rate >= 0.0) {
            out.push(Violation::BadLinkRate { src: l.src, dst: l.dst, rate: l.rate });
        }
        if !(0.0..=1.0).contains(&l.loss_p) {
            out.push(Violation::BadLossProbability { src: l.src, dst: l.dst, loss_p: l.loss_p });
        }
    }

    let profiles_ok = profiles.len() == n;
    if !profiles_ok {
        out.push(Violation::ProfileCount { expected: n, found: profiles.len() });
    } else {
        for (v, p) in profiles.iter().enumerate() {
            if !p.is_valid() {
                out.push(Violation::BadProfile { node: NodeId(v) });
            }
        }
    }

    let mut relay = vec![false; n];
    for (s, flow) in flows.iter().enumerate() {
        if !in_range(flow.source) || !in_range(flow.dest) {
            for v in [flow.source, flow.dest] {
                if !in_range(v) {
                    out.push(Violation::NodeOutOfRange { node: v });
                }
            }
            continue;
        }
        if flow.source == flow.dest {
            out.push(Violation::SourceIsDestination { flow: s });
        } else if !topology.reachable_from(flow.source)[flow.dest.0] {
            out.push(Violation::Unreachable { flow: s, source: flow.source, dest: flow.dest });
        } else {
            for li in topology.links_on_paths(flow.source, flow.dest) {
                relay[topology.links[li].dst.0] = true;
            }
        }
        if let Err(e) = flow.utility.check() {
            out.push(Violation::BadUtility { flow: s, reason: e.to_string() });
        }
        if let Some(a) = &flow.arrivals {
            if let Err(reason) = a.check() {
                out.push(Violation::BadArrivals { flow: s, reason });
            }
        }
    }

    if profiles_ok {
        for (v, &is_relay) in relay.iter().enumerate() {
            if is_relay && profiles[v].is_valid() && profiles[v].capability() <= 0.0 {
                out.push(Violation::ZeroCapabilityRelay { node: NodeId(v) });
            }
        }
    }
    ValidationReport { violations: out }
}
