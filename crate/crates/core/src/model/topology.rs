use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::arrivals::ArrivalProcess;
use super::utility::UtilitySpec;

/// Dense node index in `[0, n_nodes)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

/// Directed link with a per-slot rate (packets) and a loss probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub rate: f64,
    pub loss_p: f64,
}

impl Link {
    pub fn new(src: usize, dst: usize, rate: f64, loss_p: f64) -> Self {
        Self { src: NodeId(src), dst: NodeId(dst), rate, loss_p }
    }

    pub fn shares_node(&self, other: &Link) -> bool {
        self.src == other.src || self.src == other.dst || self.dst == other.src || self.dst == other.dst
    }
}

/// Which sets of simultaneous transmissions a slot may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interference {
    /// Half-duplex single radio: a node takes part in at most one
    /// transmission per slot, as sender or receiver.
    #[default]
    NodeExclusive,
    /// A node sends on at most one link and receives on at most one link
    /// per slot (separate transmit and receive interfaces).
    SendReceive,
}

impl Interference {
    /// Whether two links may be active in the same slot.
    pub fn compatible(self, a: &Link, b: &Link) -> bool {
        match self {
            Interference::NodeExclusive => !a.shares_node(b),
            Interference::SendReceive => a.src != b.src && a.dst != b.dst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub n_nodes: usize,
    pub links: Vec<Link>,
    #[serde(default)]
    pub interference: Interference,
}

impl Topology {
    pub fn new(n_nodes: usize, links: Vec<Link>) -> Self {
        Self { n_nodes, links, interference: Interference::NodeExclusive }
    }

    pub fn with_interference(mut self, interference: Interference) -> Self {
        self.interference = interference;
        self
    }

    /// Directed line `0 -> 1 -> ... -> n-1` with unit rates.
    pub fn line(n_nodes: usize) -> Self {
        let links = (0..n_nodes.saturating_sub(1)).map(|i| Link::new(i, i + 1, 1.0, 0.0)).collect();
        Self::new(n_nodes, links)
    }

    /// Diamond `0 -> {1, 2} -> 3` with unit rates.
    pub fn diamond() -> Self {
        Self::new(
            4,
            vec![
                Link::new(0, 1, 1.0, 0.0),
                Link::new(0, 2, 1.0, 0.0),
                Link::new(1, 3, 1.0, 0.0),
                Link::new(2, 3, 1.0, 0.0),
            ],
        )
    }

    pub fn set_loss(&mut self, loss_p: f64) {
        for l in &mut self.links {
            l.loss_p = loss_p;
        }
    }

    pub fn link_index(&self, src: NodeId, dst: NodeId) -> Option<usize> {
        self.links.iter().position(|l| l.src == src && l.dst == dst)
    }

    pub fn out_links(&self, node: NodeId) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().enumerate().filter(move |(_, l)| l.src == node).map(|(i, _)| i)
    }

    pub fn max_rate(&self) -> f64 {
        self.links.iter().map(|l| l.rate).fold(0.0, f64::max)
    }

    /// Nodes reachable from `from` along directed links (including `from`).
    pub fn reachable_from(&self, from: NodeId) -> Vec<bool> {
        self.search(from, |l| (l.src, l.dst))
    }

    /// Nodes from which `to` is reachable (including `to`).
    pub fn reaching(&self, to: NodeId) -> Vec<bool> {
        self.search(to, |l| (l.dst, l.src))
    }

    fn search(&self, start: NodeId, dir: impl Fn(&Link) -> (NodeId, NodeId)) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes];
        if start.0 >= self.n_nodes {
            return seen;
        }
        seen[start.0] = true;
        let mut frontier = VecDeque::from([start]);
        while let Some(u) = frontier.pop_front() {
            for l in &self.links {
                let (a, b) = dir(l);
                if a == u && b.0 < self.n_nodes && !seen[b.0] {
                    seen[b.0] = true;
                    frontier.push_back(b);
                }
            }
        }
        seen
    }

    /// Links that lie on some directed path from `src` to `dst`.
    pub fn links_on_paths(&self, src: NodeId, dst: NodeId) -> Vec<usize> {
        let fwd = self.reachable_from(src);
        let back = self.reaching(dst);
        self.links
            .iter()
            .enumerate()
            .filter(|(_, l)| l.src.0 < self.n_nodes && l.dst.0 < self.n_nodes && fwd[l.src.0] && back[l.dst.0])
            .map(|(i, _)| i)
            .collect()
    }

    /// True when the links form the single directed chain
    /// `v0 -> v1 -> ... -> v_{n-1}` through every node.
    pub fn is_line(&self) -> bool {
        if self.n_nodes < 2 || self.links.len() != self.n_nodes - 1 {
            return false;
        }
        let mut indeg = vec![0usize; self.n_nodes];
        let mut outdeg = vec![0usize; self.n_nodes];
        for l in &self.links {
            if l.src.0 >= self.n_nodes || l.dst.0 >= self.n_nodes {
                return false;
            }
            outdeg[l.src.0] += 1;
            indeg[l.dst.0] += 1;
        }
        let heads: Vec<usize> = (0..self.n_nodes).filter(|&v| indeg[v] == 0).collect();
        if heads.len() != 1 || indeg.iter().any(|&d| d > 1) || outdeg.iter().any(|&d| d > 1) {
            return false;
        }
        self.reachable_from(NodeId(heads[0])).iter().all(|&r| r)
    }
}

/// A unicast flow `source -> dest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub source: NodeId,
    pub dest: NodeId,
    #[serde(default)]
    pub utility: UtilitySpec<f64>,
    /// Exogenous arrivals; only consumed by the device-centric model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<ArrivalProcess>,
}

impl FlowSpec {
    pub fn new(source: usize, dest: usize) -> Self {
        Self { source: NodeId(source), dest: NodeId(dest), utility: UtilitySpec::default(), arrivals: None }
    }

    pub fn with_utility(mut self, utility: UtilitySpec<f64>) -> Self {
        self.utility = utility;
        self
    }
}
