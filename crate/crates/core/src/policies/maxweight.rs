//! Queue-differential max-weight link activation shared by DARS and
//! backpressure; the two differ only in the per-link multiplier.

use super::{Activation, LinkWeighting};
use crate::model::{Interference, Network};
use crate::queueing::QueueState;

/// Above this many links the exact search gives way to greedy insertion.
pub const EXACT_LINK_LIMIT: usize = 12;

/// A positive-weight candidate: the best flow on one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub activation: Activation,
    pub weight: f64,
}

/// Per-link best candidate under `weighting`. Links whose best weight is
/// nonpositive are dropped; equal weights go to the lowest flow id.
pub fn candidates(net: &Network, queues: &QueueState, weighting: LinkWeighting) -> Vec<Candidate> {
    let topo = net.topology();
    let caps = net.capabilities();
    let mut out: Vec<Candidate> = Vec::new();
    for (li, link) in topo.links.iter().enumerate() {
        let multiplier = match weighting {
            LinkWeighting::ReceiverCapability => caps[link.dst.0],
            LinkWeighting::LinkRate => link.rate,
        };
        let mut best: Option<Candidate> = None;
        for s in 0..net.flows().len() {
            if !net.usable(li, s) {
                continue;
            }
            let up = queues.get(link.src, s) as f64;
            let down = if net.flows()[s].dest == link.dst { 0.0 } else { queues.get(link.dst, s) as f64 };
            let w = multiplier * (up - down);
            if w > 0.0 && best.is_none_or(|b| w > b.weight) {
                best = Some(Candidate { activation: Activation::new(link, li, s), weight: w });
            }
        }
        out.extend(best);
    }
    out.sort_by_key(|c| c.activation.key());
    out
}

fn tolerance(scale: f64) -> f64 {
    1e-12 * scale.abs().max(1.0)
}

/// Exact maximum-weight feasible subset of `cands` (sorted by key).
/// Among maximal-weight sets the lexicographically smallest wins.
pub fn exact_max_weight(cands: &[Candidate], model: Interference, net: &Network) -> Vec<Activation> {
    struct Search<'a> {
        cands: &'a [Candidate],
        suffix: Vec<f64>,
        conflict: Vec<Vec<bool>>,
        best: Vec<usize>,
        best_weight: f64,
        current: Vec<usize>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, weight: f64) {
            if weight > self.best_weight + tolerance(self.best_weight) {
                self.best_weight = weight;
                self.best = self.current.clone();
            }
            if i == self.cands.len() || weight + self.suffix[i] <= self.best_weight + tolerance(self.best_weight) {
                return;
            }
            if self.current.iter().all(|&j| !self.conflict[i][j]) {
                self.current.push(i);
                self.run(i + 1, weight + self.cands[i].weight);
                self.current.pop();
            }
            self.run(i + 1, weight);
        }
    }

    let links = &net.topology().links;
    let n = cands.len();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + cands[i].weight;
    }
    let conflict = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    i != j && !model.compatible(&links[cands[i].activation.link], &links[cands[j].activation.link])
                })
                .collect()
        })
        .collect();
    let mut search = Search { cands, suffix, conflict, best: Vec::new(), best_weight: 0.0, current: Vec::new() };
    search.run(0, 0.0);
    search.best.iter().map(|&i| cands[i].activation).collect()
}

/// Descending-weight insertion with a feasibility check.
pub fn greedy_max_weight(cands: &[Candidate], model: Interference, net: &Network) -> Vec<Activation> {
    let links = &net.topology().links;
    let mut order: Vec<&Candidate> = cands.iter().collect();
    order.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.activation.key().cmp(&b.activation.key())));
    let mut chosen: Vec<Activation> = Vec::new();
    for c in order {
        let l = &links[c.activation.link];
        if chosen.iter().all(|a| model.compatible(l, &links[a.link])) {
            chosen.push(c.activation);
        }
    }
    chosen.sort_by_key(|a| a.key());
    chosen
}

pub fn max_weight_schedule(net: &Network, queues: &QueueState, weighting: LinkWeighting) -> Vec<Activation> {
    let cands = candidates(net, queues, weighting);
    let model = net.topology().interference;
    if net.topology().links.len() <= EXACT_LINK_LIMIT {
        exact_max_weight(&cands, model, net)
    } else {
        greedy_max_weight(&cands, model, net)
    }
}

/// Total weight of an activation set under `weighting`.
pub fn activation_weight(net: &Network, queues: &QueueState, weighting: LinkWeighting, set: &[Activation]) -> f64 {
    let caps = net.capabilities();
    set.iter()
        .map(|a| {
            let link = &net.topology().links[a.link];
            let multiplier = match weighting {
                LinkWeighting::ReceiverCapability => caps[link.dst.0],
                LinkWeighting::LinkRate => link.rate,
            };
            let down = if net.flows()[a.flow].dest == link.dst { 0.0 } else { queues.get(link.dst, a.flow) as f64 };
            multiplier * (queues.get(link.src, a.flow) as f64 - down)
        })
        .sum()
}
