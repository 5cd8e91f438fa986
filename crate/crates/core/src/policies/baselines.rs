use super::{Activation, PolicyError, PolicyKind};
use crate::model::Network;
use crate::queueing::QueueState;

/// Usable first-hop links of every flow's source. Equal split needs at
/// least two per flow.
pub fn equal_split_next_hops(net: &Network) -> Result<Vec<Vec<usize>>, PolicyError> {
    net.flows()
        .iter()
        .enumerate()
        .map(|(s, f)| {
            let hops: Vec<usize> = net.topology().out_links(f.source).filter(|&l| net.usable(l, s)).collect();
            if hops.len() < 2 {
                Err(PolicyError::Unsupported {
                    policy: PolicyKind::EqualSplit,
                    reason: format!("flow {s} has a single path out of its source"),
                })
            } else {
                Ok(hops)
            }
        })
        .collect()
}

/// Largest-backlog usable flow at the sender of `link`, lowest id on ties.
fn busiest_flow(net: &Network, queues: &QueueState, link: usize) -> Option<usize> {
    let src = net.topology().links[link].src;
    (0..net.flows().len())
        .filter(|&s| net.usable(link, s))
        .max_by(|&a, &b| queues.get(src, a).cmp(&queues.get(src, b)).then(b.cmp(&a)))
}

/// Source links rotate round-robin with the slot index; relays with
/// backlog then forward on any link still compatible with the set.
pub fn equal_split_policy(slot: u64, net: &Network, queues: &QueueState) -> Vec<Activation> {
    let topo = net.topology();
    let hops = equal_split_next_hops(net).unwrap_or_default();
    let mut set: Vec<Activation> = Vec::new();
    let fits = |set: &[Activation], li: usize| {
        set.iter().all(|a| a.link != li && topo.interference.compatible(&topo.links[a.link], &topo.links[li]))
    };
    for (s, h) in hops.iter().enumerate() {
        let li = h[(slot % h.len() as u64) as usize];
        if fits(&set, li) {
            set.push(Activation::new(&topo.links[li], li, s));
        }
    }
    let sources: Vec<_> = net.flows().iter().map(|f| f.source).collect();
    let mut order: Vec<usize> = (0..topo.links.len()).collect();
    order.sort_by_key(|&l| (topo.links[l].src, topo.links[l].dst));
    for li in order {
        let link = &topo.links[li];
        if sources.contains(&link.src) || !fits(&set, li) {
            continue;
        }
        if let Some(s) = busiest_flow(net, queues, li) {
            if queues.get(link.src, s) > 0 {
                set.push(Activation::new(link, li, s));
            }
        }
    }
    set.sort_by_key(|a| a.key());
    set
}

/// Every link of the line, each carrying its sender's busiest flow.
pub fn receive_forward_policy(net: &Network, queues: &QueueState) -> Vec<Activation> {
    let topo = net.topology();
    let mut set: Vec<Activation> = (0..topo.links.len())
        .filter_map(|li| busiest_flow(net, queues, li).map(|s| Activation::new(&topo.links[li], li, s)))
        .collect();
    set.sort_by_key(|a| a.key());
    set
}
