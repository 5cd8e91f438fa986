use crate::model::Network;
use crate::policies::Activation;

use super::OracleError;

/// Largest `|links| * |flows|` accepted by the enumerators.
pub const MAX_ENUMERATION_SIZE: usize = 20;

/// Activations sorted by `(sender, receiver, flow)`.
pub type ActivationSet = Vec<Activation>;

/// Every maximal feasible activation set, using each link for at most one
/// flow and only for flows that can route over it.
pub fn enumerate_activation_sets(net: &Network) -> Result<Vec<ActivationSet>, OracleError> {
    let topo = net.topology();
    let (links, flows) = (topo.links.len(), net.flows().len());
    if links * flows > MAX_ENUMERATION_SIZE {
        return Err(OracleError::SizeLimit { links, flows, product: links * flows });
    }
    let mut items: Vec<Activation> = (0..links)
        .flat_map(|l| (0..flows).filter(move |&s| net.usable(l, s)).map(move |s| Activation::new(&topo.links[l], l, s)))
        .collect();
    items.sort_by_key(|a| a.key());
    let conflict = |a: &Activation, b: &Activation| {
        a.link == b.link || !topo.interference.compatible(&topo.links[a.link], &topo.links[b.link])
    };

    let mut out = Vec::new();
    let mut chosen = Vec::new();
    extend(&items, 0, &mut chosen, &conflict, &mut out);
    out.sort_by(|a: &ActivationSet, b| a.iter().map(|x| x.key()).cmp(b.iter().map(|x| x.key())));
    Ok(out)
}

fn extend(
    items: &[Activation],
    next: usize,
    chosen: &mut Vec<usize>,
    conflict: &impl Fn(&Activation, &Activation) -> bool,
    out: &mut Vec<ActivationSet>,
) {
    if next == items.len() {
        let fits = |i: usize| chosen.iter().all(|&c| !conflict(&items[c], &items[i]));
        let maximal = (0..items.len()).filter(|i| !chosen.contains(i)).all(|i| !fits(i));
        if maximal && !chosen.is_empty() {
            out.push(chosen.iter().map(|&i| items[i]).collect());
        }
        return;
    }
    if chosen.iter().all(|&c| !conflict(&items[c], &items[next])) {
        chosen.push(next);
        extend(items, next + 1, chosen, conflict, out);
        chosen.pop();
    }
    extend(items, next + 1, chosen, conflict, out);
}
