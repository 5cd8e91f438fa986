use crate::model::{Network, NodeId, RngStream, StreamPurpose};
use crate::policies::{check_feasible, Policy};
use crate::queueing::{realize_transfer, total_backlog, update_queue, Credit, LossMode, QueueState, TransferRequest};

use super::metrics::compute_metrics;
use super::trace::{Digester, SlotRecord, Trace};
use super::{Metrics, SimConfig, SimError, Window};

/// Mutable state of one replication.
pub struct Engine<'a> {
    net: &'a Network,
    policy: Policy,
    loss_mode: LossMode,
    queues: QueueState,
    admission: Vec<Credit>,
    link_credit: Vec<Credit>,
    receiver_credit: Vec<Credit>,
    loss_carry: Vec<f64>,
    losses: RngStream,
}

impl<'a> Engine<'a> {
    pub fn new(config: &'a SimConfig, replication: u64) -> Result<Self, SimError> {
        config.check()?;
        let net = &config.network;
        let policy = Policy::new(config.policy, config.params, net)?;
        let n_links = net.topology().links.len();
        Ok(Self {
            net,
            policy,
            loss_mode: config.loss_mode,
            queues: QueueState::new(net.n_nodes(), net.flows().len()),
            admission: vec![Credit::default(); net.flows().len()],
            link_credit: vec![Credit::default(); n_links],
            receiver_credit: vec![Credit::default(); net.n_nodes()],
            loss_carry: vec![0.0; n_links],
            losses: RngStream::for_purpose(config.seed, replication, StreamPurpose::Losses),
        })
    }

    pub fn queues(&self) -> &QueueState {
        &self.queues
    }

    /// Runs one slot through every phase.
    pub fn step(&mut self, slot: u64) -> Result<SlotRecord, SimError> {
        let net = self.net;
        let topo = net.topology();
        let flows = net.flows();
        let n_flows = flows.len();

        // Sources are saturated, so the arrival phase has nothing to draw.
        let decision = self.policy.decide(slot, net, &self.queues);
        check_feasible(topo, &decision.activations).map_err(|reason| SimError::Infeasible {
            slot,
            policy: self.policy.kind().to_string(),
            reason,
        })?;
        let admitted: Vec<u64> =
            decision.admitted.iter().zip(&mut self.admission).map(|(&x, credit)| credit.grant(x)).collect();

        let mut order: Vec<usize> = (0..decision.activations.len()).collect();
        order.sort_by_key(|&i| decision.activations[i].key());

        let cell = |node: NodeId, flow: usize| node.index() * n_flows + flow;
        let mut out = vec![0u64; net.n_nodes() * n_flows];
        let mut inflow = vec![0u64; net.n_nodes() * n_flows];
        let mut delivered = vec![0u64; n_flows];
        let mut lost = vec![0u64; n_flows];
        let mut receiver_left: Vec<Option<u64>> = vec![None; net.n_nodes()];
        for i in order {
            let a = decision.activations[i];
            let link = &topo.links[a.link];
            let j = a.dst.index();
            let caps = net.capabilities();
            let credit = &mut self.receiver_credit[j];
            let allowance = receiver_left[j].get_or_insert_with(|| credit.grant(caps[j]));
            let req = TransferRequest {
                scheduled: decision.scheduled[i],
                link_allowance: self.link_credit[a.link].grant(link.rate),
                receiver_allowance: *allowance,
                backlog: self.queues.get(a.src, a.flow) - out[cell(a.src, a.flow)],
                loss_p: link.loss_p,
            };
            let o = realize_transfer(&req, self.loss_mode, &mut self.losses, &mut self.loss_carry[a.link]);
            *allowance -= o.sent;
            out[cell(a.src, a.flow)] += o.sent;
            lost[a.flow] += o.lost();
            if a.dst == flows[a.flow].dest {
                delivered[a.flow] += o.delivered;
            } else {
                inflow[cell(a.dst, a.flow)] += o.delivered;
            }
        }

        for node in 0..net.n_nodes() {
            let node = NodeId(node);
            for (s, f) in flows.iter().enumerate() {
                if node == f.dest {
                    continue;
                }
                let injected = if node == f.source { admitted[s] } else { 0 };
                let u = self.queues.get(node, s);
                self.queues.set(node, s, update_queue(u, out[cell(node, s)], inflow[cell(node, s)], injected));
            }
        }

        Ok(SlotRecord {
            slot,
            admitted,
            delivered,
            lost,
            backlog: total_backlog(&self.queues),
            activations: decision.activations.iter().map(|a| (a.src.index(), a.dst.index(), a.flow)).collect(),
        })
    }
}

/// Replication `replication` of `config`, drawing from its own streams.
pub fn run_replication(config: &SimConfig, replication: u64) -> Result<(Trace, Metrics), SimError> {
    let mut engine = Engine::new(config, replication)?;
    let mut records = Vec::with_capacity(config.slots as usize);
    let mut digest = Digester::default();
    for slot in 0..config.slots {
        let r = engine.step(slot)?;
        digest.absorb(|b| r.encode(b));
        records.push(r);
    }
    let trace = Trace {
        records,
        initial_backlog: 0,
        utilities: config.network.flows().iter().map(|f| f.utility).collect(),
        digest: digest.finish(),
    };
    let metrics = if trace.is_empty() {
        Metrics::zero(trace.n_flows())
    } else {
        compute_metrics(&trace, Window::new(config.warmup_slots(), config.slots))?
    };
    Ok((trace, metrics))
}

/// Replication 0.
pub fn run_simulation(config: &SimConfig) -> Result<(Trace, Metrics), SimError> {
    run_replication(config, 0)
}
