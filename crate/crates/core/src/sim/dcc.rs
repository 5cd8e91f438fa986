use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::dcc::{
    dcc_decide, dcc_flow_control, dcc_update_queues, ArrivalMode, DccDecision, DccError, DccParams, DccState,
    DccTopology,
};
use crate::model::{ArrivalProcess, RngStream, StreamPurpose, UtilitySpec};

use super::metrics::{check_window, growth_ratio, window_mean};
use super::trace::{Digester, TraceDigest};
use super::{check_horizon, Metrics, SimError, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct DccSimConfig {
    pub topology: DccTopology,
    pub params: DccParams<f64>,
    /// One utility per device.
    pub utilities: Vec<UtilitySpec<f64>>,
    /// One process per device; used in exogenous mode.
    pub arrivals: Vec<ArrivalProcess>,
    pub slots: u64,
    pub warmup: Option<u64>,
    pub seed: u64,
}

impl DccSimConfig {
    /// Bernoulli arrivals with the given means and log utilities.
    pub fn exogenous(topology: DccTopology, params: DccParams<f64>, means: &[f64], slots: u64, seed: u64) -> Self {
        let n = topology.n_devices;
        Self {
            topology,
            params: DccParams { arrival_mode: ArrivalMode::Exogenous, ..params },
            utilities: vec![UtilitySpec::log1p(1.0); n],
            arrivals: means.iter().map(|&m| ArrivalProcess::bernoulli(m)).collect(),
            slots,
            warmup: None,
            seed,
        }
    }

    pub fn flow_control(topology: DccTopology, params: DccParams<f64>, slots: u64, seed: u64) -> Self {
        let n = topology.n_devices;
        Self {
            topology,
            params: DccParams { arrival_mode: ArrivalMode::FlowControl, ..params },
            utilities: vec![UtilitySpec::log1p(1.0); n],
            arrivals: Vec::new(),
            slots,
            warmup: None,
            seed,
        }
    }

    pub fn warmup_slots(&self) -> u64 {
        self.warmup.unwrap_or(self.slots / 10)
    }

    pub fn check(&self) -> Result<(), SimError> {
        self.params.check()?;
        check_horizon(self.warmup_slots(), self.slots)?;
        let n = self.topology.n_devices;
        if self.utilities.len() != n {
            return Err(SimError::Invalid(format!("{} utilities for {n} devices", self.utilities.len())));
        }
        for u in &self.utilities {
            u.check().map_err(|e| SimError::Invalid(e.to_string()))?;
        }
        if self.params.arrival_mode == ArrivalMode::Exogenous {
            if self.arrivals.len() != n {
                return Err(SimError::Invalid(format!("{} arrival processes for {n} devices", self.arrivals.len())));
            }
            for a in &self.arrivals {
                a.check().map_err(SimError::Invalid)?;
            }
        }
        for h in &self.topology.hyperedges {
            if h.sender >= n || h.receivers.iter().any(|&k| k >= n || k == h.sender) || h.receivers.is_empty() {
                return Err(DccError::BadHyperedge(h.clone()).into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccRecord {
    pub slot: u64,
    /// `y_k(t)`.
    pub admitted: Vec<f64>,
    /// Service drained from each `lambda_k`.
    pub served: Vec<f64>,
    /// End-of-slot `sum lambda + sum eta + sum Q`.
    pub total: f64,
    /// End-of-slot `sum lambda`.
    pub lambda: f64,
    /// `sum_k U_k(y_k(t))`.
    pub utility: f64,
    pub decision: DccDecision,
}

impl DccRecord {
    fn encode(&self, out: &mut Vec<u8>) {
        use crate::dcc::{CellularDecision as C, LocalDecision as L};
        out.extend_from_slice(&self.slot.to_le_bytes());
        for v in self.admitted.iter().chain(&self.served).chain([&self.total, &self.lambda, &self.utility]) {
            out.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        let mut put = |v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
        match self.decision.cellular {
            C::Idle => put(0),
            C::Direct { device } => [1, device].into_iter().for_each(&mut put),
            C::Relay { relay, device } => [2, relay, device].into_iter().for_each(&mut put),
        }
        match &self.decision.local {
            L::Idle => put(0),
            L::Unicast { relay, device } => [1, *relay, *device].into_iter().for_each(&mut put),
            L::Broadcast { relay, receivers } => {
                [2, *relay, receivers.len()].into_iter().chain(receivers.iter().copied()).for_each(&mut put)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DccTrace {
    pub records: Vec<DccRecord>,
    pub digest: TraceDigest,
}

impl DccTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.total).collect()
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn metrics(&self, window: Window) -> Result<Metrics, SimError> {
        check_window(window, self.records.len() as u64)?;
        let part = &self.records[window.start as usize..window.end as usize];
        let n = part.len() as f64;
        let devices = part[0].admitted.len();
        let avg = |f: &dyn Fn(&DccRecord) -> f64| part.iter().map(f).sum::<f64>() / n;
        let goodput: Vec<f64> = (0..devices).map(|k| avg(&|r| r.served[k])).collect();
        Ok(Metrics {
            window,
            total_goodput: goodput.iter().sum(),
            goodput,
            admitted: (0..devices).map(|k| avg(&|r| r.admitted[k])).collect(),
            avg_backlog: avg(&|r| r.total),
            utility: avg(&|r| r.utility),
            delivered: 0,
            losses: 0,
        })
    }
}

pub fn run_dcc_replication(config: &DccSimConfig, replication: u64) -> Result<(DccTrace, Metrics), SimError> {
    config.check()?;
    let p = config.params;
    let n = config.topology.n_devices;
    let mut arrivals_rng = RngStream::for_purpose(config.seed, replication, StreamPurpose::Arrivals);
    let mut state = DccState::<f64>::new(n);
    let mut records = Vec::with_capacity(config.slots as usize);
    let mut digest = Digester::default();
    for slot in 0..config.slots {
        let y: Vec<f64> = match p.arrival_mode {
            ArrivalMode::Exogenous => {
                config.arrivals.iter().map(|a| a.sample(&mut arrivals_rng, slot) as f64).collect()
            }
            ArrivalMode::FlowControl => {
                (0..n).map(|k| dcc_flow_control(state.lambda[k], &p, &config.utilities[k])).collect()
            }
        };
        let decision = dcc_decide(&state, &config.topology, p.mode);
        let served = dcc_update_queues(&mut state, &decision, &y, p.beta);
        let utility = y.iter().zip(&config.utilities).map(|(&v, u)| u.value(v).unwrap_or(0.0)).sum();
        let lambda = state.lambda.iter().sum();
        let r = DccRecord { slot, admitted: y, served, total: state.total(), lambda, utility, decision };
        digest.absorb(|b| r.encode(b));
        records.push(r);
    }
    let trace = DccTrace { records, digest: digest.finish() };
    let metrics = if trace.records.is_empty() {
        Metrics::zero(n)
    } else {
        trace.metrics(Window::new(config.warmup_slots(), config.slots))?
    };
    Ok((trace, metrics))
}

pub fn run_dcc(config: &DccSimConfig) -> Result<(DccTrace, Metrics), SimError> {
    run_dcc_replication(config, 0)
}

/// Stability and utility summary of one DcC run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DccReport {
    /// `(1/T) sum_t total(t)` over the whole run.
    pub cesaro_total: f64,
    /// Average total over `[T/2, T)`.
    pub late_total: f64,
    /// `avg[T/2, T) / avg[T/4, T/2)`.
    pub growth_ratio: f64,
    /// Average of `sum_k U_k(y_k(t))` over `[W, T)`.
    pub utility: f64,
    pub metrics: Metrics,
    pub digest: TraceDigest,
}

pub fn dcc_run_check(config: &DccSimConfig) -> Result<DccReport, SimError> {
    if config.slots < 4 {
        return Err(SimError::Invalid("stability check needs at least 4 slots".into()));
    }
    let (trace, metrics) = run_dcc(config)?;
    let totals = trace.totals();
    let t = config.slots;
    Ok(DccReport {
        cesaro_total: window_mean(&totals, Window::new(0, t))?,
        late_total: window_mean(&totals, Window::new(t / 2, t))?,
        growth_ratio: growth_ratio(&totals)?,
        utility: metrics.utility,
        metrics,
        digest: trace.digest,
    })
}
