//! Experiment file schema, default resolution and conversion into
//! simulator inputs.

use std::fmt;

use dars_core::dcc::{ArrivalMode, DccMode, DccParams, DccTopology, Hyperedge};
use dars_core::model::{ArrivalProcess, DeviceProfile, FlowSpec, Interference, Link, Network, Topology, UtilitySpec};
use dars_core::policies::{DarsParams, PolicyKind};
use dars_core::queueing::LossMode;
use dars_core::sim::{DccSimConfig, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<FlowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dcc: Option<DccSection>,
    pub policy: PolicySection,
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub nodes: usize,
    #[serde(default)]
    pub interference: Interference,
    /// One entry per node; empty means unit profiles everywhere.
    #[serde(default)]
    pub profiles: Vec<ProfileEntry>,
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    #[serde(default = "one")]
    pub r_compute: f64,
    #[serde(default = "one")]
    pub r_energy: f64,
    #[serde(default = "one")]
    pub r_incentive: f64,
}

impl Default for ProfileEntry {
    fn default() -> Self {
        Self { r_compute: 1.0, r_energy: 1.0, r_incentive: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub src: usize,
    pub dst: usize,
    #[serde(default = "one")]
    pub rate: f64,
    #[serde(default)]
    pub loss_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub source: usize,
    pub dest: usize,
    #[serde(default)]
    pub utility: UtilitySpec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DccSection {
    pub devices: usize,
    /// Broadcast hyperarcs; omitted means every nonempty receiver subset.
    /// Dropped in unicast mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperedges: Option<Vec<HyperedgeEntry>>,
    /// One process per device, exogenous mode only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arrivals: Vec<ArrivalProcess>,
    /// One utility per device; empty means `log1p` with unit weight.
    #[serde(default)]
    pub utilities: Vec<UtilitySpec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperedgeEntry {
    pub sender: usize,
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Dars,
    Backpressure,
    EqualSplit,
    ReceiveForward,
    Dcc,
}

impl PolicyName {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::Dars => "dars",
            PolicyName::Backpressure => "backpressure",
            PolicyName::EqualSplit => "equal_split",
            PolicyName::ReceiveForward => "receive_forward",
            PolicyName::Dcc => "dcc",
        }
    }

    fn kind(self) -> Option<PolicyKind> {
        match self {
            PolicyName::Dars => Some(PolicyKind::Dars),
            PolicyName::Backpressure => Some(PolicyKind::Backpressure),
            PolicyName::EqualSplit => Some(PolicyKind::EqualSplit),
            PolicyName::ReceiveForward => Some(PolicyKind::ReceiveForward),
            PolicyName::Dcc => None,
        }
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Policy name plus its parameters. `m` is shared; the others belong to
/// one family and are rejected for the other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub name: PolicyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_k_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<DccMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_mode: Option<ArrivalMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub slots: u64,
    /// Omitted means `slots / 10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_rep")]
    pub reps: u64,
    #[serde(default)]
    pub loss_mode: LossMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path into the resolved config; `*` matches every array entry.
    pub param: String,
    pub values: Vec<toml::Value>,
}

fn one() -> f64 {
    1.0
}

fn one_rep() -> u64 {
    1
}

/// Ready-to-run experiment.
#[derive(Debug, Clone)]
pub enum Experiment {
    Dars(SimConfig),
    Dcc(DccSimConfig),
}

impl ExperimentConfig {
    /// Fills every default so the serialized form is fully explicit, and
    /// rejects combinations the schema alone cannot express.
    pub fn resolve(mut self) -> Result<Self, String> {
        let dcc = self.policy.name == PolicyName::Dcc;
        let p = &mut self.policy;
        let foreign: &[(&str, bool)] = if dcc {
            &[("r_max", p.r_max.is_some()), ("f_max", p.f_max.is_some())]
        } else {
            &[
                ("beta", p.beta.is_some()),
                ("r_k_max", p.r_k_max.is_some()),
                ("mode", p.mode.is_some()),
                ("arrival_mode", p.arrival_mode.is_some()),
            ]
        };
        if let Some((key, _)) = foreign.iter().find(|(_, set)| *set) {
            return Err(format!("policy.{key} does not apply to policy `{}`", p.name));
        }
        if dcc {
            let d = DccParams::<f64>::default();
            p.m.get_or_insert(d.m);
            p.beta.get_or_insert(d.beta);
            p.r_k_max.get_or_insert(d.r_k_max);
            p.mode.get_or_insert(d.mode);
            p.arrival_mode.get_or_insert(d.arrival_mode);
        } else {
            let d = DarsParams::default();
            p.m.get_or_insert(d.m);
            p.r_max.get_or_insert(d.r_max);
            p.f_max.get_or_insert(d.f_max);
        }

        if dcc {
            if self.topology.is_some() || !self.flows.is_empty() {
                return Err("policy `dcc` takes a [dcc] section, not [topology] or [[flows]]".into());
            }
            let mode = self.policy.mode.unwrap_or_default();
            let arrival_mode = self.policy.arrival_mode.unwrap_or_default();
            let section = self.dcc.as_mut().ok_or("policy `dcc` requires a [dcc] section")?;
            let n = section.devices;
            if section.utilities.is_empty() {
                section.utilities = vec![UtilitySpec::log1p(1.0); n];
            }
            if mode == DccMode::Broadcast && section.hyperedges.is_none() {
                let t = DccTopology::all_subsets(n).map_err(|e| format!("dcc.hyperedges: {e}"))?;
                section.hyperedges = Some(
                    t.hyperedges
                        .into_iter()
                        .map(|h| HyperedgeEntry { sender: h.sender, receivers: h.receivers })
                        .collect(),
                );
            }
            if mode == DccMode::Unicast {
                // Unicast uses every ordered pair; hyperarcs are ignored.
                section.hyperedges = None;
            }
            match arrival_mode {
                ArrivalMode::Exogenous if section.arrivals.len() != n => {
                    return Err(format!(
                        "dcc.arrivals needs {n} entries in exogenous mode, got {}",
                        section.arrivals.len()
                    ))
                }
                ArrivalMode::FlowControl if !section.arrivals.is_empty() => {
                    return Err("dcc.arrivals must be empty when policy.arrival_mode = \"flow_control\"".into())
                }
                _ => {}
            }
        } else {
            if self.dcc.is_some() {
                return Err(format!("[dcc] does not apply to policy `{}`", self.policy.name));
            }
            let topo = self.topology.as_mut().ok_or("missing [topology] section")?;
            if topo.profiles.is_empty() {
                topo.profiles = vec![ProfileEntry::default(); topo.nodes];
            }
            if self.flows.is_empty() {
                return Err("at least one [[flows]] entry is required".into());
            }
        }

        self.sim.warmup.get_or_insert(self.sim.slots / 10);
        if self.sim.reps == 0 {
            return Err("sim.reps must be at least 1".into());
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(format!("sweep.values for `{}` is empty", s.param));
            }
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 8 bytes of SHA-256 over the resolved TOML, as hex.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn reps(&self) -> u64 {
        self.sim.reps
    }

    /// Network of a DARS-family config.
    pub fn network(&self) -> Result<Network, String> {
        let topo = self.topology.as_ref().ok_or("missing [topology] section")?;
        let links = topo.links.iter().map(|l| Link::new(l.src, l.dst, l.rate, l.loss_p)).collect();
        let topology = Topology::new(topo.nodes, links).with_interference(topo.interference);
        let profiles =
            topo.profiles.iter().map(|p| DeviceProfile::new(p.r_compute, p.r_energy, p.r_incentive)).collect();
        let flows = self.flows.iter().map(|f| FlowSpec::new(f.source, f.dest).with_utility(f.utility)).collect();
        Network::new(topology, profiles, flows).map_err(|r| r.to_string())
    }

    pub fn dcc_topology(&self) -> Result<DccTopology, String> {
        let section = self.dcc.as_ref().ok_or("missing [dcc] section")?;
        match &section.hyperedges {
            None => Ok(DccTopology::singletons(section.devices)),
            Some(h) => {
                let edges = h.iter().map(|e| Hyperedge { sender: e.sender, receivers: e.receivers.clone() }).collect();
                DccTopology::with_hyperedges(section.devices, edges).map_err(|e| format!("dcc.hyperedges: {e}"))
            }
        }
    }

    pub fn dcc_params(&self) -> DccParams<f64> {
        let p = &self.policy;
        let d = DccParams::<f64>::default();
        DccParams {
            m: p.m.unwrap_or(d.m),
            beta: p.beta.unwrap_or(d.beta),
            r_k_max: p.r_k_max.unwrap_or(d.r_k_max),
            mode: p.mode.unwrap_or(d.mode),
            arrival_mode: p.arrival_mode.unwrap_or(d.arrival_mode),
        }
    }

    /// Converts a resolved config into simulator input.
    pub fn experiment(&self) -> Result<Experiment, String> {
        let s = &self.sim;
        match self.policy.name.kind() {
            Some(kind) => {
                let d = DarsParams::default();
                let params = DarsParams {
                    m: self.policy.m.unwrap_or(d.m),
                    r_max: self.policy.r_max.unwrap_or(d.r_max),
                    f_max: self.policy.f_max.unwrap_or(d.f_max),
                };
                let mut cfg = SimConfig::new(self.network()?, kind, s.slots, s.seed);
                cfg.params = params;
                cfg.warmup = s.warmup;
                cfg.loss_mode = s.loss_mode;
                cfg.check().map_err(|e| e.to_string())?;
                Ok(Experiment::Dars(cfg))
            }
            None => {
                let section = self.dcc.as_ref().ok_or("missing [dcc] section")?;
                let cfg = DccSimConfig {
                    topology: self.dcc_topology()?,
                    params: self.dcc_params(),
                    utilities: section.utilities.clone(),
                    arrivals: section.arrivals.clone(),
                    slots: s.slots,
                    warmup: s.warmup,
                    seed: s.seed,
                };
                cfg.check().map_err(|e| e.to_string())?;
                Ok(Experiment::Dcc(cfg))
            }
        }
    }
}
