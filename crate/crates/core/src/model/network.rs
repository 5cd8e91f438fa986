use super::profile::DeviceProfile;
use super::topology::{FlowSpec, Topology};
use super::validate::{validate_topology, ValidationReport};

/// A topology, its device profiles and its flows, checked by
/// [`validate_topology`]. Everything downstream takes a `Network`, so an
/// invalid description never reaches a policy or the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    profiles: Vec<DeviceProfile<f64>>,
    flows: Vec<FlowSpec>,
    capability: Vec<f64>,
    usable: Vec<Vec<bool>>,
}

impl Network {
    pub fn new(
        topology: Topology,
        profiles: Vec<DeviceProfile<f64>>,
        flows: Vec<FlowSpec>,
    ) -> Result<Self, ValidationReport> {
        let report = validate_topology(&topology, &profiles, &flows);
        if !report.is_ok() {
            return Err(report);
        }
        let capability = profiles.iter().map(|p| p.capability()).collect();
        let usable = flows
            .iter()
            .map(|f| {
                let mut on_path = vec![false; topology.links.len()];
                for l in topology.links_on_paths(f.source, f.dest) {
                    on_path[l] = true;
                }
                on_path
            })
            .collect();
        Ok(Self { topology, profiles, flows, capability, usable })
    }

    /// Unit profiles on every node.
    pub fn with_unit_profiles(topology: Topology, flows: Vec<FlowSpec>) -> Result<Self, ValidationReport> {
        let n = topology.n_nodes;
        Self::new(topology, vec![DeviceProfile::default(); n], flows)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn profiles(&self) -> &[DeviceProfile<f64>] {
        &self.profiles
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    pub fn n_nodes(&self) -> usize {
        self.topology.n_nodes
    }

    /// Effective capability `min{R_P, R_E, R_W}` of every node.
    pub fn capabilities(&self) -> &[f64] {
        &self.capability
    }

    pub fn max_capability(&self) -> f64 {
        self.capability.iter().copied().fold(0.0, f64::max)
    }

    /// Whether flow `flow` may be carried on link `link`: the link lies on
    /// some directed path from the flow's source to its destination.
    pub fn usable(&self, link: usize, flow: usize) -> bool {
        self.usable[flow][link]
    }
}
