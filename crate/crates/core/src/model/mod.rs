//! Immutable network description: topology, device profiles, flows,
//! utilities, arrival processes and seeded random streams.

mod arrivals;
mod network;
mod profile;
mod rng;
mod topology;
mod utility;
mod validate;

pub use arrivals::{sample_arrivals, ArrivalKind, ArrivalProcess};
pub use network::Network;
pub use profile::{effective_capability, DeviceProfile};
pub use rng::{RngStream, StreamPurpose};
pub use topology::{FlowSpec, Interference, Link, NodeId, Topology};
pub use utility::{utility_derivative, utility_value, UtilityError, UtilityKind, UtilitySpec};
pub use validate::{validate_topology, ValidationReport, Violation};
