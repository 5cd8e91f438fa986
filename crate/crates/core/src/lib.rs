//! Slotted-time simulation of device-aware routing and scheduling in
//! multi-hop D2D networks, with small-instance oracles.
//!
//! The numeric kernels (utilities, rate control, the device-centric virtual
//! queues) are generic over [`Scalar`]; `f64` aliases are provided below.

pub mod dcc;
pub mod model;
pub mod oracle;
pub mod policies;
pub mod queueing;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

pub type Utility = model::UtilitySpec<f64>;
pub type Profile = model::DeviceProfile<f64>;
pub type DccQueues = dcc::DccState<f64>;
pub type DccConfig = dcc::DccParams<f64>;
