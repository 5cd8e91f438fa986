//! Small-instance ground truth for tests and reports: feasible activation
//! sets, the static time-sharing optimum, and membership in the DcC
//! stability regions. Nothing here is used by the policies.

mod activation;
mod lp;
mod region;
mod static_opt;

use thiserror::Error;

pub use activation::{enumerate_activation_sets, ActivationSet, MAX_ENUMERATION_SIZE};
pub use lp::ConcaveOptimum;
pub use region::{boundary_scale, dcc_utility_optimum, region_membership, Membership, RegionSpec, RegionStatus};
pub use static_opt::{static_optimum, static_optimum_grid, StaticOptimum, StaticOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large to enumerate: {links} links x {flows} flows = {product} > {limit}", limit = MAX_ENUMERATION_SIZE)]
    SizeLimit { links: usize, flows: usize, product: usize },
    #[error("linear program failed: {0}")]
    Solver(String),
    #[error("no convergence after {iterations} iterations (best utility {best}, bound gap {gap})")]
    NotConverged { best: f64, gap: f64, iterations: usize },
    #[error("invalid oracle input: {0}")]
    Invalid(String),
}
