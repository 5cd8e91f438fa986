use std::fmt;

use microlp::ComparisonOp;

use super::activation::enumerate_activation_sets;
use super::lp::{maximize_concave, ConcaveOptimum, LpModel};
use super::static_opt::{throughput_model, ThroughputLp};
use super::OracleError;
use crate::dcc::DccTopology;
use crate::model::{Network, UtilitySpec};

/// Rate region whose membership is tested.
///
/// The DcC regions require, for every device `k` and relay `n`,
///
/// ```text
///   g_ks^k + sum_n g_kn^k >= A_k      (demand)
///   g_ns^k >= g_kn^k                  (relay coupling)
///   sum_k g_ks^k + sum_{n,k} g_ns^k <= 1 - eps   (cellular budget)
///   sum_{n,k} g_kn^k <= 1 - eps                  (local budget, unicast)
/// ```
///
/// In broadcast mode `g_kn^k = sum_{J ni k} f_{n,J}` and the local budget
/// applies to `sum f_{n,J}`. The static region time-shares activation sets
/// with `sum alpha <= 1 - eps` and intake `<= cap_j (1 - eps)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    DarsStatic(Network),
    DccUnicast { n_devices: usize },
    DccBroadcast(DccTopology),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Interior,
    Boundary,
    Exterior,
}

impl fmt::Display for RegionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionStatus::Interior => "interior",
            RegionStatus::Boundary => "boundary",
            RegionStatus::Exterior => "exterior",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub status: RegionStatus,
    /// Largest uniform budget slack `eps` keeping the rates feasible;
    /// `-inf` when no budget suffices.
    pub margin: f64,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, margin={}", self.status, self.margin)
    }
}

const BOUNDARY_TOL: f64 = 1e-9;

enum Demand<'a> {
    Fixed(&'a [f64]),
    Free,
}

struct DccLp {
    lp: LpModel,
    demand: Vec<usize>,
}

fn dcc_model(n: usize, hyperedges: Option<&[crate::dcc::Hyperedge]>, demand: Demand<'_>) -> DccLp {
    let mut lp = LpModel::default();
    let slack = match demand {
        Demand::Fixed(_) => Some(lp.var(1.0, -1e6, 1.0)),
        Demand::Free => None,
    };
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|r| (0..n).filter(move |&k| k != r).map(move |k| (r, k))).collect();
    let direct: Vec<usize> = (0..n).map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
    let relay: Vec<usize> = pairs.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
    let local: Vec<usize> = pairs.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
    let demand_vars: Vec<usize> = match demand {
        Demand::Free => (0..n).map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect(),
        Demand::Fixed(_) => Vec::new(),
    };

    for k in 0..n {
        let mut terms = vec![(direct[k], 1.0)];
        terms.extend(pairs.iter().zip(&local).filter(|((_, kk), _)| *kk == k).map(|(_, &v)| (v, 1.0)));
        match demand {
            Demand::Fixed(a) => lp.row(terms, ComparisonOp::Ge, a[k]),
            Demand::Free => {
                terms.push((demand_vars[k], -1.0));
                lp.row(terms, ComparisonOp::Ge, 0.0);
            }
        }
    }
    for i in 0..pairs.len() {
        lp.row(vec![(relay[i], 1.0), (local[i], -1.0)], ComparisonOp::Ge, 0.0);
    }
    let with_slack = |mut terms: Vec<(usize, f64)>| {
        terms.extend(slack.map(|e| (e, 1.0)));
        terms
    };
    let cellular: Vec<_> = direct.iter().chain(&relay).map(|&v| (v, 1.0)).collect();
    lp.row(with_slack(cellular), ComparisonOp::Le, 1.0);

    match hyperedges {
        None => {
            let budget: Vec<_> = local.iter().map(|&v| (v, 1.0)).collect();
            lp.row(with_slack(budget), ComparisonOp::Le, 1.0);
        }
        Some(edges) => {
            let f: Vec<usize> = edges.iter().map(|_| lp.var(0.0, 0.0, f64::INFINITY)).collect();
            for (i, &(r, k)) in pairs.iter().enumerate() {
                let mut terms = vec![(local[i], 1.0)];
                for (e, h) in edges.iter().enumerate() {
                    if h.sender == r && h.receivers.contains(&k) {
                        terms.push((f[e], -1.0));
                    }
                }
                lp.row(terms, ComparisonOp::Eq, 0.0);
            }
            let budget: Vec<_> = f.iter().map(|&v| (v, 1.0)).collect();
            lp.row(with_slack(budget), ComparisonOp::Le, 1.0);
        }
    }
    DccLp { lp, demand: demand_vars }
}

fn check_rates(spec: &RegionSpec, rates: &[f64]) -> Result<(), OracleError> {
    let expected = match spec {
        RegionSpec::DarsStatic(net) => net.flows().len(),
        RegionSpec::DccUnicast { n_devices } => *n_devices,
        RegionSpec::DccBroadcast(t) => t.n_devices,
    };
    if rates.len() != expected {
        return Err(OracleError::Invalid(format!("{} rates for {expected} demands", rates.len())));
    }
    if rates.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(OracleError::Invalid("rates must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Maximizes the uniform budget slack under which `rates` stay feasible.
pub fn region_membership(spec: &RegionSpec, rates: &[f64]) -> Result<Membership, OracleError> {
    check_rates(spec, rates)?;
    let solved = match spec {
        RegionSpec::DarsStatic(net) => {
            let sets = enumerate_activation_sets(net)?;
            let fixed: Vec<_> = rates.iter().copied().enumerate().collect();
            let ThroughputLp { lp, .. } = throughput_model(net, &sets, f64::INFINITY, &fixed, true);
            lp.maximize()
        }
        RegionSpec::DccUnicast { n_devices } => dcc_model(*n_devices, None, Demand::Fixed(rates)).lp.maximize(),
        RegionSpec::DccBroadcast(t) => dcc_model(t.n_devices, Some(&t.hyperedges), Demand::Fixed(rates)).lp.maximize(),
    };
    let margin = match solved {
        Ok((objective, _)) => objective,
        Err(OracleError::Solver(msg)) if msg.contains("infeasible") => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let status = if margin > BOUNDARY_TOL {
        RegionStatus::Interior
    } else if margin >= -BOUNDARY_TOL {
        RegionStatus::Boundary
    } else {
        RegionStatus::Exterior
    };
    Ok(Membership { status, margin })
}

/// Factor `c` putting `c * rates` on the region boundary. Every constraint
/// is homogeneous in (rates, budget), so `c = 1 / (1 - margin)`.
pub fn boundary_scale(spec: &RegionSpec, rates: &[f64]) -> Result<f64, OracleError> {
    let m = region_membership(spec, rates)?;
    if !(m.margin < 1.0 && m.margin.is_finite()) {
        return Err(OracleError::Invalid("zero or unsupportable rates have no boundary point".into()));
    }
    Ok(1.0 / (1.0 - m.margin))
}

/// Maximum of `sum_k U_k(A_k)` over the DcC region at full budget.
pub fn dcc_utility_optimum(
    spec: &RegionSpec,
    utilities: &[UtilitySpec<f64>],
    tolerance: f64,
) -> Result<ConcaveOptimum, OracleError> {
    let model = match spec {
        RegionSpec::DccUnicast { n_devices } => dcc_model(*n_devices, None, Demand::Free),
        RegionSpec::DccBroadcast(t) => dcc_model(t.n_devices, Some(&t.hyperedges), Demand::Free),
        RegionSpec::DarsStatic(_) => {
            return Err(OracleError::Invalid("use static_optimum for the static region".into()))
        }
    };
    if utilities.len() != model.demand.len() {
        return Err(OracleError::Invalid(format!("{} utilities for {} devices", utilities.len(), model.demand.len())));
    }
    maximize_concave(&model.lp, &model.demand, utilities, tolerance)
}
