use microlp::ComparisonOp;

use super::activation::{enumerate_activation_sets, ActivationSet};
use super::lp::{maximize_concave, LpModel};
use super::OracleError;
use crate::model::{Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticOptions {
    /// Upper bound on every flow's rate.
    pub rate_cap: f64,
    /// Relative gap between the cutting-plane bounds at termination.
    pub tolerance: f64,
    /// Grid resolution of the cross-check, as a fraction of the first
    /// flow's capacity. Run for one or two flows only.
    pub grid_step: Option<f64>,
}

impl Default for StaticOptions {
    fn default() -> Self {
        Self { rate_cap: f64::INFINITY, tolerance: 1e-6, grid_step: Some(1e-3) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticOptimum {
    pub rates: Vec<f64>,
    pub utility: f64,
    /// Time share of each maximal activation set.
    pub schedule: Vec<(ActivationSet, f64)>,
    pub iterations: usize,
    /// Best utility found by the grid cross-check, when it ran.
    pub grid_utility: Option<f64>,
}

pub(crate) struct ThroughputLp {
    pub(crate) lp: LpModel,
    pub(crate) x: Vec<usize>,
    pub(crate) alpha: Vec<usize>,
}

/// Time-sharing LP over maximal activation sets; `fixed` pins some rates.
/// With `with_slack` the objective is a variable `eps` that shrinks every
/// budget to `1 - eps`.
pub(crate) fn throughput_model(
    net: &Network,
    sets: &[ActivationSet],
    rate_cap: f64,
    fixed: &[(usize, f64)],
    with_slack: bool,
) -> ThroughputLp {
    let topo = net.topology();
    let caps = net.capabilities();
    let n_flows = net.flows().len();
    let mut lp = LpModel::default();
    let slack = with_slack.then(|| lp.var(1.0, -1e6, 1.0));
    let alpha: Vec<usize> = sets.iter().map(|_| lp.var(0.0, 0.0, 1.0)).collect();
    let mut budget: Vec<_> = alpha.iter().map(|&a| (a, 1.0)).collect();
    budget.extend(slack.map(|e| (e, 1.0)));
    lp.row(budget, ComparisonOp::Le, 1.0);

    let x: Vec<usize> = (0..n_flows).map(|_| lp.var(0.0, 0.0, rate_cap)).collect();
    for &(s, v) in fixed {
        lp.row(vec![(x[s], 1.0)], ComparisonOp::Eq, v);
    }

    // f[l][s], only on links the flow can route over.
    let mut f = vec![vec![None; n_flows]; topo.links.len()];
    for (l, link) in topo.links.iter().enumerate() {
        let c = link.rate.min(caps[link.dst.index()]);
        for (s, slot) in f[l].iter_mut().enumerate() {
            if !net.usable(l, s) {
                continue;
            }
            let v = lp.var(0.0, 0.0, f64::INFINITY);
            *slot = Some(v);
            let mut terms = vec![(v, 1.0)];
            for (m, set) in sets.iter().enumerate() {
                if set.iter().any(|a| a.link == l && a.flow == s) {
                    terms.push((alpha[m], -c));
                }
            }
            lp.row(terms, ComparisonOp::Le, 0.0);
        }
    }

    for (s, flow) in net.flows().iter().enumerate() {
        for i in 0..net.n_nodes() {
            let node = NodeId(i);
            if node == flow.dest {
                continue;
            }
            let mut terms = Vec::new();
            for (l, link) in topo.links.iter().enumerate() {
                if let Some(v) = f[l][s] {
                    if link.src == node {
                        terms.push((v, 1.0));
                    }
                    if link.dst == node {
                        terms.push((v, -1.0));
                    }
                }
            }
            if node == flow.source {
                terms.push((x[s], -1.0));
            }
            if !terms.is_empty() {
                lp.row(terms, ComparisonOp::Eq, 0.0);
            }
        }
    }

    for (j, &cap) in caps.iter().enumerate() {
        let terms: Vec<_> = topo
            .links
            .iter()
            .enumerate()
            .filter(|(_, link)| link.dst.index() == j)
            .flat_map(|(l, _)| f[l].iter().flatten().map(|&v| (v, 1.0)))
            .collect();
        if !terms.is_empty() {
            let mut terms = terms;
            terms.extend(slack.map(|e| (e, cap)));
            lp.row(terms, ComparisonOp::Le, cap);
        }
    }
    ThroughputLp { lp, x, alpha }
}

/// Maximizes `sum_s g_s(x_s)` over rates supportable by time-sharing the
/// maximal activation sets, with per-activation rate `min(R_ij, cap_j)`,
/// flow conservation and the device intake caps.
pub fn static_optimum(net: &Network, options: &StaticOptions) -> Result<StaticOptimum, OracleError> {
    let sets = enumerate_activation_sets(net)?;
    let ThroughputLp { lp, x, alpha, .. } = throughput_model(net, &sets, options.rate_cap, &[], false);
    let utilities: Vec<_> = net.flows().iter().map(|f| f.utility).collect();
    let opt = maximize_concave(&lp, &x, &utilities, options.tolerance)?;
    let grid_utility = match options.grid_step {
        Some(step) if net.flows().len() <= 2 => Some(static_optimum_grid(net, options.rate_cap, step)?.1),
        _ => None,
    };
    Ok(StaticOptimum {
        rates: opt.rates,
        utility: opt.utility,
        schedule: sets.into_iter().zip(alpha.iter().map(|&a| opt.values[a])).collect(),
        iterations: opt.iterations,
        grid_utility,
    })
}

/// Grid search for one or two flows: the first flow's rate walks a grid on
/// `[0, capacity]` and the second takes its largest feasible rate.
pub fn static_optimum_grid(net: &Network, rate_cap: f64, step: f64) -> Result<(Vec<f64>, f64), OracleError> {
    let flows = net.flows();
    if flows.is_empty() || flows.len() > 2 {
        return Err(OracleError::Invalid(format!("grid search takes 1 or 2 flows, got {}", flows.len())));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(OracleError::Invalid(format!("grid step must lie in (0, 1], got {step}")));
    }
    let sets = enumerate_activation_sets(net)?;
    let max_rate = |s: usize, fixed: &[(usize, f64)]| -> Result<f64, OracleError> {
        let ThroughputLp { mut lp, x, .. } = throughput_model(net, &sets, rate_cap, fixed, false);
        lp.set_objective(x[s], 1.0);
        Ok(lp.maximize()?.0.max(0.0))
    };
    let g = |s: usize, v: f64| flows[s].utility.value(v).unwrap_or(f64::NEG_INFINITY);
    let cap0 = max_rate(0, &[])?;
    if flows.len() == 1 {
        return Ok((vec![cap0], g(0, cap0)));
    }
    let points = (1.0 / step).round() as usize;
    let mut best = (vec![0.0, 0.0], f64::NEG_INFINITY);
    for i in 0..=points {
        let x0 = cap0 * i as f64 / points as f64;
        let x1 = max_rate(1, &[(0, x0)])?;
        let u = g(0, x0) + g(1, x1);
        if u > best.1 {
            best = (vec![x0, x1], u);
        }
    }
    Ok(best)
}
