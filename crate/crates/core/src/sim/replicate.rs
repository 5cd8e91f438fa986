use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::run_replication;
use super::trace::TraceDigest;
use super::{Metrics, SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Serial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub replication: u64,
    pub digest: TraceDigest,
    pub metrics: Metrics,
    /// `admitted - delivered - final backlog - lost` over the whole run.
    pub conservation_residual: i128,
}

/// Mean and sample standard deviation across replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pooled {
    pub mean_goodput: Vec<f64>,
    pub std_goodput: Vec<f64>,
    pub mean_total_goodput: f64,
    pub std_total_goodput: f64,
    pub mean_avg_backlog: f64,
    pub mean_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replications {
    pub runs: Vec<RunSummary>,
    pub pooled: Pooled,
}

pub(crate) fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(crate) fn pool(runs: &[RunSummary]) -> Pooled {
    let n_flows = runs[0].metrics.goodput.len();
    let per_flow: Vec<(f64, f64)> =
        (0..n_flows).map(|f| mean_std(runs.iter().map(move |r| r.metrics.goodput[f]))).collect();
    let (mean_total_goodput, std_total_goodput) = mean_std(runs.iter().map(|r| r.metrics.total_goodput));
    Pooled {
        mean_goodput: per_flow.iter().map(|p| p.0).collect(),
        std_goodput: per_flow.iter().map(|p| p.1).collect(),
        mean_total_goodput,
        std_total_goodput,
        mean_avg_backlog: mean_std(runs.iter().map(|r| r.metrics.avg_backlog)).0,
        mean_utility: mean_std(runs.iter().map(|r| r.metrics.utility)).0,
    }
}

fn summarize(config: &SimConfig, replication: u64) -> Result<RunSummary, SimError> {
    let (trace, metrics) = run_replication(config, replication)?;
    let conservation_residual = trace.total_admitted() as i128
        - trace.total_delivered() as i128
        - (trace.final_backlog() as i128 - trace.initial_backlog as i128)
        - trace.total_lost() as i128;
    Ok(RunSummary { replication, digest: trace.digest, metrics, conservation_residual })
}

/// Replication `r` draws from stream `r`; results are collected by index, so
/// the output does not depend on execution order.
pub fn run_replications(config: &SimConfig, n_reps: u64, execution: Execution) -> Result<Replications, SimError> {
    if n_reps == 0 {
        return Err(SimError::Invalid("at least one replication is required".into()));
    }
    let runs: Result<Vec<_>, _> = match execution {
        Execution::Parallel => (0..n_reps).into_par_iter().map(|r| summarize(config, r)).collect(),
        Execution::Serial => (0..n_reps).map(|r| summarize(config, r)).collect(),
    };
    let runs = runs?;
    let pooled = pool(&runs);
    Ok(Replications { runs, pooled })
}
