//! Runs resolved configs and writes results.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dars_core::dcc::{ArrivalMode, DccMode};
use dars_core::oracle::{
    dcc_utility_optimum, enumerate_activation_sets, region_membership, static_optimum, RegionSpec, StaticOptions,
};
use dars_core::sim::{run_dcc_replication, run_replication, run_replications, Execution, Metrics};

use crate::config::{Experiment, ExperimentConfig};
use crate::document::sweep_point;
use crate::error::CliError;

/// Fixed CSV column order.
pub const HEADER: [&str; 11] = [
    "config_digest",
    "policy",
    "sweep_param",
    "sweep_value",
    "rep",
    "trace_digest",
    "goodput_per_flow",
    "total_goodput",
    "avg_backlog",
    "utility",
    "losses",
];

/// One replication of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub config_digest: String,
    pub policy: String,
    pub sweep_param: String,
    pub sweep_value: String,
    /// Position of the sweep value in the value list.
    pub point: usize,
    pub rep: u64,
    pub trace_digest: u64,
    pub metrics: Metrics,
}

impl ResultRow {
    fn fields(&self) -> [String; 11] {
        let m = &self.metrics;
        [
            self.config_digest.clone(),
            self.policy.clone(),
            self.sweep_param.clone(),
            self.sweep_value.clone(),
            self.rep.to_string(),
            format!("{:016x}", self.trace_digest),
            m.goodput.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
            m.total_goodput.to_string(),
            m.avg_backlog.to_string(),
            m.utility.to_string(),
            m.losses.to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub traces: bool,
}

/// A sweep point label: `(param, value)` or empty for single runs.
type Label<'a> = Option<(&'a str, &'a toml::Value)>;

/// Runs every replication of one resolved config.
pub fn run_point(
    cfg: &ExperimentConfig,
    label: Label<'_>,
    point: usize,
    trace_dir: Option<&Path>,
) -> Result<Vec<ResultRow>, CliError> {
    let experiment = cfg.experiment().map_err(|message| CliError::Schema { path: "<resolved>".into(), message })?;
    let reps = cfg.reps();
    let base = ResultRow {
        config_digest: cfg.digest(),
        policy: cfg.policy.name.to_string(),
        sweep_param: label.map(|(p, _)| p.to_string()).unwrap_or_default(),
        sweep_value: label.map(|(_, v)| value_text(v)).unwrap_or_default(),
        point,
        rep: 0,
        trace_digest: 0,
        metrics: Metrics::zero(0),
    };
    let row = |rep: u64, trace_digest: u64, metrics: Metrics| ResultRow { rep, trace_digest, metrics, ..base.clone() };
    let trace_path = |dir: &Path, rep: u64| dir.join(format!("point{point:03}_rep{rep:03}.jsonl"));

    let mut rows = Vec::new();
    match (&experiment, trace_dir) {
        (Experiment::Dars(sim), None) => {
            for run in run_replications(sim, reps, Execution::Parallel)?.runs {
                rows.push(row(run.replication, run.digest, run.metrics));
            }
        }
        (Experiment::Dars(sim), Some(dir)) => {
            for rep in 0..reps {
                let (trace, metrics) = run_replication(sim, rep)?;
                write_with(&trace_path(dir, rep), |w| trace.write_jsonl(w))?;
                rows.push(row(rep, trace.digest, metrics));
            }
        }
        (Experiment::Dcc(sim), dir) => {
            for rep in 0..reps {
                let (trace, metrics) = run_dcc_replication(sim, rep)?;
                if let Some(dir) = dir {
                    write_with(&trace_path(dir, rep), |w| trace.write_jsonl(w))?;
                }
                rows.push(row(rep, trace.digest, metrics));
            }
        }
    }
    Ok(rows)
}

/// Sweep values print as plain TOML literals, strings unquoted.
fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.point, r.rep));
    let io = |e: csv::Error| CliError::Io { path: path.to_path_buf(), source: e.into() };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(io)?;
    w.write_record(HEADER).map_err(io)?;
    for r in sorted {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_resolved(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.toml", cfg.digest()));
    fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Single run of the resolved config; any `[sweep]` section is ignored.
pub fn run(cfg: &ExperimentConfig, out: &OutputOptions) -> Result<Vec<ResultRow>, CliError> {
    create_dir(&out.dir)?;
    fs::write(out.dir.join("resolved.toml"), cfg.to_toml()).map_err(|e| CliError::io(&out.dir, e))?;
    let trace_dir = out.dir.join("traces");
    if out.traces {
        create_dir(&trace_dir)?;
    }
    let rows = run_point(cfg, None, 0, out.traces.then_some(trace_dir.as_path()))?;
    write_csv(&out.dir.join("results.csv"), &rows)?;
    Ok(rows)
}

/// One run per `(value, rep)`; each point's resolved config is written
/// under `resolved/<digest>.toml`.
pub fn sweep(
    cfg: &ExperimentConfig,
    param: &str,
    values: &[toml::Value],
    out: &OutputOptions,
) -> Result<Vec<ResultRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::Schema { path: "sweep".into(), message: format!("sweep.values for `{param}` is empty") });
    }
    let points = values.iter().map(|v| sweep_point(cfg, param, v)).collect::<Result<Vec<_>, _>>()?;
    create_dir(&out.dir)?;
    fs::write(out.dir.join("resolved.toml"), cfg.to_toml()).map_err(|e| CliError::io(&out.dir, e))?;
    let resolved_dir = out.dir.join("resolved");
    create_dir(&resolved_dir)?;
    let trace_dir = out.dir.join("traces");
    if out.traces {
        create_dir(&trace_dir)?;
    }
    let mut rows = Vec::new();
    for (i, (point, value)) in points.iter().zip(values).enumerate() {
        write_resolved(&resolved_dir, point)?;
        rows.extend(run_point(point, Some((param, value)), i, out.traces.then_some(trace_dir.as_path()))?);
    }
    write_csv(&out.dir.join("results.csv"), &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleQuery {
    Static,
    Region,
    Activations,
}

fn list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Oracle values as `key=value` lines.
pub fn oracle(cfg: &ExperimentConfig, query: OracleQuery, rates: Option<&[f64]>) -> Result<String, CliError> {
    let schema = |message: String| CliError::Schema { path: "<resolved>".into(), message };
    let mut out = Vec::new();
    let is_dcc = cfg.dcc.is_some();
    match query {
        OracleQuery::Activations => {
            if is_dcc {
                return Err(schema("activation sets apply to [topology] configs".into()));
            }
            let sets = enumerate_activation_sets(&cfg.network().map_err(schema)?)?;
            out.push(format!("activation_sets={}", sets.len()));
            for s in &sets {
                let items: Vec<String> = s.iter().map(|a| format!("({},{},{})", a.src, a.dst, a.flow)).collect();
                out.push(format!("set={}", items.join(" ")));
            }
        }
        OracleQuery::Static if is_dcc => {
            let section = cfg.dcc.as_ref().expect("dcc section");
            let opt = dcc_utility_optimum(&region_spec(cfg).map_err(schema)?, &section.utilities, 1e-6)?;
            out.push(format!("rates={}", list(&opt.rates)));
            out.push(format!("utility={}", opt.utility));
            out.push(format!("upper_bound={}", opt.upper_bound));
        }
        OracleQuery::Static => {
            let opt = static_optimum(&cfg.network().map_err(schema)?, &StaticOptions::default())?;
            out.push(format!("rates={}", list(&opt.rates)));
            out.push(format!("utility={}", opt.utility));
            if let Some(g) = opt.grid_utility {
                out.push(format!("grid_utility={g}"));
            }
            out.push(format!("iterations={}", opt.iterations));
        }
        OracleQuery::Region => {
            let spec = region_spec(cfg).map_err(schema)?;
            let n = match &spec {
                RegionSpec::DarsStatic(net) => net.flows().len(),
                RegionSpec::DccUnicast { n_devices } => *n_devices,
                RegionSpec::DccBroadcast(t) => t.n_devices,
            };
            let rates = match rates {
                Some(r) => r.to_vec(),
                None => default_rates(cfg, n),
            };
            if rates.len() != n {
                return Err(CliError::Usage(format!("--rates needs {n} values, got {}", rates.len())));
            }
            let region = match spec {
                RegionSpec::DarsStatic(_) => "dars_static",
                RegionSpec::DccUnicast { .. } => "dcc_unicast",
                RegionSpec::DccBroadcast(_) => "dcc_broadcast",
            };
            out.push(format!("region={region}"));
            out.push(format!("rates={}", list(&rates)));
            out.push(format!("membership={}", region_membership(&spec, &rates)?));
        }
    }
    Ok(out.join("\n") + "\n")
}

/// Exogenous DcC configs test their own arrival means; everything else
/// tests the zero vector.
fn default_rates(cfg: &ExperimentConfig, n: usize) -> Vec<f64> {
    match &cfg.dcc {
        Some(d) if cfg.dcc_params().arrival_mode == ArrivalMode::Exogenous => {
            d.arrivals.iter().map(|a| a.mean).collect()
        }
        _ => vec![0.0; n],
    }
}

fn region_spec(cfg: &ExperimentConfig) -> Result<RegionSpec, String> {
    match &cfg.dcc {
        None => Ok(RegionSpec::DarsStatic(cfg.network()?)),
        Some(d) => match cfg.dcc_params().mode {
            DccMode::Unicast => Ok(RegionSpec::DccUnicast { n_devices: d.devices }),
            DccMode::Broadcast => Ok(RegionSpec::DccBroadcast(cfg.dcc_topology()?)),
        },
    }
}
