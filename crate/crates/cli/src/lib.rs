//! Command-line front end: `run`, `sweep` and `oracle`.

pub mod config;
pub mod document;
pub mod error;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::document::{parse_literal, Document, Override};
use crate::error::CliError;
use crate::runner::{OracleQuery, OutputOptions};

#[derive(Debug, Parser)]
#[command(name = "dars", version, about = "Device-aware routing and scheduling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one config and write `results.csv`.
    Run(RunArgs),
    /// Run one config per sweep value.
    Sweep(SweepArgs),
    /// Print oracle values for a config.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// `key=value`, applied in order before resolution.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<Override>,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, env = "DARS_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
    /// Also write per-slot JSONL traces.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub output: Output,
    /// Dotted path; defaults to `sweep.param` from the config.
    #[arg(long)]
    pub param: Option<String>,
    /// Comma-separated values; defaults to `sweep.values` from the config.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleKind {
    Static,
    Region,
    Activations,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub kind: OracleKind,
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated rate vector for `region`.
    #[arg(long, value_delimiter = ',')]
    pub rates: Option<Vec<f64>>,
}

fn output(o: &Output) -> OutputOptions {
    OutputOptions { dir: o.out.clone(), traces: o.trace }
}

/// Executes a parsed command, returning the text for stdout.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Run(a) => {
            let cfg = Document::load(&a.common.config)?.resolve(&a.common.overrides)?;
            let out = output(&a.output);
            let rows = runner::run(&cfg, &out)?;
            Ok(format!(
                "config_digest={}\nrows={}\nresults={}\n",
                cfg.digest(),
                rows.len(),
                out.dir.join("results.csv").display()
            ))
        }
        Command::Sweep(a) => {
            let cfg = Document::load(&a.common.config)?.resolve(&a.common.overrides)?;
            let param = match (&a.param, &cfg.sweep) {
                (Some(p), _) => p.clone(),
                (None, Some(s)) => s.param.clone(),
                (None, None) => return Err(CliError::Usage("no --param and no [sweep] section".into())),
            };
            let values = match (&a.values, &cfg.sweep) {
                (Some(v), _) => v.iter().map(|s| parse_literal(s.trim())).collect(),
                (None, Some(s)) => s.values.clone(),
                (None, None) => return Err(CliError::Usage("no --values and no [sweep] section".into())),
            };
            let out = output(&a.output);
            let rows = runner::sweep(&cfg, &param, &values, &out)?;
            Ok(format!(
                "config_digest={}\nsweep_param={param}\npoints={}\nrows={}\nresults={}\n",
                cfg.digest(),
                values.len(),
                rows.len(),
                out.dir.join("results.csv").display()
            ))
        }
        Command::Oracle(a) => {
            let cfg = Document::load(&a.common.config)?.resolve(&a.common.overrides)?;
            let query = match a.kind {
                OracleKind::Static => OracleQuery::Static,
                OracleKind::Region => OracleQuery::Region,
                OracleKind::Activations => OracleQuery::Activations,
            };
            runner::oracle(&cfg, query, a.rates.as_deref())
        }
    }
}
