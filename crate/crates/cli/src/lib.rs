//! The `stochmls` command line: config resolution, subcommand dispatch and
//! run manifests.
//!
//! Exit codes: 0 on success, 1 for runtime failures (I/O, numerical
//! failures beyond the allowed budget), 2 for configuration errors. Errors
//! are printed to stderr as one JSON object.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::artifacts::ArtifactWriter;
use crate::config::{describe_schema, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Module(#[from] stochmls::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Module(stochmls::Error::Config(_)) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
            CliError::Io(_) | CliError::Module(stochmls::Error::Io(_) | stochmls::Error::Csv(_)) => "io",
            CliError::Module(e) => match e {
                stochmls::Error::Argument(_) => "argument",
                stochmls::Error::Domain(_) => "domain",
                stochmls::Error::Config(_) => "config",
                stochmls::Error::InsufficientData { .. } => "insufficient-data",
                stochmls::Error::IllConditioned { .. } => "ill-conditioned",
                stochmls::Error::Infeasible(_) => "infeasible",
                stochmls::Error::NoConvergence { .. } => "no-convergence",
                stochmls::Error::FailureBudget { .. } => "failure-budget",
                _ => "module",
            },
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": self.kind(), "exit_code": self.exit_code(), "message": self.message() })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stochmls",
    version,
    about = "Seeded MLS experiments: sampling, fitting, rates and manifold projection"
)]
pub struct Cli {
    /// TOML config, or the manifest.json of an earlier run to replay it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable. Applied after the config file and the
    /// STOCHMLS_* environment.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (key `output`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed (key `master_seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw an i.i.d. sample from the domain or a reference manifold.
    Sample {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// MLS values, λ_min and neighbor counts at probe points.
    Fit {
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        probes: Option<String>,
    },
    /// A differential operator applied to the MLS approximant.
    Eval {
        #[arg(long)]
        data: Option<String>,
        #[arg(long)]
        probes: Option<String>,
        #[arg(long)]
        operator: Option<String>,
    },
    /// Run a rate experiment and fit its log-log slope.
    Rates {
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Project points onto the manifold-MLS reconstruction.
    Mmls {
        #[arg(long)]
        manifold: Option<String>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Refit and replot the summary.csv of an earlier `rates` run.
    Report {
        #[arg(long)]
        input: Option<String>,
    },
    /// Rerun the neighbor-count and λ_min calibration.
    Calibrate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample { .. } => "sample",
            Command::Fit { .. } => "fit",
            Command::Eval { .. } => "eval",
            Command::Rates { .. } => "rates",
            Command::Mmls { .. } => "mmls",
            Command::Report { .. } => "report",
            Command::Calibrate => "calibrate",
        }
    }

    /// Subcommand flags as (key, value) overrides.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k, v));
            }
        };
        match self {
            Command::Sample { n, dim } => {
                push("sampling.n", n.map(|v| v.to_string()));
                push("geometry.dim", dim.map(|v| v.to_string()));
            }
            Command::Fit { data, probes } => {
                push("fit.data", data.clone());
                push("fit.probes", probes.clone());
            }
            Command::Eval { data, probes, operator } => {
                push("fit.data", data.clone());
                push("fit.probes", probes.clone());
                push("eval.operator", operator.clone());
            }
            Command::Rates { target, dim } => {
                push("lab.target", target.clone());
                push("geometry.dim", dim.map(|v| v.to_string()));
            }
            Command::Mmls { manifold, n } => {
                push("mmls.manifold", manifold.clone());
                push("mmls.n", n.map(|v| v.to_string()));
            }
            Command::Report { input } => push("report.input", input.clone()),
            Command::Calibrate => {}
        }
        o
    }
}

/// Defaults, then `--config`, then the environment, then `--set`, then the
/// dedicated flags.
pub fn resolve_config<I>(cli: &Cli, env: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.merge_file(path)?;
    }
    cfg.merge_env(env)?;
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    if let Some(out) = &cli.out {
        cfg.set("output", &out.to_string_lossy())?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("master_seed", &seed.to_string())?;
    }
    for (k, v) in cli.command.overrides() {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let mut out = ArtifactWriter::new(cfg.str("output"))?;
    let summary = match command {
        Command::Sample { .. } => commands::sample(cfg, &mut out)?,
        Command::Fit { .. } => commands::fit(cfg, &mut out)?,
        Command::Eval { .. } => commands::eval(cfg, &mut out)?,
        Command::Rates { .. } => commands::rates(cfg, &mut out)?,
        Command::Mmls { .. } => commands::mmls(cfg, &mut out)?,
        Command::Report { .. } => commands::report(cfg, &mut out)?,
        Command::Calibrate => commands::calibrate_fixture(&mut out)?,
    };
    out.finish(command.name(), cfg, summary)
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<A, T, E>(args: A, env: E) -> i32
where
    A: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    E: IntoIterator<Item = (String, String)>,
{
    let command =
        Cli::command().after_long_help(format!("Config keys (key, default, meaning):\n{}", describe_schema()));
    let cli = match command.try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = resolve_config(&cli, env).and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
