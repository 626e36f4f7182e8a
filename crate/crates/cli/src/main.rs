use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qedlab::experiments::{self, RunConfig};

#[derive(Parser)]
#[command(name = "qedlab", version, about = "Cavity QED experiments from declarative configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Default root for outputs, used as `<root>/<experiment>`.
        #[arg(long, env = "QEDLAB_OUTPUT_ROOT", default_value = "results")]
        output_root: PathBuf,
        /// Worker threads for point fan-out (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config and report sizes without computing anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the available experiments.
    ListExperiments,
}

fn load(path: &PathBuf, seed: Option<u64>) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::from_file(path)?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> anyhow::Result<serde_json::Value> {
    match cli.command {
        Command::Run { config, out, output_root, workers, seed } => {
            if let Some(n) = workers {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build_global()
                    .context("configuring the worker pool")?;
            }
            let cfg = load(&config, seed)?;
            let dir = experiments::output_dir(&cfg, out.as_deref(), &output_root);
            let report = experiments::run(&cfg, &dir)?;
            Ok(serde_json::json!({
                "status": "ok",
                "experiment": report.experiment,
                "output": report.output,
                "files": report.files,
            }))
        }
        Command::Validate { config, seed } => {
            let cfg = load(&config, seed)?;
            Ok(serde_json::to_value(experiments::validate(&cfg)?)?)
        }
        Command::ListExperiments => Ok(serde_json::to_value(experiments::list())?),
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<qedlab::Error>() {
        Some(qedlab::Error::Config(_)) => "config",
        Some(qedlab::Error::InvalidParameter { .. }) => "invalid-parameter",
        Some(qedlab::Error::Io(_)) => "io",
        Some(_) => "computation",
        None => "internal",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json value"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = error_kind(&e);
            let msg = serde_json::json!({ "status": "error", "kind": kind, "message": format!("{e:#}") });
            eprintln!("{msg}");
            ExitCode::from(if kind == "config" || kind == "invalid-parameter" { 2 } else { 1 })
        }
    }
}
