//! `sumlife`: structural summaries of RDF snapshots and lifelong vertex
//! classification from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sumlife_core::report::{cmd_diff, cmd_eval, cmd_lifelong, cmd_report, cmd_summarize, RunConfig, RunManifest, KEYS};

#[derive(Parser)]
#[command(
    name = "sumlife",
    version,
    about = "Structural summaries and lifelong vertex classification for RDF snapshots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize one snapshot into equivalence classes.
    Summarize(Common),
    /// Compare consecutive snapshots or summary directories.
    Diff(Common),
    /// Train incrementally over a snapshot sequence and evaluate every checkpoint.
    Lifelong(Common),
    /// Apply a checkpoint to snapshots.
    Eval(Common),
    /// Recompute lifelong measures and the heatmap from a result-matrix CSV.
    Report(Common),
    /// List configuration keys.
    Keys,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Configuration file of `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Snapshot file or summary directory; repeat in time order.
    #[arg(long = "in", short = 'i')]
    inputs: Vec<PathBuf>,
    /// Snapshot label; repeat once per input.
    #[arg(long = "timestamp")]
    timestamps: Vec<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "arch")]
    architecture: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    batch_cap: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `auto`, `none` or a vertex degree.
    #[arg(long)]
    degree_cap: Option<String>,
    /// `warm` or `cold`.
    #[arg(long)]
    restart: Option<String>,
    /// Checkpoint to test and retrain on the first snapshot.
    #[arg(long)]
    time_warp: Option<PathBuf>,
    /// Checkpoint applied by `eval`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Result-matrix CSV read by `report`.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Any configuration key, as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    /// Configuration file, then the seed environment override, then flags.
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_env()?;
        let paths = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        let mut flags: Vec<(&str, String)> = Vec::new();
        if !self.inputs.is_empty() {
            flags.push(("snapshots", paths(&self.inputs)));
        }
        if !self.timestamps.is_empty() {
            flags.push(("timestamps", self.timestamps.join(",")));
        }
        let opts = [
            ("model", &self.model),
            ("architecture", &self.architecture),
            ("iterations", &self.iterations),
            ("batch_cap", &self.batch_cap),
            ("seed", &self.seed),
            ("degree_cap", &self.degree_cap),
            ("restart", &self.restart),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                flags.push((k, v.clone()));
            }
        }
        for (k, v) in [
            ("time_warp", &self.time_warp),
            ("checkpoint", &self.checkpoint),
            ("results", &self.results),
        ] {
            if let Some(p) = v {
                flags.push((k, p.display().to_string()));
            }
        }
        for (k, v) in flags {
            cfg.set(k, &v).with_context(|| format!("--{}", k.replace('_', "-")))?;
        }
        for kv in &self.sets {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| sumlife_core::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        Ok(self
            .out
            .as_deref()
            .ok_or_else(|| sumlife_core::Error::Config("--out is required".into()))?)
    }
}

type Pipeline = fn(&RunConfig, &Path) -> sumlife_core::Result<RunManifest>;

fn run(cli: Cli) -> Result<()> {
    let (common, pipeline): (&Common, Pipeline) = match &cli.command {
        Command::Summarize(c) => (c, cmd_summarize),
        Command::Diff(c) => (c, cmd_diff),
        Command::Lifelong(c) => (c, cmd_lifelong),
        Command::Eval(c) => (c, cmd_eval),
        Command::Report(c) => (c, cmd_report),
        Command::Keys => {
            for (k, doc) in KEYS {
                println!("{k:<22} {doc}");
            }
            return Ok(());
        }
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(sumlife_core::Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = common.resolve()?;
    let out = common.out_dir()?;
    let manifest = pipeline(&cfg, out)?;
    for (name, digest) in &manifest.outputs {
        println!("{digest}  {}", out.join(name).display());
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    e.chain()
        .find_map(|c| c.downcast_ref::<sumlife_core::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
