//! The `agenda` pipeline: one subcommand per stage, TOML config with
//! `--set key=value` overrides, staged outputs and a manifest per run.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "agenda",
    version,
    about = "Citation-graph research-agenda measurement"
)]
pub struct Cli {
    /// TOML config file.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Config override, e.g. `partition.gamma_l2=0.02`. Repeatable; wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory (`paths.out_dir`).
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Only warnings and errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Parse, deduplicate and filter raw records into the corpus store.
    Ingest,
    /// Direct, coupling and co-citation layers merged into one edge list.
    BuildGraph,
    /// Leiden CPM at L1, then hierarchical L2 inside large L1 communities.
    Partition,
    /// Partition statistics across `partition.sweep_gammas`.
    Sweep,
    /// Exact cosine top-k neighbours over the labelled pool.
    Knn,
    /// Same-community rates, baselines, enrichment and lexical distinctiveness.
    Concordance,
    /// Run every retriever over the query file.
    Retrieve,
    /// Top-1 L2 hit rates of the retrieval runs.
    Bench,
    /// Generate a planted corpus.
    Synth,
    /// Plot-ready CSVs from earlier outputs.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::BuildGraph => "build-graph",
            Command::Partition => "partition",
            Command::Sweep => "sweep",
            Command::Knn => "knn",
            Command::Concordance => "concordance",
            Command::Retrieve => "retrieve",
            Command::Bench => "bench",
            Command::Synth => "synth",
            Command::Report => "report",
        }
    }
}

pub fn resolve_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let table = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(CliError::Input)?,
        None => toml::Table::new(),
    };
    let mut overrides = cli.set.clone();
    if let Some(o) = &cli.out {
        overrides.push(format!(
            "paths.out_dir={}",
            toml::Value::String(o.display().to_string())
        ));
    }
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(w) = cli.workers {
        overrides.push(format!("workers={w}"));
    }
    PipelineConfig::from_table(table, &overrides).map_err(CliError::Usage)
}

pub fn dispatch(command: Command, cfg: &PipelineConfig) -> CliResult<()> {
    use commands::*;
    match command {
        Command::Ingest => ingest(cfg),
        Command::BuildGraph => build_graph(cfg),
        Command::Partition => partition(cfg),
        Command::Sweep => sweep(cfg),
        Command::Knn => knn(cfg),
        Command::Concordance => concordance(cfg),
        Command::Retrieve => retrieve(cfg),
        Command::Bench => bench(cfg),
        Command::Synth => synth(cfg),
        Command::Report => report(cfg),
    }
}

/// Parses `args`, runs one subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let result = resolve_config(&cli).and_then(|cfg| {
        if let Some(n) = cfg.workers {
            if rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .is_err()
            {
                log::warn!("thread pool already initialised; --workers ignored");
            }
        }
        dispatch(cli.command, &cfg)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("agenda {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
