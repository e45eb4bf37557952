mod corpus;
mod graph;
mod neighbours;
mod report;
mod retrieve;
mod synth;

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;

use agenda_core::community::io::read_partitions;
use agenda_core::corpus::io::read_store;
use agenda_core::{CorpusStore, Level, Partition};

use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

pub use corpus::ingest;
pub use graph::{build_graph, partition, sweep};
pub use neighbours::{concordance, knn};
pub use report::report;
pub use retrieve::{bench, retrieve};
pub use synth::synth;

pub const STORE: &str = "store.jsonl";
pub const EDGES: &str = "edges.csv";
pub const PARTITIONS: &str = "partitions.tsv";
pub const NEIGHBORS: &str = "neighbors.jsonl";
pub const RUNS: &str = "runs.jsonl";

fn load_store(run: &mut Run, cfg: &PipelineConfig) -> CliResult<CorpusStore> {
    let path = cfg.out(STORE);
    let (store, rejected) = read_store(run.open(&path)?).input()?;
    if let Some(r) = rejected.first() {
        return Err(CliError::Input(anyhow!(
            "{}: {} malformed records, first at line {}: {}",
            path.display(),
            rejected.len(),
            r.line.unwrap_or(0),
            r.reason
        )));
    }
    Ok(store)
}

/// `(L1, L2)` from a partition TSV.
fn load_partitions(
    run: &mut Run,
    cfg: &PipelineConfig,
    path: &Path,
) -> CliResult<(Partition, Partition)> {
    let (a, b) = read_partitions(run.open(path)?).input()?;
    let p = &cfg.partition;
    Ok((
        Partition::new(Level::L1, p.gamma_l1, cfg.seed, a).input()?,
        Partition::new(Level::L2, p.gamma_l2, cfg.seed, b).input()?,
    ))
}

fn summary<K: Into<String>>(
    pairs: impl IntoIterator<Item = (K, serde_json::Value)>,
) -> serde_json::Value {
    serde_json::Value::Object(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
}

fn counts(pairs: BTreeMap<&str, usize>) -> serde_json::Value {
    summary(pairs.into_iter().map(|(k, v)| (k, v.into())))
}
