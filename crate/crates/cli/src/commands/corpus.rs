use std::collections::BTreeSet;

use agenda_core::corpus::io::{read_records, write_merged, write_rejections, write_store};
use agenda_core::corpus::{filter_eligibility, ingest as ingest_records, Eligibility};

use super::{summary, STORE};
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

pub fn ingest(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("ingest", cfg)?;
    let c = &cfg.ingest;
    let rules = Eligibility::new(
        c.min_abstract_chars,
        c.min_year.unwrap_or(i32::MIN),
        c.allowed_types
            .as_ref()
            .map(|t| t.iter().cloned().collect::<BTreeSet<_>>()),
        &c.boilerplate,
    )
    .map_err(|e| CliError::Usage(e.into()))?;
    let path = cfg.input(&cfg.paths.corpus, "records.jsonl");
    let (records, mut rejected) = read_records(run.open(&path)?).input()?;
    let n_read = records.len();
    let outcome = ingest_records(records, c.merge_policy);
    rejected.extend(outcome.rejected);
    let (store, report) = filter_eligibility(&outcome.store, &rules);
    log::info!(
        "ingest: {n_read} records, {} merged, {} rejected, {} kept",
        outcome.merged.len(),
        rejected.len(),
        store.len()
    );
    run.write(STORE, |w| Ok(write_store(w, &store)?))?;
    run.write("merged.jsonl", |w| Ok(write_merged(w, &outcome.merged)?))?;
    run.write("rejected.jsonl", |w| Ok(write_rejections(w, &rejected)?))?;
    run.commit(summary([
        ("records_read", n_read.into()),
        ("merged", outcome.merged.len().into()),
        ("rejected", rejected.len().into()),
        ("kept", store.len().into()),
        ("filter", serde_json::to_value(&report).unwrap_or_default()),
    ]))?;
    Ok(())
}
