use anyhow::{anyhow, Context};

use agenda_core::community::io::write_partitions;
use agenda_core::corpus::io::write_records;
use agenda_core::embeddings::write_vectors;
use agenda_core::graph::io::write_citer_table;
use agenda_core::retrieval::io::write_queries;
use agenda_core::synth::{generate, PlantedSpec, SynthError};

use super::{counts, PARTITIONS};
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

fn preset(name: &str, n: usize) -> CliResult<PlantedSpec> {
    Ok(match name {
        "strong" => PlantedSpec::strong(),
        "hierarchical_gap" => PlantedSpec::hierarchical_gap(),
        "dissociated" => PlantedSpec::dissociated(),
        "scale" => PlantedSpec::scale(n),
        other => return Err(CliError::Usage(anyhow!("unknown synth preset {other:?}"))),
    })
}

/// Writes a planted corpus in the pipeline's input formats, with its truth
/// partition as `truth.tsv`.
pub fn synth(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("synth", cfg)?;
    let spec = match &cfg.synth.spec {
        Some(path) => {
            let text = std::io::read_to_string(run.open(path)?).input()?;
            let parsed = if path.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(anyhow::Error::from)
            } else {
                toml::from_str(&text).map_err(anyhow::Error::from)
            };
            parsed
                .with_context(|| format!("parsing {}", path.display()))
                .input()?
        }
        None => PlantedSpec {
            seed: cfg.seed,
            ..preset(&cfg.synth.preset, cfg.synth.n)?
        },
    };
    let p = generate(&spec).map_err(|e| match e {
        SynthError::InvalidSpec(_) => CliError::Usage(e.into()),
        e => CliError::Invariant(e.into()),
    })?;
    run.write("records.jsonl", |w| Ok(write_records(w, &p.records)?))?;
    run.write("citers.jsonl", |w| Ok(write_citer_table(w, &p.citers)?))?;
    run.write("vectors.jsonl", |w| Ok(write_vectors(w, &p.embeddings)?))?;
    run.write("queries.jsonl", |w| Ok(write_queries(w, &p.queries)?))?;
    run.write("query_vectors.jsonl", |w| {
        Ok(write_vectors(w, &p.query_vectors)?)
    })?;
    run.write(&format!("truth_{PARTITIONS}"), |w| {
        Ok(write_partitions(w, &p.truth.l1, &p.truth.l2)?)
    })?;
    run.write_json("spec.json", &spec)?;
    run.commit(counts(
        [
            ("records", p.records.len()),
            ("papers", p.store.len()),
            ("citers", p.citers.len()),
            ("queries", p.queries.len()),
            ("l1", spec.n_l1),
            ("l2", spec.n_l2()),
        ]
        .into(),
    ))?;
    Ok(())
}
