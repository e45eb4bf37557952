use std::collections::{BTreeMap, HashMap};

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Serialize;

use agenda_core::boolquery::InvertedIndex;
use agenda_core::embeddings::load_vectors;
use agenda_core::retrieval::io::{read_queries, read_runs, write_benchmark_csv, write_runs};
use agenda_core::retrieval::{
    cosine_search, eval_top1_l2, graph_retrieve, internal_citation_rerank, rrf_fuse, summarize,
    AgendaQuery, Bm25Index, Bm25Params, CandidateReport, CitationIndex, GraphOptions, GraphOutcome,
    RetrievalRun, StubJudge, StubStrategist,
};
use agenda_core::{Domain, EmbeddingSet, IdTable};

use super::{counts, load_partitions, load_store, summary, PARTITIONS, RUNS};
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

#[derive(Serialize)]
struct CandidateLine<'a> {
    query_id: &'a str,
    candidates: &'a [CandidateReport],
}

struct Vectors {
    set: EmbeddingSet,
    queries: EmbeddingSet,
    pools: BTreeMap<Domain, IdTable>,
}

/// Runs every retriever for every query: BM25, BM25 candidates reranked by
/// internal citations, toy cosine (when vectors are present), RRF over those,
/// and the Boolean graph route with the stub strategist and judge.
pub fn retrieve(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("retrieve", cfg)?;
    let store = load_store(&mut run, cfg)?;
    let queries =
        read_queries(run.open(&cfg.input(&cfg.paths.queries, "queries.jsonl"))?).input()?;
    let vectors = load_query_vectors(&mut run, cfg, &store)?;
    let r = &cfg.retrieval;
    let bm25 = Bm25Index::build(&store, Bm25Params { k1: r.k1, b: r.b });
    let cites = CitationIndex::from_store(&store);
    let inverted = InvertedIndex::build(&store);
    let opts = GraphOptions {
        threshold: r.threshold,
        judge_sample: r.judge_sample,
        top_cut: r.top_cut,
        pool_before_cut: r.pool_before_cut,
    };
    let per_query = |q: &AgendaQuery| -> CliResult<(Vec<RetrievalRun>, Vec<CandidateReport>)> {
        let id = q.query_id.as_str();
        let text = bm25.search(id, &q.description, r.top_n, Some(q.domain));
        let cand = bm25.search(id, &q.description, r.bm25_candidates, Some(q.domain));
        let cand_ids: Vec<String> = cand.ids().map(str::to_owned).collect();
        let cite = internal_citation_rerank(id, &cand_ids, &cites);
        let mut runs = vec![text];
        if let Some(v) = &vectors {
            let qv = v
                .queries
                .get(id)
                .ok_or_else(|| CliError::Input(anyhow!("query {id} has no vector")))?;
            let empty = IdTable::default();
            let pool = v.pools.get(&q.domain).unwrap_or(&empty);
            runs.push(cosine_search(id, &v.set, qv, pool, r.top_n).input()?);
        }
        runs.push(cite);
        let refs: Vec<&RetrievalRun> = runs.iter().collect();
        let fused = rrf_fuse(&refs, r.rrf_k0, r.top_n).invariant()?;
        runs.push(fused);
        let g = graph_retrieve(
            q,
            &StubStrategist,
            &StubJudge(1.0),
            &inverted,
            &store,
            &cites,
            None,
            &opts,
        )
        .invariant()?;
        runs.push(match g.outcome {
            GraphOutcome::Ranked(run) => run,
            GraphOutcome::NoPassingCandidate => RetrievalRun::new(id, "graph", Vec::new()),
        });
        Ok((runs, g.candidates))
    };
    let results: Vec<_> = queries
        .par_iter()
        .map(per_query)
        .collect::<CliResult<_>>()?;
    let all_runs: Vec<RetrievalRun> = results.iter().flat_map(|r| r.0.iter().cloned()).collect();
    log::info!(
        "retrieve: {} queries, {} runs",
        queries.len(),
        all_runs.len()
    );
    run.write(RUNS, |w| Ok(write_runs(w, &all_runs)?))?;
    run.write("graph_candidates.jsonl", |w| {
        for (q, (_, c)) in queries.iter().zip(&results) {
            serde_json::to_writer(
                &mut *w,
                &CandidateLine {
                    query_id: &q.query_id,
                    candidates: c,
                },
            )?;
            std::io::Write::write_all(w, b"\n")?;
        }
        Ok(())
    })?;
    run.commit(counts(
        [("queries", queries.len()), ("runs", all_runs.len())].into(),
    ))?;
    Ok(())
}

fn load_query_vectors(
    run: &mut Run,
    cfg: &PipelineConfig,
    store: &agenda_core::CorpusStore,
) -> CliResult<Option<Vectors>> {
    let vp = cfg.input(&cfg.paths.vectors, "vectors.jsonl");
    let qp = cfg.input(&cfg.paths.query_vectors, "query_vectors.jsonl");
    let configured = cfg.paths.query_vectors.is_some();
    if !configured && !(vp.exists() && qp.exists()) {
        log::warn!("no query vectors; skipping the cosine retriever");
        return Ok(None);
    }
    let model = &cfg.knn.model_name;
    let set = load_vectors(run.open(&vp)?, model, cfg.knn.dim).input()?;
    let queries = load_vectors(run.open(&qp)?, model, Some(set.dim())).input()?;
    let mut by_domain: BTreeMap<Domain, Vec<&str>> = BTreeMap::new();
    for rec in store.records() {
        if set.ids().contains(&rec.paper_id) {
            by_domain.entry(rec.domain).or_default().push(&rec.paper_id);
        }
    }
    let pools = by_domain
        .into_iter()
        .map(|(d, ids)| (d, IdTable::new(ids)))
        .collect();
    Ok(Some(Vectors {
        set,
        queries,
        pools,
    }))
}

/// Top-1 L2 hit rates per retriever and domain against the label partition.
pub fn bench(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("bench", cfg)?;
    let queries =
        read_queries(run.open(&cfg.input(&cfg.paths.queries, "queries.jsonl"))?).input()?;
    let runs = read_runs(run.open(&cfg.out(RUNS))?).input()?;
    let labels = cfg.input(&cfg.paths.labels, PARTITIONS);
    let (_, l2) = load_partitions(&mut run, cfg, &labels)?;
    let by_id: HashMap<&str, &AgendaQuery> =
        queries.iter().map(|q| (q.query_id.as_str(), q)).collect();
    let mut outcomes = Vec::with_capacity(runs.len());
    for r in &runs {
        let q = by_id
            .get(r.query_id.as_str())
            .ok_or_else(|| CliError::Input(anyhow!("run for unknown query {}", r.query_id)))?;
        outcomes.push((
            r.retriever.as_str(),
            q.domain.as_str(),
            eval_top1_l2(r, q, &l2).input()?,
        ));
    }
    let rows = summarize(outcomes);
    for row in rows.iter().filter(|r| r.domain == "all") {
        log::info!(
            "bench: {} top-1 L2 rate {:.3}",
            row.retriever,
            row.top1_l2_rate
        );
    }
    run.write("benchmark.csv", |w| Ok(write_benchmark_csv(w, &rows)?))?;
    run.commit(summary([
        ("rows", rows.len().into()),
        ("runs", runs.len().into()),
    ]))?;
    Ok(())
}
