use std::collections::BTreeSet;

use agenda_core::community::io::{write_partitions, write_stats};
use agenda_core::community::{hierarchical_l2, leiden_cpm, partition_stats, resolution_sweep};
use agenda_core::graph::io::{read_citer_table, read_edges, write_edges, write_id_list};
use agenda_core::graph::{self as g, CiterTable, GraphParams};

use super::{counts, load_store, summary, EDGES, PARTITIONS};
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliResult};

pub fn build_graph(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("build-graph", cfg)?;
    let store = load_store(&mut run, cfg)?;
    let citer_path = cfg.input(&cfg.paths.citers, "citers.jsonl");
    let citers = match &cfg.paths.citers {
        Some(_) => Some(run.open(&citer_path)?),
        None => run.open_optional(&citer_path)?,
    }
    .map(|r| read_citer_table(r).input())
    .transpose()?
    .unwrap_or_else(|| {
        log::warn!("no citer table; the co-citation layer will be empty");
        CiterTable::default()
    });
    let params = GraphParams {
        min_shared: cfg.graph.min_shared,
        hot_ref_cap: cfg.graph.hot_ref_cap,
        min_cociters: cfg.graph.min_cociters,
        citer_cap: cfg.graph.citer_cap,
    };
    let (graph, report) = g::build_graph(&store, &citers, &params).invariant()?;
    let degrees = graph.degrees();
    let connected: BTreeSet<&str> = graph
        .nodes()
        .ids()
        .iter()
        .zip(&degrees)
        .filter(|(_, &d)| d > 0)
        .map(|(id, _)| id.as_str())
        .collect();
    let orphans: Vec<&str> = store.ids().filter(|id| !connected.contains(id)).collect();
    log::info!(
        "build-graph: {} edges over {} papers, {} orphans",
        graph.edge_count(),
        connected.len(),
        orphans.len()
    );
    run.write(EDGES, |w| Ok(write_edges(w, &graph)?))?;
    run.write("orphans.txt", |w| {
        Ok(write_id_list(w, orphans.iter().copied())?)
    })?;
    run.write_json("graph_report.json", &report)?;
    run.commit(summary([
        ("edges", graph.edge_count().into()),
        ("connected", connected.len().into()),
        ("orphans", orphans.len().into()),
    ]))?;
    Ok(())
}

pub fn partition(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("partition", cfg)?;
    let graph = read_edges(run.open(&cfg.out(EDGES))?).input()?;
    let p = &cfg.partition;
    let l1 = leiden_cpm(&graph, p.gamma_l1, cfg.seed, p.max_passes).invariant()?;
    let l2 =
        hierarchical_l2(&graph, &l1, p.gamma_l2, p.split, cfg.seed, p.max_passes).invariant()?;
    l2.check_refines(&l1).invariant()?;
    let stats = vec![
        partition_stats(&graph, &l1, p.gamma_l1).invariant()?,
        partition_stats(&graph, &l2, p.gamma_l2).invariant()?,
    ];
    log::info!(
        "partition: {} L1 and {} L2 communities over {} papers",
        l1.n_communities(),
        l2.n_communities(),
        l1.len()
    );
    run.write(PARTITIONS, |w| Ok(write_partitions(w, &l1, &l2)?))?;
    run.write("partition_stats.json", |w| Ok(write_stats(w, &stats)?))?;
    run.commit(counts(
        [
            ("papers", l1.len()),
            ("l1", l1.n_communities()),
            ("l2", l2.n_communities()),
        ]
        .into(),
    ))?;
    Ok(())
}

pub fn sweep(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("sweep", cfg)?;
    let graph = read_edges(run.open(&cfg.out(EDGES))?).input()?;
    let p = &cfg.partition;
    let results = resolution_sweep(&graph, &p.sweep_gammas, cfg.seed, p.max_passes).invariant()?;
    let stats: Vec<_> = results.into_iter().map(|(_, s)| s).collect();
    run.write("sweep.json", |w| Ok(write_stats(w, &stats)?))?;
    run.commit(summary([("gammas", stats.len().into())]))?;
    Ok(())
}
