use std::collections::{BTreeMap, BTreeSet};

use anyhow::anyhow;

use agenda_core::concordance::{concordance_report, lexical_distinctiveness, write_report_csv};
use agenda_core::corpus::stratified_sample;
use agenda_core::embeddings::{
    load_vectors, read_neighbor_table, topk_neighbors, write_neighbor_table,
};
use agenda_core::graph::io::write_id_list;
use agenda_core::{CorpusStore, Domain, IdTable, NeighborTable};

use super::{load_partitions, load_store, summary, NEIGHBORS, PARTITIONS};
use crate::artifacts::Run;
use crate::config::PipelineConfig;
use crate::error::{Classify, CliError, CliResult};

/// Exact top-k neighbours over the labelled papers that have vectors,
/// optionally sampled per domain and searched within domain.
pub fn knn(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("knn", cfg)?;
    let store = load_store(&mut run, cfg)?;
    let labels = cfg.input(&cfg.paths.labels, PARTITIONS);
    let (l1, _) = load_partitions(&mut run, cfg, &labels)?;
    let vec_path = cfg.input(&cfg.paths.vectors, "vectors.jsonl");
    let set = load_vectors(run.open(&vec_path)?, &cfg.knn.model_name, cfg.knn.dim)
        .input()?
        .normalize()
        .input()?;
    let mut pool: BTreeSet<String> = l1
        .labels()
        .keys()
        .filter(|id| store.contains(id) && set.ids().contains(id))
        .cloned()
        .collect();
    if let Some(n) = cfg.knn.pool_per_domain {
        pool = stratified_sample(&store.subset(pool.iter().map(String::as_str)), n, cfg.seed)
            .input()?;
    }
    let groups: Vec<(String, IdTable)> = if cfg.knn.within_domain {
        by_domain(&store, pool.iter().map(String::as_str))
            .into_iter()
            .map(|(d, ids)| (d.to_string(), IdTable::new(ids)))
            .collect()
    } else {
        vec![("all".to_owned(), IdTable::new(pool.iter().cloned()))]
    };
    let mut tables = Vec::with_capacity(groups.len());
    for (name, ids) in &groups {
        log::info!("knn: {name}, {} papers, k = {}", ids.len(), cfg.knn.k);
        tables.push(
            topk_neighbors(&set, ids, cfg.knn.k)
                .map_err(|e| CliError::Input(anyhow!("{name}: {e}")))?,
        );
    }
    run.write(NEIGHBORS, |w| {
        for t in &tables {
            write_neighbor_table(&mut *w, t)?;
        }
        Ok(())
    })?;
    run.write("pool.txt", |w| {
        Ok(write_id_list(w, pool.iter().map(String::as_str))?)
    })?;
    run.commit(summary([
        ("pool", pool.len().into()),
        ("groups", groups.len().into()),
        ("model", set.model_name.clone().into()),
        ("dim", set.dim().into()),
    ]))?;
    Ok(())
}

fn by_domain<'a>(
    store: &CorpusStore,
    ids: impl Iterator<Item = &'a str>,
) -> BTreeMap<Domain, Vec<&'a str>> {
    let mut out: BTreeMap<Domain, Vec<&str>> = BTreeMap::new();
    for id in ids {
        if let Some(r) = store.get(id) {
            out.entry(r.domain).or_default().push(id);
        }
    }
    out
}

/// Splits a table whose rows never cross domains into one table per domain.
fn split_by_domain(
    t: &NeighborTable,
    store: &CorpusStore,
) -> CliResult<BTreeMap<Domain, NeighborTable>> {
    let ids = t.pool.ids().iter().map(String::as_str);
    if let Some(id) = t.pool.ids().iter().find(|id| !store.contains(id)) {
        return Err(CliError::Input(anyhow!(
            "neighbour table query {id} is not in the corpus"
        )));
    }
    let mut out = BTreeMap::new();
    for (d, members) in by_domain(store, ids) {
        let sub = IdTable::new(members.iter().copied());
        let mut rows = Vec::with_capacity(sub.len());
        for id in sub.ids() {
            let row = t.row(id).unwrap_or_default();
            let mapped = row
                .iter()
                .map(|&(j, c)| {
                    let nb = t.pool.id(j);
                    sub.index_of(nb).map(|k| (k, c)).ok_or_else(|| {
                        CliError::Input(anyhow!(
                            "neighbour {nb} of {id} lies outside {d}; rerun knn with knn.within_domain = true"
                        ))
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            rows.push(mapped);
        }
        let k_max = rows.iter().map(Vec::len).min().unwrap_or(0);
        out.insert(
            d,
            NeighborTable {
                k_max,
                pool: sub,
                rows,
            },
        );
    }
    Ok(out)
}

pub fn concordance(cfg: &PipelineConfig) -> CliResult<()> {
    let mut run = Run::new("concordance", cfg)?;
    let store = load_store(&mut run, cfg)?;
    let labels = cfg.input(&cfg.paths.labels, PARTITIONS);
    let (l1, l2) = load_partitions(&mut run, cfg, &labels)?;
    let table = read_neighbor_table(run.open(&cfg.out(NEIGHBORS))?).input()?;
    let model = &cfg.knn.model_name;
    let ks = &cfg.concordance.ks;
    let tables: Vec<(String, NeighborTable)> = if cfg.knn.within_domain {
        split_by_domain(&table, &store)?
            .into_iter()
            .map(|(d, t)| (d.to_string(), t))
            .collect()
    } else {
        vec![("all".to_owned(), table)]
    };
    let mut reports = Vec::new();
    for (domain, t) in &tables {
        for part in [&l1, &l2] {
            reports.push(concordance_report(model, domain, t, part, ks).input()?);
        }
    }
    let lexical = lexical_distinctiveness(&store, &l1, &l2).input()?;
    for r in &reports {
        if let (Some(c), Some(e)) = (r.cumulative_topk.get(&10), r.enrichment.get(&10)) {
            log::info!(
                "concordance: {} {:?} top-10 rate {c:.3}, enrichment {e:.2}",
                r.domain,
                r.level
            );
        }
    }
    run.write("concordance.csv", |w| Ok(write_report_csv(w, &reports)?))?;
    run.write_json("concordance.json", &reports)?;
    run.write_json("lexical.json", &lexical)?;
    run.commit(summary([
        ("reports", reports.len().into()),
        (
            "queries",
            tables.iter().map(|t| t.1.rows.len()).sum::<usize>().into(),
        ),
    ]))?;
    Ok(())
}
