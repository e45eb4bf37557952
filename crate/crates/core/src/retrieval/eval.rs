use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AgendaQuery, RetrievalError, RetrievalRun};
use crate::community::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Top1 {
    Hit,
    Miss,
    /// The run was empty; scored as a miss.
    Empty,
}

impl Top1 {
    pub fn is_hit(self) -> bool {
        self == Top1::Hit
    }
}

/// Whether the rank-1 paper shares an L2 community with any representative.
pub fn eval_top1_l2(
    run: &RetrievalRun,
    query: &AgendaQuery,
    l2: &Partition,
) -> Result<Top1, RetrievalError> {
    if query.representative_ids.is_empty() {
        return Err(RetrievalError::NoRepresentatives(query.query_id.clone()));
    }
    let mut labels = Vec::with_capacity(query.representative_ids.len());
    for r in &query.representative_ids {
        labels.push(
            l2.get(r)
                .ok_or_else(|| RetrievalError::Unlabeled(r.clone()))?,
        );
    }
    let Some(top) = run.ranked.first() else {
        return Ok(Top1::Empty);
    };
    Ok(match l2.get(&top.id) {
        Some(c) if labels.contains(&c) => Top1::Hit,
        _ => Top1::Miss,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub retriever: String,
    pub domain: String,
    pub top1_l2_rate: f64,
    pub n_queries: usize,
    pub n_empty: usize,
}

/// Aggregates `(retriever, domain, outcome)` triples into one row per
/// retriever and domain plus an `all` row per retriever.
pub fn summarize<'a>(
    outcomes: impl IntoIterator<Item = (&'a str, &'a str, Top1)>,
) -> Vec<BenchmarkRow> {
    let mut acc: BTreeMap<(String, String), (usize, usize, usize)> = BTreeMap::new();
    for (ret, dom, o) in outcomes {
        for d in [dom, "all"] {
            let e = acc.entry((ret.to_owned(), d.to_owned())).or_default();
            e.0 += usize::from(o.is_hit());
            e.1 += 1;
            e.2 += usize::from(o == Top1::Empty);
        }
    }
    acc.into_iter()
        .map(|((retriever, domain), (hits, n, empty))| BenchmarkRow {
            retriever,
            domain,
            top1_l2_rate: hits as f64 / n as f64,
            n_queries: n,
            n_empty: empty,
        })
        .collect()
}
