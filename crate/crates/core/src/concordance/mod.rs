//! Same-community rates of embedding neighbourhoods, chance baselines,
//! enrichment and lexical distinctiveness.

mod lexical;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{Level, Partition};
use crate::embeddings::NeighborTable;
use crate::numfmt::format_sig;

pub use lexical::{lexical_distinctiveness, L1Lexical, LexicalReport};

/// Rank cut-offs in the query-counts-as-rank-1 convention.
pub const DEFAULT_KS: [usize; 6] = [2, 5, 10, 25, 50, 100];

#[derive(Debug, Error)]
pub enum ConcordanceError {
    #[error("paper {0} has no community label")]
    Unlabeled(String),
    #[error("rank {k} is outside the table (k_max {k_max})")]
    RankOutOfRange { k: usize, k_max: usize },
    #[error("empty pool")]
    EmptyPool,
    #[error("baseline must be positive, got {0}")]
    ZeroBaseline(f64),
    #[error("neighbour table has no queries")]
    NoQueries,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    /// Share of queries whose k-th non-self neighbour is in their community.
    PerRank,
    /// Mean share of the k nearest non-self neighbours in the community.
    Cumulative,
}

fn labels_of(table: &NeighborTable, p: &Partition) -> Result<Vec<u32>, ConcordanceError> {
    table
        .pool
        .ids()
        .iter()
        .map(|id| {
            p.get(id)
                .ok_or_else(|| ConcordanceError::Unlabeled(id.clone()))
        })
        .collect()
}

/// Matches at each non-self rank `1..=k_max`, summed over queries.
fn match_counts(table: &NeighborTable, labels: &[u32], k_max: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k_max];
    for (q, row) in table.rows.iter().enumerate() {
        for (r, &(j, _)) in row.iter().take(k_max).enumerate() {
            if labels[j as usize] == labels[q] {
                counts[r] += 1;
            }
        }
    }
    counts
}

/// Same-community rate at each non-self rank `k` of `ks` (1-based).
pub fn same_rate(
    table: &NeighborTable,
    partition: &Partition,
    ks: &[usize],
    mode: RateMode,
) -> Result<BTreeMap<usize, f64>, ConcordanceError> {
    let labels = labels_of(table, partition)?;
    let n_q = table.rows.len();
    if n_q == 0 {
        return Err(ConcordanceError::NoQueries);
    }
    let k_top = ks.iter().copied().max().unwrap_or(0);
    for &k in ks {
        if k == 0 || k > table.k_max {
            return Err(ConcordanceError::RankOutOfRange {
                k,
                k_max: table.k_max,
            });
        }
    }
    let counts = match_counts(table, &labels, k_top);
    let mut out = BTreeMap::new();
    for &k in ks {
        let rate = match mode {
            RateMode::PerRank => counts[k - 1] as f64 / n_q as f64,
            RateMode::Cumulative => {
                counts[..k].iter().sum::<u64>() as f64 / (n_q as f64 * k as f64)
            }
        };
        out.insert(k, rate);
    }
    Ok(out)
}

/// `sum_c rho_c^2` over the pool.
pub fn chance_baseline<'a>(
    partition: &Partition,
    pool: impl IntoIterator<Item = &'a str>,
) -> Result<f64, ConcordanceError> {
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    let mut n = 0u64;
    for id in pool {
        let c = partition
            .get(id)
            .ok_or_else(|| ConcordanceError::Unlabeled(id.to_owned()))?;
        *counts.entry(c).or_default() += 1;
        n += 1;
    }
    if n == 0 {
        return Err(ConcordanceError::EmptyPool);
    }
    let sq: u128 = counts.values().map(|&c| c as u128 * c as u128).sum();
    Ok(sq as f64 / (n as f64 * n as f64))
}

pub fn enrichment(rate: f64, baseline: f64) -> Result<f64, ConcordanceError> {
    if baseline > 0.0 {
        Ok(rate / baseline)
    } else {
        Err(ConcordanceError::ZeroBaseline(baseline))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub model_name: String,
    pub domain: String,
    pub level: Level,
    /// Keyed by k with the query itself at rank 1, so k maps to non-self
    /// rank k - 1.
    pub per_rank: BTreeMap<usize, f64>,
    /// Keyed by k: mean share over the k nearest non-self neighbours.
    pub cumulative_topk: BTreeMap<usize, f64>,
    pub baseline: f64,
    /// Cumulative rate over baseline.
    pub enrichment: BTreeMap<usize, f64>,
    pub enrichment_per_rank: BTreeMap<usize, f64>,
    pub n_queries: usize,
}

/// Full report over the table's pool for cut-offs `ks` (each ≥ 2).
pub fn concordance_report(
    model_name: &str,
    domain: &str,
    table: &NeighborTable,
    partition: &Partition,
    ks: &[usize],
) -> Result<ConcordanceReport, ConcordanceError> {
    for &k in ks {
        if k < 2 || k > table.k_max {
            return Err(ConcordanceError::RankOutOfRange {
                k,
                k_max: table.k_max,
            });
        }
    }
    let shifted: Vec<usize> = ks.iter().map(|k| k - 1).collect();
    let per = same_rate(table, partition, &shifted, RateMode::PerRank)?;
    let cumulative = same_rate(table, partition, ks, RateMode::Cumulative)?;
    let baseline = chance_baseline(partition, table.pool.ids().iter().map(String::as_str))?;
    let per_rank: BTreeMap<usize, f64> = per.into_iter().map(|(k, v)| (k + 1, v)).collect();
    let enrich = |m: &BTreeMap<usize, f64>| -> Result<BTreeMap<usize, f64>, ConcordanceError> {
        m.iter()
            .map(|(&k, &r)| Ok((k, enrichment(r, baseline)?)))
            .collect()
    };
    Ok(ConcordanceReport {
        model_name: model_name.to_owned(),
        domain: domain.to_owned(),
        level: partition.level,
        enrichment: enrich(&cumulative)?,
        enrichment_per_rank: enrich(&per_rank)?,
        per_rank,
        cumulative_topk: cumulative,
        baseline,
        n_queries: table.rows.len(),
    })
}

pub const REPORT_CSV_HEADER: [&str; 8] = [
    "model",
    "domain",
    "level",
    "k",
    "mode",
    "rate",
    "baseline",
    "enrichment",
];

/// One row per (model, domain, level, k, mode).
pub fn write_report_csv<W: Write>(
    w: W,
    reports: &[ConcordanceReport],
) -> Result<(), ConcordanceError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_CSV_HEADER)?;
    for r in reports {
        let level = match r.level {
            Level::L1 => "L1",
            Level::L2 => "L2",
        };
        for (mode, rates, enr) in [
            ("per_rank", &r.per_rank, &r.enrichment_per_rank),
            ("cumulative", &r.cumulative_topk, &r.enrichment),
        ] {
            for (k, rate) in rates {
                out.write_record([
                    r.model_name.as_str(),
                    &r.domain,
                    level,
                    &k.to_string(),
                    mode,
                    &format_sig(*rate, 9),
                    &format_sig(r.baseline, 9),
                    &format_sig(enr[k], 9),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
