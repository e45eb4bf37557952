//! Leiden CPM partitions: global L1, hierarchical L2 inside large L1
//! communities, and resolution sweeps.

pub mod io;
mod leiden;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Adjacency, AugmentedGraph};
use crate::seeds::derive_seed;

pub const DEFAULT_MAX_PASSES: usize = 10;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("no community label for node {0}")]
    MissingLabel(String),
    #[error("community ids are not dense 0..{n}: {detail}")]
    NotDense { n: usize, detail: String },
    #[error("resolution must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("resolutions must be sorted ascending")]
    UnsortedGammas,
    #[error("L2 community {l2} spans L1 communities {first} and {second}")]
    Straddle { l2: u32, first: u32, second: u32 },
    #[error("partition file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
}

/// A labeling of paper ids with dense community ids `0..C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub level: Level,
    pub gamma: f64,
    pub seed: u64,
    labels: BTreeMap<String, u32>,
}

impl Partition {
    pub fn new(
        level: Level,
        gamma: f64,
        seed: u64,
        labels: BTreeMap<String, u32>,
    ) -> Result<Self, CommunityError> {
        let n = labels.values().max().map_or(0, |&m| m as usize + 1);
        let mut seen = vec![false; n];
        for &l in labels.values() {
            seen[l as usize] = true;
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(CommunityError::NotDense {
                n,
                detail: format!("id {gap} unused"),
            });
        }
        Ok(Self {
            level,
            gamma,
            seed,
            labels,
        })
    }

    pub fn labels(&self) -> &BTreeMap<String, u32> {
        &self.labels
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.labels.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_communities(&self) -> usize {
        self.labels.values().max().map_or(0, |&m| m as usize + 1)
    }

    /// Member count per community id.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_communities()];
        for &l in self.labels.values() {
            s[l as usize] += 1;
        }
        s
    }

    /// Members per community, ids ascending.
    pub fn members(&self) -> Vec<Vec<&str>> {
        let mut m = vec![Vec::new(); self.n_communities()];
        for (id, &l) in &self.labels {
            m[l as usize].push(id.as_str());
        }
        m
    }

    /// Labels aligned with the graph's node table.
    pub fn labels_for(&self, graph: &AugmentedGraph) -> Result<Vec<u32>, CommunityError> {
        graph
            .nodes()
            .ids()
            .iter()
            .map(|id| {
                self.get(id)
                    .ok_or_else(|| CommunityError::MissingLabel(id.clone()))
            })
            .collect()
    }

    /// Checks that every community of `self` lies inside one community of
    /// `coarse`.
    pub fn check_refines(&self, coarse: &Partition) -> Result<(), CommunityError> {
        let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
        for (id, &l) in &self.labels {
            let p = coarse
                .get(id)
                .ok_or_else(|| CommunityError::MissingLabel(id.clone()))?;
            match parent.get(&l) {
                Some(&q) if q != p => {
                    return Err(CommunityError::Straddle {
                        l2: l,
                        first: q,
                        second: p,
                    })
                }
                Some(_) => {}
                None => {
                    parent.insert(l, p);
                }
            }
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<(), CommunityError> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(CommunityError::BadGamma(gamma))
    }
}

/// `sum_C (e_C - gamma * n_C (n_C - 1) / 2)` over the graph's nodes.
pub fn cpm_quality(
    graph: &AugmentedGraph,
    partition: &Partition,
    gamma: f64,
) -> Result<f64, CommunityError> {
    let labels = partition.labels_for(graph)?;
    let c = labels.iter().max().map_or(0, |&m| m as usize + 1);
    let mut internal = vec![0.0; c];
    let mut size = vec![0.0f64; c];
    for &l in &labels {
        size[l as usize] += 1.0;
    }
    for e in graph.edges() {
        let (la, lb) = (labels[e.a as usize], labels[e.b as usize]);
        if la == lb {
            internal[la as usize] += e.w_total;
        }
    }
    Ok(internal
        .iter()
        .zip(&size)
        .map(|(e, n)| e - gamma * n * (n - 1.0) / 2.0)
        .sum())
}

fn labels_to_partition(
    graph: &AugmentedGraph,
    labels: &[u32],
    level: Level,
    gamma: f64,
    seed: u64,
) -> Partition {
    let map = graph
        .nodes()
        .ids()
        .iter()
        .cloned()
        .zip(labels.iter().copied())
        .collect();
    Partition::new(level, gamma, seed, map).expect("leiden labels are dense")
}

/// L1 partition of the whole graph.
pub fn leiden_cpm(
    graph: &AugmentedGraph,
    gamma: f64,
    seed: u64,
    max_passes: usize,
) -> Result<Partition, CommunityError> {
    check_gamma(gamma)?;
    let labels = leiden::leiden_labels(&graph.adjacency(), gamma, seed, max_passes);
    Ok(labels_to_partition(graph, &labels, Level::L1, gamma, seed))
}

/// Induced subgraph adjacency on `nodes` (ascending graph indices).
fn induced(adj: &Adjacency, nodes: &[u32]) -> Adjacency {
    let mut local = std::collections::HashMap::with_capacity(nodes.len());
    for (i, &v) in nodes.iter().enumerate() {
        local.insert(v, i as u32);
    }
    let mut offsets = Vec::with_capacity(nodes.len() + 1);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    offsets.push(0);
    for &v in nodes {
        for (u, w) in adj.neighbors(v) {
            if let Some(&lu) = local.get(&u) {
                targets.push(lu);
                weights.push(w);
            }
        }
        offsets.push(targets.len());
    }
    Adjacency {
        offsets,
        targets,
        weights,
    }
}

/// Re-partitions every L1 community with at least `min_split_size` members
/// at `gamma_l2`; smaller ones become a single L2 community. L2 ids are
/// dense and assigned in ascending L1 order.
pub fn hierarchical_l2(
    graph: &AugmentedGraph,
    l1: &Partition,
    gamma_l2: f64,
    min_split_size: usize,
    seed: u64,
    max_passes: usize,
) -> Result<Partition, CommunityError> {
    check_gamma(gamma_l2)?;
    let labels = l1.labels_for(graph)?;
    let n_l1 = labels.iter().max().map_or(0, |&m| m as usize + 1);
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); n_l1];
    for (v, &l) in labels.iter().enumerate() {
        groups[l as usize].push(v as u32);
    }
    let adj = graph.adjacency();
    let sub: Vec<Option<Vec<u32>>> = groups
        .par_iter()
        .enumerate()
        .map(|(c, nodes)| {
            (nodes.len() >= min_split_size).then(|| {
                let a = induced(&adj, nodes);
                leiden::leiden_labels(&a, gamma_l2, derive_seed(seed, &[c as u64]), max_passes)
            })
        })
        .collect();

    let mut out = vec![0u32; graph.node_count()];
    let mut next = 0u32;
    for (nodes, local) in groups.iter().zip(sub) {
        match local {
            None => {
                for &v in nodes {
                    out[v as usize] = next;
                }
                next += 1;
            }
            Some(local) => {
                let k = local.iter().max().map_or(0, |&m| m + 1);
                for (&v, &l) in nodes.iter().zip(&local) {
                    out[v as usize] = next + l;
                }
                next += k;
            }
        }
    }
    Ok(labels_to_partition(graph, &out, Level::L2, gamma_l2, seed))
}

/// Community-size bin `[min_size, max_size]` with the number of communities
/// and of nodes falling in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeBin {
    pub min_size: usize,
    pub max_size: usize,
    pub communities: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub gamma: f64,
    pub n_communities: usize,
    pub max_size: usize,
    pub max_share: f64,
    pub quality: f64,
    pub size_histogram: Vec<SizeBin>,
}

/// Bins 1, 2-9, 10-99, 100-999, ...
pub fn size_histogram(sizes: &[usize]) -> Vec<SizeBin> {
    let mut bins: BTreeMap<usize, SizeBin> = BTreeMap::new();
    for &s in sizes {
        let (lo, hi) = if s <= 1 {
            (1, 1)
        } else if s < 10 {
            (2, 9)
        } else {
            let mut lo = 10;
            while lo * 10 <= s {
                lo *= 10;
            }
            (lo, lo * 10 - 1)
        };
        let b = bins.entry(lo).or_insert(SizeBin {
            min_size: lo,
            max_size: hi,
            communities: 0,
            nodes: 0,
        });
        b.communities += 1;
        b.nodes += s;
    }
    bins.into_values().collect()
}

pub fn partition_stats(
    graph: &AugmentedGraph,
    partition: &Partition,
    gamma: f64,
) -> Result<PartitionStats, CommunityError> {
    let quality = cpm_quality(graph, partition, gamma)?;
    let sizes = partition.sizes();
    let max_size = sizes.iter().copied().max().unwrap_or(0);
    let total: usize = sizes.iter().sum();
    Ok(PartitionStats {
        gamma,
        n_communities: sizes.len(),
        max_size,
        max_share: if total == 0 {
            0.0
        } else {
            max_size as f64 / total as f64
        },
        quality,
        size_histogram: size_histogram(&sizes),
    })
}

/// One L1 partition and its statistics per resolution.
pub fn resolution_sweep(
    graph: &AugmentedGraph,
    gammas: &[f64],
    seed: u64,
    max_passes: usize,
) -> Result<Vec<(Partition, PartitionStats)>, CommunityError> {
    for &g in gammas {
        check_gamma(g)?;
    }
    if gammas.windows(2).any(|w| w[0] > w[1]) {
        return Err(CommunityError::UnsortedGammas);
    }
    gammas
        .par_iter()
        .map(|&g| {
            let p = leiden_cpm(graph, g, seed, max_passes)?;
            let s = partition_stats(graph, &p, g)?;
            Ok((p, s))
        })
        .collect()
}
