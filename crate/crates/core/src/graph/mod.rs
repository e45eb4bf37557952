//! The augmented citation graph: direct citation, bibliographic coupling
//! and co-citation layers merged into one weighted undirected edge table.

mod build;
pub mod io;
mod layers;
mod merge;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusStore;
use crate::ids::IdTable;

pub use build::{build_graph, BuildReport, GraphParams};
pub use layers::{build_bc_edges, build_cc_edges, build_direct_edges, salton_cosine};
pub use merge::{merge_layers, remove_orphans};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("salton cosine undefined for an empty set (sizes {size_a} and {size_b})")]
    EmptySet { size_a: usize, size_b: usize },
    #[error("shared count {shared} exceeds set size ({size_a}, {size_b})")]
    SharedExceedsSize {
        shared: usize,
        size_a: usize,
        size_b: usize,
    },
    #[error("layers were built over different member sets")]
    MemberMismatch,
    #[error("self-loop on {0}")]
    SelfLoop(String),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("edge {0} -- {1} has invalid weight {2}")]
    BadWeight(String, String, f64),
    #[error("edge endpoint {0} is not a graph node")]
    UnknownNode(String),
    #[error("edge file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Direct,
    Bc,
    Cc,
}

/// One undirected edge of a layer, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerEdge {
    pub a: u32,
    pub b: u32,
    pub w: f64,
}

/// Counters collected while building a layer.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerReport {
    /// Members skipped because their reference (or citer) set was empty.
    pub skipped_empty: usize,
    /// Self-references ignored.
    pub self_references: usize,
    /// References or citers excluded by the cap.
    pub capped: usize,
}

/// Edges of one source, indexed against a shared member table.
#[derive(Debug, Clone)]
pub struct EdgeLayer {
    pub kind: LayerKind,
    pub members: Arc<IdTable>,
    /// Sorted by `(a, b)`, no duplicates.
    pub edges: Vec<LayerEdge>,
    pub report: LayerReport,
}

impl EdgeLayer {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges as `(id_a, id_b, w)` string triples.
    pub fn named_edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges
            .iter()
            .map(|e| (self.members.id(e.a), self.members.id(e.b), e.w))
    }
}

/// A merged edge with its per-layer components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergedEdge {
    pub a: u32,
    pub b: u32,
    pub w_total: f64,
    pub w_direct: f64,
    pub w_bc: f64,
    pub w_cc: f64,
}

impl MergedEdge {
    pub fn new(a: u32, b: u32, w_direct: f64, w_bc: f64, w_cc: f64) -> Self {
        Self {
            a,
            b,
            w_total: w_direct + w_bc + w_cc,
            w_direct,
            w_bc,
            w_cc,
        }
    }
}

/// Simple undirected weighted graph over paper ids. Edges are sorted by
/// `(a, b)` with `a < b` in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    nodes: IdTable,
    edges: Vec<MergedEdge>,
}

/// Compressed adjacency: neighbours of `v` are
/// `targets[offsets[v]..offsets[v + 1]]`, sorted ascending.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub offsets: Vec<usize>,
    pub targets: Vec<u32>,
    pub weights: Vec<f64>,
}

impl Adjacency {
    #[inline]
    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.offsets[v as usize]..self.offsets[v as usize + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }
}

impl AugmentedGraph {
    /// Validates and wraps an edge list. Edges must reference `nodes`, be
    /// canonically oriented and unique.
    pub fn new(nodes: IdTable, mut edges: Vec<MergedEdge>) -> Result<Self, GraphError> {
        edges.sort_unstable_by_key(|e| (e.a, e.b));
        for w in edges.windows(2) {
            if (w[0].a, w[0].b) == (w[1].a, w[1].b) {
                return Err(GraphError::DuplicateEdge(
                    nodes.id(w[0].a).to_owned(),
                    nodes.id(w[0].b).to_owned(),
                ));
            }
        }
        for e in &edges {
            if e.a as usize >= nodes.len() || e.b as usize >= nodes.len() {
                return Err(GraphError::UnknownNode(format!("#{}/#{}", e.a, e.b)));
            }
            if e.a == e.b {
                return Err(GraphError::SelfLoop(nodes.id(e.a).to_owned()));
            }
            if e.a > e.b {
                return Err(GraphError::Parse {
                    line: 0,
                    msg: "edge not canonically oriented".into(),
                });
            }
            if !(e.w_total.is_finite() && e.w_total > 0.0) {
                return Err(GraphError::BadWeight(
                    nodes.id(e.a).to_owned(),
                    nodes.id(e.b).to_owned(),
                    e.w_total,
                ));
            }
        }
        Ok(Self { nodes, edges })
    }

    /// Builds a graph from `(a, b, w)` triples without layer provenance; the
    /// weight is recorded in the coupling component. Extra isolated nodes
    /// may be supplied in `nodes`.
    pub fn from_weighted<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str, f64)>,
    ) -> Result<Self, GraphError> {
        let edges: Vec<_> = edges.into_iter().collect();
        let table = IdTable::new(
            nodes
                .into_iter()
                .chain(edges.iter().flat_map(|(a, b, _)| [*a, *b])),
        );
        let mut merged = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a.to_owned()));
            }
            let (ia, ib) = (table.index_of(a).unwrap(), table.index_of(b).unwrap());
            let (lo, hi) = if ia < ib { (ia, ib) } else { (ib, ia) };
            merged.push(MergedEdge::new(lo, hi, 0.0, w, 0.0));
        }
        Self::new(table, merged)
    }

    pub fn nodes(&self) -> &IdTable {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[MergedEdge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w_total).sum()
    }

    /// Edges as `(id_a, id_b, edge)`.
    pub fn named_edges(&self) -> impl Iterator<Item = (&str, &str, &MergedEdge)> {
        self.edges
            .iter()
            .map(|e| (self.nodes.id(e.a), self.nodes.id(e.b), e))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            d[e.a as usize] += 1;
            d[e.b as usize] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Adjacency {
        let n = self.nodes.len();
        let mut offsets = vec![0usize; n + 1];
        for e in &self.edges {
            offsets[e.a as usize + 1] += 1;
            offsets[e.b as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let m = offsets[n];
        let mut targets = vec![0u32; m];
        let mut weights = vec![0f64; m];
        // Edges are sorted by (a, b), so each row fills in ascending order
        // except that "b" rows receive smaller ids after larger ones; sort
        // rows afterwards.
        for e in &self.edges {
            let (a, b) = (e.a as usize, e.b as usize);
            targets[fill[a]] = e.b;
            weights[fill[a]] = e.w_total;
            fill[a] += 1;
            targets[fill[b]] = e.a;
            weights[fill[b]] = e.w_total;
            fill[b] += 1;
        }
        for v in 0..n {
            let r = offsets[v]..offsets[v + 1];
            let t = &targets[r.clone()];
            if !t.windows(2).all(|w| w[0] < w[1]) {
                let mut row: Vec<(u32, f64)> = t
                    .iter()
                    .copied()
                    .zip(weights[r.clone()].iter().copied())
                    .collect();
                row.sort_unstable_by_key(|x| x.0);
                for (k, (tv, wv)) in row.into_iter().enumerate() {
                    targets[offsets[v] + k] = tv;
                    weights[offsets[v] + k] = wv;
                }
            }
        }
        Adjacency {
            offsets,
            targets,
            weights,
        }
    }

    /// Per-layer edge counts: `(direct, bc, cc)` components that are non-zero.
    pub fn layer_counts(&self) -> BTreeMap<LayerKind, usize> {
        let mut m = BTreeMap::new();
        for e in &self.edges {
            for (k, w) in [
                (LayerKind::Direct, e.w_direct),
                (LayerKind::Bc, e.w_bc),
                (LayerKind::Cc, e.w_cc),
            ] {
                if w > 0.0 {
                    *m.entry(k).or_insert(0) += 1;
                }
            }
        }
        m
    }
}

impl PartialOrd for LayerKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LayerKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

/// Citer id to the member papers it cites.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiterTable {
    pub citers: BTreeMap<String, Vec<String>>,
}

impl CiterTable {
    pub fn insert(&mut self, citer: impl Into<String>, cited: impl IntoIterator<Item = String>) {
        let entry = self.citers.entry(citer.into()).or_default();
        entry.extend(cited);
        entry.sort_unstable();
        entry.dedup();
    }

    pub fn len(&self) -> usize {
        self.citers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.citers.is_empty()
    }

    /// Every store record as a citer of its references.
    pub fn from_store(store: &CorpusStore) -> Self {
        let mut t = CiterTable::default();
        for r in store.records() {
            if !r.references.is_empty() {
                t.insert(r.paper_id.clone(), r.references.iter().cloned());
            }
        }
        t
    }

    /// Adds all entries of `other`.
    pub fn extend(&mut self, other: &CiterTable) {
        for (c, cited) in &other.citers {
            self.insert(c.clone(), cited.iter().cloned());
        }
    }
}
