//! Agenda retrieval: BM25, cosine, internal-citation rerank, reciprocal rank
//! fusion, the Boolean candidate-portfolio retriever and top-1 L2 scoring.

mod agent;
mod bm25;
mod eval;
pub mod io;
mod rerank;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Domain;
use crate::embeddings::EmbeddingError;

pub use agent::{
    graph_retrieve, AgentVerdict, CandidateReport, GraphOptions, GraphOutcome, GraphRetrieval,
    Judge, Strategist, StubJudge, StubStrategist,
};
pub use bm25::{bm25_idf, Bm25Index, Bm25Params};
pub use eval::{eval_top1_l2, summarize, BenchmarkRow, Top1};
pub use rerank::{
    cosine_search, internal_citation_rerank, rrf_fuse, CitationIndex, DEFAULT_RRF_K0,
};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("fusion needs at least two runs, got {0}")]
    TooFewRuns(usize),
    #[error("query {0} has no representative papers")]
    NoRepresentatives(String),
    #[error("representative {0} has no L2 label")]
    Unlabeled(String),
    #[error("judge returned score {0} outside [0, 1]")]
    BadVerdict(f64),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A research-thread query: description plus representative papers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgendaQuery {
    pub query_id: String,
    pub domain: Domain,
    pub description: String,
    pub representative_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredId {
    pub id: String,
    pub score: f64,
}

/// One retriever's ranked answer to one query. Scores are non-increasing
/// and ids unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalRun {
    pub query_id: String,
    pub retriever: String,
    pub ranked: Vec<ScoredId>,
}

impl RetrievalRun {
    pub fn new(
        query_id: impl Into<String>,
        retriever: impl Into<String>,
        ranked: Vec<ScoredId>,
    ) -> Self {
        Self {
            query_id: query_id.into(),
            retriever: retriever.into(),
            ranked,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ranked.iter().map(|s| s.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Score descending, then id ascending.
pub(crate) fn by_score_then_id(a: &ScoredId, b: &ScoredId) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.id.cmp(&b.id))
}
