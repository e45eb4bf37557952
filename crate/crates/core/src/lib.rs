//! Citation-graph research-agenda measurement toolkit.
//!
//! Corpus cleaning, the three-layer augmented citation graph, Leiden CPM
//! partitions, embedding neighbour concordance, Boolean and BM25 retrieval
//! with citation rerank, and a planted-partition generator for validation.

pub mod boolquery;
pub mod community;
pub mod concordance;
pub mod corpus;
pub mod embeddings;
pub mod graph;
pub mod ids;
pub mod numfmt;
pub mod retrieval;
pub mod seeds;
pub mod synth;
pub mod text;

pub use community::{Level, Partition};
pub use corpus::{CorpusStore, Domain, PaperRecord};
pub use embeddings::{EmbeddingSet, NeighborTable};
pub use graph::{AugmentedGraph, EdgeLayer, LayerKind};
pub use ids::IdTable;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
