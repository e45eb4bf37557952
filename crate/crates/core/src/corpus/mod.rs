//! Paper metadata: ingestion, deduplication, eligibility filtering and
//! per-domain stratified sampling.

mod filter;
mod ingest;
pub mod io;
mod sample;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use filter::{filter_eligibility, Eligibility, FilterReport};
pub use ingest::{canonical_doi, dedup_key, ingest, IngestOutcome, MergePolicy, MergedAway};
pub use sample::stratified_sample;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("domain {domain} has {available} eligible records, {requested} requested (short by {})", requested - available)]
    Undersized {
        domain: Domain,
        available: usize,
        requested: usize,
    },
    #[error("invalid boilerplate pattern {pattern:?}: {source}")]
    BadPattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The eight scientific domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Biology,
    Biomedical,
    Chemistry,
    #[serde(alias = "cs", alias = "computer science")]
    ComputerScience,
    Engineering,
    #[serde(alias = "env", alias = "environmental", alias = "earth")]
    EnvEarth,
    #[serde(alias = "materials_science")]
    Materials,
    Physics,
}

impl Domain {
    pub const ALL: [Domain; 8] = [
        Domain::Biology,
        Domain::Biomedical,
        Domain::Chemistry,
        Domain::ComputerScience,
        Domain::Engineering,
        Domain::EnvEarth,
        Domain::Materials,
        Domain::Physics,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Biology => "biology",
            Domain::Biomedical => "biomedical",
            Domain::Chemistry => "chemistry",
            Domain::ComputerScience => "computer_science",
            Domain::Engineering => "engineering",
            Domain::EnvEarth => "env_earth",
            Domain::Materials => "materials",
            Domain::Physics => "physics",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
            .map_err(|_| format!("unknown domain {s:?}"))
    }
}

/// One paper. `references` are ids in the global reference universe and
/// need not be corpus members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    #[serde(rename = "id")]
    pub paper_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default)]
    pub venue: String,
    pub domain: Domain,
    #[serde(default)]
    pub authors: Vec<String>,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub article_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl PaperRecord {
    /// Minimal record, mostly for tests and generators.
    pub fn new(id: impl Into<String>, title: impl Into<String>, domain: Domain) -> Self {
        Self {
            paper_id: id.into(),
            doi: None,
            title: title.into(),
            abstract_text: String::new(),
            year: None,
            venue: String::new(),
            domain,
            authors: Vec::new(),
            references: Vec::new(),
            article_type: None,
            source: None,
        }
    }

    /// Title and abstract joined by a newline.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.abstract_text)
    }
}

/// A record rejected during reading or ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_id: Option<String>,
    pub reason: String,
}

/// Deduplicated paper store. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStore {
    records: BTreeMap<String, PaperRecord>,
    provenance: BTreeMap<String, BTreeSet<String>>,
}

impl CorpusStore {
    pub(crate) fn from_parts(
        records: BTreeMap<String, PaperRecord>,
        provenance: BTreeMap<String, BTreeSet<String>>,
    ) -> Self {
        Self {
            records,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PaperRecord> {
        self.records.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.records.contains_key(id)
    }

    /// Records in ascending id order.
    pub fn records(&self) -> impl Iterator<Item = &PaperRecord> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn sources(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.provenance.get(id)
    }

    pub fn domains(&self) -> BTreeSet<Domain> {
        self.records.values().map(|r| r.domain).collect()
    }

    /// A store restricted to `ids` (unknown ids are ignored).
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> CorpusStore {
        let mut records = BTreeMap::new();
        let mut provenance = BTreeMap::new();
        for id in ids {
            if let Some(r) = self.records.get(id) {
                records.insert(id.to_owned(), r.clone());
                if let Some(p) = self.provenance.get(id) {
                    provenance.insert(id.to_owned(), p.clone());
                }
            }
        }
        CorpusStore::from_parts(records, provenance)
    }

    pub(crate) fn retain(&mut self, mut keep: impl FnMut(&PaperRecord) -> bool) {
        let provenance = &mut self.provenance;
        self.records.retain(|id, r| {
            let k = keep(r);
            if !k {
                provenance.remove(id);
            }
            k
        });
    }
}
