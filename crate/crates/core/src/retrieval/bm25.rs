use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{RetrievalRun, ScoredId};
use crate::corpus::{CorpusStore, Domain};
use crate::ids::IdTable;
use crate::text::{for_each_token, tokenize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

/// `ln(1 + (N - df + 0.5) / (df + 0.5))`
pub fn bm25_idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

#[derive(Debug, Clone, Default)]
struct Shard {
    /// Global document indices, ascending.
    docs: Vec<u32>,
    lens: Vec<u32>,
    avgdl: f64,
    /// term -> (local doc, tf), local doc ascending
    postings: HashMap<String, Vec<(u32, u32)>>,
}

impl Shard {
    fn push(&mut self, global: u32, len: u32, terms: &[(String, u32)]) {
        let local = self.docs.len() as u32;
        self.docs.push(global);
        self.lens.push(len);
        for (t, tf) in terms {
            self.postings
                .entry(t.clone())
                .or_default()
                .push((local, *tf));
        }
    }

    fn finish(&mut self) {
        let total: u64 = self.lens.iter().map(|&l| u64::from(l)).sum();
        self.avgdl = if self.docs.is_empty() {
            0.0
        } else {
            total as f64 / self.docs.len() as f64
        };
    }
}

/// Okapi BM25 over title and abstract, with one shard for the whole corpus
/// and one per domain so domain-restricted search uses domain statistics.
#[derive(Debug, Clone)]
pub struct Bm25Index {
    params: Bm25Params,
    ids: IdTable,
    global: Shard,
    domains: BTreeMap<Domain, Shard>,
}

fn term_counts(title: &str, abstract_text: &str) -> (u32, Vec<(String, u32)>) {
    let mut m: HashMap<String, u32> = HashMap::new();
    let mut len = 0;
    for field in [title, abstract_text] {
        for_each_token(field, |t| {
            *m.entry(t.to_owned()).or_default() += 1;
            len += 1;
        });
    }
    let mut v: Vec<(String, u32)> = m.into_iter().collect();
    v.sort_unstable();
    (len, v)
}

impl Bm25Index {
    pub fn build(store: &CorpusStore, params: Bm25Params) -> Self {
        let records: Vec<_> = store.records().collect();
        let ids = IdTable::new(records.iter().map(|r| r.paper_id.clone()));
        let counted: Vec<(u32, Vec<(String, u32)>)> = records
            .par_iter()
            .map(|r| term_counts(&r.title, &r.abstract_text))
            .collect();
        let mut global = Shard::default();
        let mut domains: BTreeMap<Domain, Shard> = BTreeMap::new();
        for (i, (r, (len, terms))) in records.iter().zip(&counted).enumerate() {
            global.push(i as u32, *len, terms);
            domains
                .entry(r.domain)
                .or_default()
                .push(i as u32, *len, terms);
        }
        global.finish();
        domains.values_mut().for_each(Shard::finish);
        Self {
            params,
            ids,
            global,
            domains,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn shard(&self, domain: Option<Domain>) -> Option<&Shard> {
        match domain {
            None => Some(&self.global),
            Some(d) => self.domains.get(&d),
        }
    }

    /// Document frequency of `term` in the whole index or one domain.
    pub fn df(&self, term: &str, domain: Option<Domain>) -> usize {
        self.shard(domain)
            .and_then(|s| s.postings.get(term))
            .map_or(0, Vec::len)
    }

    pub fn doc_count(&self, domain: Option<Domain>) -> usize {
        self.shard(domain).map_or(0, |s| s.docs.len())
    }

    pub fn avgdl(&self, domain: Option<Domain>) -> f64 {
        self.shard(domain).map_or(0.0, |s| s.avgdl)
    }

    /// Top `top_n` documents for `query_text`. Repeated query tokens count
    /// once. Only documents containing at least one query token are
    /// returned; ties go to the smaller id.
    pub fn search(
        &self,
        query_id: &str,
        query_text: &str,
        top_n: usize,
        domain: Option<Domain>,
    ) -> RetrievalRun {
        let mut run = RetrievalRun::new(query_id, "bm25", Vec::new());
        let Some(shard) = self.shard(domain) else {
            return run;
        };
        let mut terms = tokenize(query_text);
        terms.sort_unstable();
        terms.dedup();
        let n = shard.docs.len();
        let Bm25Params { k1, b } = self.params;
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for t in &terms {
            let Some(list) = shard.postings.get(t) else {
                continue;
            };
            let idf = bm25_idf(n, list.len());
            for &(d, tf) in list {
                let tf = f64::from(tf);
                let norm = 1.0 - b + b * f64::from(shard.lens[d as usize]) / shard.avgdl;
                *acc.entry(d).or_default() += idf * tf * (k1 + 1.0) / (tf + k1 * norm);
            }
        }
        let mut scored: Vec<(f64, u32)> = acc
            .into_iter()
            .map(|(d, s)| (s, shard.docs[d as usize]))
            .collect();
        let order = |a: &(f64, u32), b: &(f64, u32)| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if scored.len() > top_n && top_n > 0 {
            scored.select_nth_unstable_by(top_n - 1, order);
        }
        scored.truncate(top_n);
        scored.sort_unstable_by(order);
        run.ranked = scored
            .into_iter()
            .map(|(s, g)| ScoredId {
                id: self.ids.id(g).to_owned(),
                score: s,
            })
            .collect();
        run
    }
}
