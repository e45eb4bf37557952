use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ConcordanceError;
use crate::community::Partition;
use crate::corpus::{CorpusStore, Domain};
use crate::text::{for_each_token, is_stopword};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Lexical {
    pub l1: u32,
    pub domain: Domain,
    pub n_docs: usize,
    pub n_children: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalReport {
    /// Unweighted mean of `fraction` over each domain's L1 parents.
    pub per_domain: BTreeMap<Domain, f64>,
    pub per_l1: Vec<L1Lexical>,
    /// L1 communities with fewer than two L2 children.
    pub skipped: Vec<u32>,
}

/// Per L1 parent, the TF-IDF mass of unigrams occurring in exactly one child
/// L2 divided by the total mass. TF is the raw count, IDF `ln(N / df)` over
/// the parent's documents; stopwords are dropped.
pub fn lexical_distinctiveness(
    store: &CorpusStore,
    l1: &Partition,
    l2: &Partition,
) -> Result<LexicalReport, ConcordanceError> {
    let mut parents: BTreeMap<u32, Vec<(&str, u32)>> = BTreeMap::new();
    for (id, &p) in l1.labels() {
        if store.contains(id) {
            let c = l2
                .get(id)
                .ok_or_else(|| ConcordanceError::Unlabeled(id.clone()))?;
            parents.entry(p).or_default().push((id.as_str(), c));
        }
    }
    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for (p, docs) in parents {
        let mut children: Vec<u32> = docs.iter().map(|d| d.1).collect();
        children.sort_unstable();
        children.dedup();
        if children.len() < 2 {
            skipped.push(p);
        } else {
            jobs.push((p, docs, children.len()));
        }
    }
    let per_l1: Vec<L1Lexical> = jobs
        .into_par_iter()
        .map(|(p, docs, n_children)| {
            let fraction = parent_fraction(store, &docs);
            L1Lexical {
                l1: p,
                domain: majority_domain(store, &docs),
                n_docs: docs.len(),
                n_children,
                fraction,
            }
        })
        .collect();
    let mut sums: BTreeMap<Domain, (f64, usize)> = BTreeMap::new();
    for r in &per_l1 {
        let e = sums.entry(r.domain).or_default();
        e.0 += r.fraction;
        e.1 += 1;
    }
    Ok(LexicalReport {
        per_domain: sums
            .into_iter()
            .map(|(d, (s, n))| (d, s / n as f64))
            .collect(),
        per_l1,
        skipped,
    })
}

fn majority_domain(store: &CorpusStore, docs: &[(&str, u32)]) -> Domain {
    let mut counts: BTreeMap<Domain, usize> = BTreeMap::new();
    for (id, _) in docs {
        *counts.entry(store.get(id).unwrap().domain).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    counts
        .into_iter()
        .find(|&(_, c)| c == best)
        .map(|(d, _)| d)
        .unwrap_or(Domain::Biology)
}

struct TermStats {
    tf: u64,
    df: u64,
    child: u32,
    shared: bool,
}

fn parent_fraction(store: &CorpusStore, docs: &[(&str, u32)]) -> f64 {
    let mut terms: HashMap<String, TermStats> = HashMap::new();
    let mut doc_terms: HashMap<String, u64> = HashMap::new();
    for (id, child) in docs {
        let rec = store.get(id).unwrap();
        doc_terms.clear();
        for field in [&rec.title, &rec.abstract_text] {
            for_each_token(field, |t| {
                if !is_stopword(t) {
                    *doc_terms.entry(t.to_owned()).or_default() += 1;
                }
            });
        }
        for (t, c) in doc_terms.drain() {
            let e = terms.entry(t).or_insert(TermStats {
                tf: 0,
                df: 0,
                child: *child,
                shared: false,
            });
            e.tf += c;
            e.df += 1;
            if e.child != *child {
                e.shared = true;
            }
        }
    }
    let n = docs.len() as f64;
    let mut keys: Vec<&String> = terms.keys().collect();
    keys.sort_unstable();
    let (mut unique, mut total) = (0.0, 0.0);
    for k in keys {
        let s = &terms[k];
        let mass = s.tf as f64 * (n / s.df as f64).ln();
        total += mass;
        if !s.shared {
            unique += mass;
        }
    }
    if total > 0.0 {
        unique / total
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::Level;
    use crate::corpus::{ingest, MergePolicy, PaperRecord};

    fn fixture(docs: &[(&str, u32, u32, &str)]) -> (CorpusStore, Partition, Partition) {
        let recs: Vec<PaperRecord> = docs
            .iter()
            .map(|(id, _, _, text)| {
                let mut r = PaperRecord::new(*id, "common", Domain::Chemistry);
                r.authors = vec![id.to_string()];
                r.abstract_text = text.to_string();
                r
            })
            .collect();
        let store = ingest(recs, MergePolicy::default()).store;
        let l1 = Partition::new(
            Level::L1,
            1.0,
            0,
            docs.iter().map(|d| (d.0.to_string(), d.1)).collect(),
        )
        .unwrap();
        let l2 = Partition::new(
            Level::L2,
            1.0,
            0,
            docs.iter().map(|d| (d.0.to_string(), d.2)).collect(),
        )
        .unwrap();
        (store, l1, l2)
    }

    #[test]
    fn disjoint_children_score_one() {
        let (s, l1, l2) = fixture(&[
            ("a", 0, 0, "alpha beta"),
            ("b", 0, 0, "alpha gamma"),
            ("c", 0, 1, "delta epsilon"),
            ("d", 0, 1, "zeta delta"),
        ]);
        let r = lexical_distinctiveness(&s, &l1, &l2).unwrap();
        assert_eq!(r.per_l1[0].fraction, 1.0);
        assert_eq!(r.per_domain[&Domain::Chemistry], 1.0);
    }

    #[test]
    fn identical_streams_score_zero() {
        let (s, l1, l2) = fixture(&[
            ("a", 0, 0, "alpha beta"),
            ("b", 0, 1, "alpha beta"),
            ("c", 0, 2, "alpha beta"),
        ]);
        let r = lexical_distinctiveness(&s, &l1, &l2).unwrap();
        assert_eq!(r.per_l1[0].fraction, 0.0);
    }

    #[test]
    fn single_child_parents_are_skipped() {
        let (s, l1, l2) = fixture(&[("a", 0, 0, "x"), ("b", 1, 1, "y"), ("c", 1, 2, "z")]);
        let r = lexical_distinctiveness(&s, &l1, &l2).unwrap();
        assert_eq!(r.skipped, vec![0]);
        assert_eq!(r.per_l1.len(), 1);
    }

    #[test]
    fn planted_unique_mass() {
        // Three children of two documents. Every token occurs in exactly two
        // documents, so all tokens share one idf and mass is proportional to
        // occurrence counts. Unique tokens sit in both documents of a child;
        // shared tokens in one document of two different children.
        let mut docs: Vec<(String, u32, u32, String)> = Vec::new();
        let mut text = vec![String::new(); 6];
        let mut unique_occ = 0usize;
        let mut total_occ = 0usize;
        for child in 0..3usize {
            for u in 0..3 {
                for d in 0..2 {
                    text[child * 2 + d].push_str(&format!(" uniq{child}x{u}"));
                    unique_occ += 1;
                    total_occ += 1;
                }
            }
        }
        for s in 0..21 {
            let (c1, c2) = (s % 3, (s + 1) % 3);
            text[c1 * 2].push_str(&format!(" shared{s}"));
            text[c2 * 2 + 1].push_str(&format!(" shared{s}"));
            total_occ += 2;
        }
        let planted = unique_occ as f64 / total_occ as f64;
        assert_eq!(planted, 0.3);
        for (i, t) in text.iter().enumerate() {
            docs.push((format!("d{i}"), 0, (i / 2) as u32, t.clone()));
        }
        let recs: Vec<PaperRecord> = docs
            .iter()
            .map(|(id, _, _, t)| {
                let mut r = PaperRecord::new(id.clone(), "common", Domain::Physics);
                r.authors = vec![id.clone()];
                r.abstract_text = t.clone();
                r
            })
            .collect();
        let store = ingest(recs, MergePolicy::default()).store;
        let l1 = Partition::new(
            Level::L1,
            1.0,
            0,
            docs.iter().map(|d| (d.0.clone(), d.1)).collect(),
        )
        .unwrap();
        let l2 = Partition::new(
            Level::L2,
            1.0,
            0,
            docs.iter().map(|d| (d.0.clone(), d.2)).collect(),
        )
        .unwrap();
        let r = lexical_distinctiveness(&store, &l1, &l2).unwrap();
        // the common title token is in every document: idf 0, no mass
        assert!((r.per_l1[0].fraction - planted).abs() < 1e-12);
    }
}
