use std::collections::{HashMap, HashSet};

use super::{by_score_then_id, RetrievalError, RetrievalRun, ScoredId};
use crate::corpus::CorpusStore;
use crate::embeddings::{cosine_top_n, EmbeddingSet};
use crate::ids::IdTable;

pub const DEFAULT_RRF_K0: u32 = 60;

/// Directed member-to-member citations (citing -> cited).
#[derive(Debug, Clone, Default)]
pub struct CitationIndex {
    ids: IdTable,
    cites: Vec<Vec<u32>>,
}

impl CitationIndex {
    /// Citations between store members, from reference lists.
    pub fn from_store(store: &CorpusStore) -> Self {
        Self::from_pairs(
            store.ids().map(str::to_owned),
            store.records().flat_map(|r| {
                r.references
                    .iter()
                    .map(move |t| (r.paper_id.as_str(), t.as_str()))
            }),
        )
    }

    /// Pairs whose endpoints are not both in `nodes`, and self-citations,
    /// are dropped.
    pub fn from_pairs<'a>(
        nodes: impl IntoIterator<Item = String>,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Self {
        let ids = IdTable::new(nodes);
        let mut cites = vec![Vec::new(); ids.len()];
        for (a, b) in pairs {
            if let (Some(i), Some(j)) = (ids.index_of(a), ids.index_of(b)) {
                if i != j {
                    cites[i as usize].push(j);
                }
            }
        }
        for c in &mut cites {
            c.sort_unstable();
            c.dedup();
        }
        Self { ids, cites }
    }

    pub fn cited_by(&self, id: &str) -> &[u32] {
        self.ids
            .index_of(id)
            .map_or(&[][..], |i| self.cites[i as usize].as_slice())
    }

    pub fn ids(&self) -> &IdTable {
        &self.ids
    }

    pub fn edge_count(&self) -> usize {
        self.cites.iter().map(Vec::len).sum()
    }
}

/// Reorders `candidates` by the number of other candidates that cite each
/// one. Ties keep input order. Duplicate candidates keep their first rank.
pub fn internal_citation_rerank(
    query_id: &str,
    candidates: &[String],
    citations: &CitationIndex,
) -> RetrievalRun {
    let mut seen = HashSet::new();
    let unique: Vec<&String> = candidates
        .iter()
        .filter(|c| seen.insert(c.as_str()))
        .collect();
    let mut slot: HashMap<u32, usize> = HashMap::new();
    for (rank, c) in unique.iter().enumerate() {
        if let Some(i) = citations.ids.index_of(c) {
            slot.insert(i, rank);
        }
    }
    let mut indeg = vec![0u32; unique.len()];
    for &i in slot.keys() {
        for j in &citations.cites[i as usize] {
            if let Some(&r) = slot.get(j) {
                indeg[r] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..unique.len()).collect();
    order.sort_by(|&a, &b| indeg[b].cmp(&indeg[a]).then(a.cmp(&b)));
    RetrievalRun::new(
        query_id,
        "cite_rerank",
        order
            .into_iter()
            .map(|r| ScoredId {
                id: unique[r].clone(),
                score: f64::from(indeg[r]),
            })
            .collect(),
    )
}

/// Reciprocal rank fusion: `sum over runs of 1 / (k0 + rank)`, rank from 1.
pub fn rrf_fuse(
    runs: &[&RetrievalRun],
    k0: u32,
    top_n: usize,
) -> Result<RetrievalRun, RetrievalError> {
    if runs.len() < 2 {
        return Err(RetrievalError::TooFewRuns(runs.len()));
    }
    let mut acc: HashMap<&str, f64> = HashMap::new();
    for run in runs {
        let mut seen = HashSet::new();
        for (i, s) in run.ranked.iter().enumerate() {
            if seen.insert(s.id.as_str()) {
                *acc.entry(s.id.as_str()).or_default() += 1.0 / (f64::from(k0) + (i + 1) as f64);
            }
        }
    }
    let mut ranked: Vec<ScoredId> = acc
        .into_iter()
        .map(|(id, score)| ScoredId {
            id: id.to_owned(),
            score,
        })
        .collect();
    ranked.sort_by(by_score_then_id);
    ranked.truncate(top_n);
    Ok(RetrievalRun::new(&runs[0].query_id, "rrf", ranked))
}

/// Exact cosine retrieval of `top_n` pool members.
pub fn cosine_search(
    query_id: &str,
    set: &EmbeddingSet,
    query_vector: &[f32],
    pool: &IdTable,
    top_n: usize,
) -> Result<RetrievalRun, RetrievalError> {
    let hits = cosine_top_n(set, query_vector, pool, top_n)?;
    Ok(RetrievalRun::new(
        query_id,
        format!("cosine:{}", set.model_name),
        hits.into_iter()
            .map(|(id, score)| ScoredId { id, score })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn run(name: &str, v: &[&str]) -> RetrievalRun {
        RetrievalRun::new(
            "q",
            name,
            v.iter()
                .enumerate()
                .map(|(i, id)| ScoredId {
                    id: id.to_string(),
                    score: -(i as f64),
                })
                .collect(),
        )
    }

    #[test]
    fn rerank_counts_internal_citations() {
        let ci = CitationIndex::from_pairs(
            ids(&["A", "B", "C", "D"]),
            [("A", "B"), ("C", "B"), ("D", "A")],
        );
        let r = internal_citation_rerank("q", &ids(&["A", "B", "C"]), &ci);
        assert_eq!(r.ids().collect::<Vec<_>>(), vec!["B", "A", "C"]);
        assert_eq!(r.ranked[0].score, 2.0);
        assert_eq!(r.ranked[1].score, 0.0);
    }

    #[test]
    fn rerank_without_citations_keeps_order() {
        let ci = CitationIndex::from_pairs(ids(&["x", "y", "z"]), []);
        let c = ids(&["z", "x", "y"]);
        let r = internal_citation_rerank("q", &c, &ci);
        assert_eq!(r.ids().collect::<Vec<_>>(), vec!["z", "x", "y"]);
    }

    #[test]
    fn rerank_equals_induced_in_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let nodes: Vec<String> = (0..600).map(|i| format!("n{i:03}")).collect();
        let mut pairs = Vec::new();
        for _ in 0..6000 {
            let a = rng.random_range(0..600);
            let b = rng.random_range(0..600);
            pairs.push((nodes[a].clone(), nodes[b].clone()));
        }
        let ci = CitationIndex::from_pairs(
            nodes.clone(),
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        );
        let mut cand = nodes.clone();
        cand.shuffle(&mut rng);
        cand.truncate(200);
        let r = internal_citation_rerank("q", &cand, &ci);
        let inset: HashSet<&str> = cand.iter().map(String::as_str).collect();
        let mut edges: HashSet<(&str, &str)> = HashSet::new();
        for (a, b) in &pairs {
            if a != b && inset.contains(a.as_str()) && inset.contains(b.as_str()) {
                edges.insert((a, b));
            }
        }
        for s in &r.ranked {
            let indeg = edges.iter().filter(|e| e.1 == s.id).count();
            assert_eq!(s.score, indeg as f64, "{}", s.id);
        }
        assert!(r.ranked.windows(2).all(|w| w[0].score >= w[1].score));
    }

    proptest! {
        #[test]
        fn rerank_scores_ignore_input_order(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes: Vec<String> = (0..40).map(|i| format!("n{i:02}")).collect();
            let pairs: Vec<(String, String)> = (0..120)
                .map(|_| (nodes[rng.random_range(0..40)].clone(), nodes[rng.random_range(0..40)].clone()))
                .collect();
            let ci = CitationIndex::from_pairs(nodes.clone(), pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())));
            let mut c = nodes[..25].to_vec();
            let a = internal_citation_rerank("q", &c, &ci);
            c.shuffle(&mut rng);
            let b = internal_citation_rerank("q", &c, &ci);
            let sa: HashMap<_, _> = a.ranked.iter().map(|s| (s.id.clone(), s.score)).collect();
            let sb: HashMap<_, _> = b.ranked.iter().map(|s| (s.id.clone(), s.score)).collect();
            prop_assert_eq!(sa, sb);
        }

        #[test]
        fn agreeing_runs_keep_order(k0 in 1u32..500, n in 2usize..30) {
            let v: Vec<String> = (0..n).map(|i| format!("d{i:02}")).collect();
            let refs: Vec<&str> = v.iter().map(String::as_str).collect();
            let a = run("a", &refs);
            let b = run("b", &refs);
            let f = rrf_fuse(&[&a, &b], k0, n).unwrap();
            prop_assert_eq!(f.ids().collect::<Vec<_>>(), refs);
        }
    }

    #[test]
    fn rrf_arithmetic() {
        let a = run("a", &["x", "y", "z"]);
        let b = run("b", &["x", "w"]);
        let f = rrf_fuse(&[&a, &b], 60, 10).unwrap();
        assert_eq!(f.ranked[0].id, "x");
        assert!((f.ranked[0].score - 2.0 / 61.0).abs() < 1e-15);
        let z = f.ranked.iter().find(|s| s.id == "z").unwrap();
        assert!((z.score - 1.0 / 63.0).abs() < 1e-15);
        // y and w both at rank 2 in one run: id order
        assert_eq!(f.ranked[1].id, "w");
        assert!(rrf_fuse(&[&a], 60, 10).is_err());
    }

    #[test]
    fn rrf_three_runs_by_hand() {
        let r1 = run("1", &["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]);
        let r2 = run("2", &["j", "a", "k", "b", "l", "c", "m", "d", "n", "e"]);
        let r3 = run("3", &["c", "o", "a", "p", "b", "q", "j", "r", "s", "t"]);
        let f = rrf_fuse(&[&r1, &r2, &r3], 60, 5).unwrap();
        let s = |ranks: &[u32]| {
            ranks
                .iter()
                .map(|&r| 1.0 / (60.0 + f64::from(r)))
                .sum::<f64>()
        };
        let want = [
            ("a", s(&[1, 2, 3])),
            ("c", s(&[3, 6, 1])),
            ("b", s(&[2, 4, 5])),
            ("j", s(&[10, 1, 7])),
            ("d", s(&[4, 8])),
        ];
        for (got, (id, score)) in f.ranked.iter().zip(want) {
            assert_eq!(got.id, id);
            assert!((got.score - score).abs() < 1e-12);
        }
    }
}
