use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::parse::{Atom, QueryAst};
use crate::corpus::{CorpusStore, Domain};
use crate::ids::IdTable;
use crate::text::for_each_token;

/// Abstract positions start this far past the last title position, so a
/// phrase never spans the two fields.
const FIELD_GAP: u32 = 1;

const SHARD: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub positions: Vec<u32>,
}

/// Positional index over title and abstract. Documents are numbered in id
/// order, so postings are sorted by id.
#[derive(Debug, Clone, Default)]
pub struct InvertedIndex {
    docs: IdTable,
    postings: HashMap<String, Vec<Posting>>,
    by_domain: BTreeMap<Domain, Vec<u32>>,
}

fn doc_postings(title: &str, abstract_text: &str) -> HashMap<String, Vec<u32>> {
    let mut out: HashMap<String, Vec<u32>> = HashMap::new();
    let mut pos = 0u32;
    for_each_token(title, |t| {
        out.entry(t.to_owned()).or_default().push(pos);
        pos += 1;
    });
    pos += FIELD_GAP;
    for_each_token(abstract_text, |t| {
        out.entry(t.to_owned()).or_default().push(pos);
        pos += 1;
    });
    out
}

impl InvertedIndex {
    pub fn build(store: &CorpusStore) -> Self {
        let records: Vec<_> = store.records().collect();
        let docs = IdTable::new(records.iter().map(|r| r.paper_id.clone()));
        let shards: Vec<HashMap<String, Vec<Posting>>> = records
            .par_chunks(SHARD)
            .enumerate()
            .map(|(s, chunk)| {
                let mut local: HashMap<String, Vec<Posting>> = HashMap::new();
                for (j, r) in chunk.iter().enumerate() {
                    let doc = (s * SHARD + j) as u32;
                    for (t, positions) in doc_postings(&r.title, &r.abstract_text) {
                        local.entry(t).or_default().push(Posting { doc, positions });
                    }
                }
                local
            })
            .collect();
        let mut postings: HashMap<String, Vec<Posting>> = HashMap::new();
        for shard in shards {
            for (t, mut list) in shard {
                postings.entry(t).or_default().append(&mut list);
            }
        }
        // shards are appended in order, but a shard's own lists are not
        postings
            .par_iter_mut()
            .for_each(|(_, l)| l.sort_unstable_by_key(|p| p.doc));
        let mut by_domain: BTreeMap<Domain, Vec<u32>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            by_domain.entry(r.domain).or_default().push(i as u32);
        }
        Self {
            docs,
            postings,
            by_domain,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn postings(&self, token: &str) -> &[Posting] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    fn atom_docs(&self, atom: &Atom) -> Vec<u32> {
        let toks = atom.tokens();
        if toks.len() == 1 {
            return self.postings(&toks[0]).iter().map(|p| p.doc).collect();
        }
        let lists: Vec<&[Posting]> = toks.iter().map(|t| self.postings(t)).collect();
        let mut cursors = vec![0usize; lists.len()];
        let mut out = Vec::new();
        'outer: for first in lists[0] {
            let mut rest = Vec::with_capacity(lists.len() - 1);
            for (k, list) in lists.iter().enumerate().skip(1) {
                let c = &mut cursors[k];
                while *c < list.len() && list[*c].doc < first.doc {
                    *c += 1;
                }
                if *c == list.len() {
                    break 'outer;
                }
                if list[*c].doc != first.doc {
                    continue 'outer;
                }
                rest.push(&list[*c].positions);
            }
            let hit = first.positions.iter().any(|&p| {
                rest.iter()
                    .enumerate()
                    .all(|(k, ps)| ps.binary_search(&(p + k as u32 + 1)).is_ok())
            });
            if hit {
                out.push(first.doc);
            }
        }
        out
    }
}

fn union(mut a: Vec<u32>, b: Vec<u32>) -> Vec<u32> {
    a.extend(b);
    a.sort_unstable();
    a.dedup();
    a
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Ids of documents matching every group, ascending. With `domain`, only
/// documents of that domain are returned.
pub fn evaluate(ast: &QueryAst, index: &InvertedIndex, domain: Option<Domain>) -> Vec<String> {
    let mut sets: Vec<Vec<u32>> = ast
        .groups
        .iter()
        .map(|g| {
            g.atoms
                .iter()
                .fold(Vec::new(), |acc, a| union(acc, index.atom_docs(a)))
        })
        .collect();
    if let Some(d) = domain {
        sets.push(index.by_domain.get(&d).cloned().unwrap_or_default());
    }
    sets.sort_by_key(Vec::len);
    let mut it = sets.into_iter();
    let mut acc = it.next().unwrap_or_default();
    for s in it {
        if acc.is_empty() {
            break;
        }
        acc = intersect(&acc, &s);
    }
    acc.into_iter()
        .map(|d| index.docs.id(d).to_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolquery::parse_query;
    use crate::corpus::{ingest, MergePolicy, PaperRecord};
    use crate::text::tokenize;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn store(docs: &[(&str, &str, &str, Domain)]) -> CorpusStore {
        let recs: Vec<PaperRecord> = docs
            .iter()
            .map(|(id, t, a, d)| {
                let mut r = PaperRecord::new(*id, *t, *d);
                r.abstract_text = a.to_string();
                r.authors = vec![id.to_string()];
                r
            })
            .collect();
        ingest(recs, MergePolicy::default()).store
    }

    // Scans each field's token list directly.
    fn scan_matches(q: &QueryAst, title: &str, abs: &str) -> bool {
        let fields = [tokenize(title), tokenize(abs)];
        q.groups.iter().all(|g| {
            g.atoms.iter().any(|a| {
                let t = a.tokens();
                fields.iter().any(|f| f.windows(t.len()).any(|w| w == t))
            })
        })
    }

    #[test]
    fn phrase_adjacency() {
        let s = store(&[
            ("a", "Gene expression profiles", "", Domain::Biology),
            ("b", "expression of the gene", "", Domain::Biology),
            ("c", "gene", "expression in cells", Domain::Biology),
        ]);
        let idx = InvertedIndex::build(&s);
        let q = parse_query("\"gene expression\"").unwrap();
        assert_eq!(evaluate(&q, &idx, None), vec!["a"]);
        let q = parse_query("gene expression").unwrap();
        assert_eq!(evaluate(&q, &idx, None), vec!["a", "b", "c"]);
    }

    #[test]
    fn absent_term_and_domain_filter() {
        let s = store(&[
            ("a", "solar cells", "", Domain::Materials),
            ("b", "solar wind", "", Domain::Physics),
        ]);
        let idx = InvertedIndex::build(&s);
        assert!(evaluate(&parse_query("zebrafish").unwrap(), &idx, None).is_empty());
        let q = parse_query("solar").unwrap();
        assert_eq!(evaluate(&q, &idx, Some(Domain::Physics)), vec!["b"]);
        assert!(evaluate(&q, &idx, Some(Domain::Chemistry)).is_empty());
    }

    #[test]
    fn repeated_token_phrase() {
        let s = store(&[
            ("a", "x y x y z", "", Domain::Biology),
            ("b", "x x", "", Domain::Biology),
        ]);
        let idx = InvertedIndex::build(&s);
        assert_eq!(
            evaluate(&parse_query("\"x y z\"").unwrap(), &idx, None),
            vec!["a"]
        );
        assert_eq!(
            evaluate(&parse_query("\"x x\"").unwrap(), &idx, None),
            vec!["b"]
        );
        let p = idx.postings("x");
        assert_eq!(p[0].positions, vec![0, 2]);
    }

    const VOCAB: [&str; 12] = [
        "alpha", "beta", "gamma", "delta", "zeta", "eta", "theta", "iota", "kappa", "lambda", "mu",
        "nu",
    ];

    fn random_text(rng: &mut ChaCha8Rng, n: usize) -> String {
        (0..n)
            .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
            .collect::<Vec<_>>()
            .join(if rng.random_bool(0.5) { " " } else { "-" })
    }

    fn random_corpus(n: usize, seed: u64) -> (CorpusStore, Vec<(String, String, String)>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut recs = Vec::new();
        let mut raw = Vec::new();
        for i in 0..n {
            let id = format!("d{i:05}");
            let t = random_text(&mut rng, 4);
            let len = rng.random_range(0..12);
            let a = random_text(&mut rng, len);
            let mut r = PaperRecord::new(id.clone(), t.clone(), Domain::ALL[i % 3]);
            r.abstract_text = a.clone();
            r.authors = vec![id.clone()];
            recs.push(r);
            raw.push((id, t, a));
        }
        (ingest(recs, MergePolicy::default()).store, raw)
    }

    fn arb_query() -> impl Strategy<Value = QueryAst> {
        let atom = prop_oneof![
            (0..VOCAB.len()).prop_map(|i| Atom::Term(VOCAB[i].into())),
            prop::collection::vec(0..VOCAB.len(), 2..4)
                .prop_map(|v| Atom::Phrase(v.into_iter().map(|i| VOCAB[i].to_string()).collect())),
        ];
        prop::collection::vec(prop::collection::vec(atom, 1..4), 1..4).prop_map(|gs| QueryAst {
            groups: gs
                .into_iter()
                .map(|atoms| crate::boolquery::Group { atoms })
                .collect(),
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn equals_full_scan(q in arb_query()) {
            let (s, raw) = random_corpus(300, 9);
            let idx = InvertedIndex::build(&s);
            let want: Vec<String> = raw
                .iter()
                .filter(|(_, t, a)| scan_matches(&q, t, a))
                .map(|r| r.0.clone())
                .collect();
            prop_assert_eq!(evaluate(&q, &idx, None), want);
        }

        #[test]
        fn and_restricts_or_widens(q in arb_query(), extra in 0..VOCAB.len()) {
            let (s, _) = random_corpus(200, 3);
            let idx = InvertedIndex::build(&s);
            let base = evaluate(&q, &idx, None);
            let mut narrower = q.clone();
            narrower.groups.push(crate::boolquery::Group { atoms: vec![Atom::Term(VOCAB[extra].into())] });
            let n = evaluate(&narrower, &idx, None);
            prop_assert!(n.iter().all(|id| base.contains(id)));
            let mut wider = q.clone();
            wider.groups[0].atoms.push(Atom::Term(VOCAB[extra].into()));
            let w = evaluate(&wider, &idx, None);
            prop_assert!(base.iter().all(|id| w.contains(id)));
        }
    }

    #[test]
    fn postings_sorted_across_shards() {
        let (s, _) = random_corpus(5000, 1);
        let idx = InvertedIndex::build(&s);
        for t in VOCAB {
            let p = idx.postings(t);
            assert!(p.windows(2).all(|w| w[0].doc < w[1].doc));
            assert!(p
                .iter()
                .all(|x| x.positions.windows(2).all(|w| w[0] < w[1])));
        }
    }
}
