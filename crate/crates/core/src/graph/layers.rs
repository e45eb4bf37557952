use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{CiterTable, EdgeLayer, GraphError, LayerEdge, LayerKind, LayerReport};
use crate::corpus::CorpusStore;
use crate::ids::IdTable;

/// `shared / sqrt(size_a * size_b)`.
pub fn salton_cosine(shared: usize, size_a: usize, size_b: usize) -> Result<f64, GraphError> {
    if size_a == 0 || size_b == 0 {
        return Err(GraphError::EmptySet { size_a, size_b });
    }
    if shared > size_a || shared > size_b {
        return Err(GraphError::SharedExceedsSize {
            shared,
            size_a,
            size_b,
        });
    }
    if shared == size_a && shared == size_b {
        return Ok(1.0);
    }
    Ok(shared as f64 / ((size_a as f64) * (size_b as f64)).sqrt())
}

/// Undirected member-to-member citation edges of weight 1.0.
pub fn build_direct_edges(store: &CorpusStore, members: &Arc<IdTable>) -> EdgeLayer {
    let mut report = LayerReport::default();
    let mut pairs = Vec::new();
    for (a, id) in members.ids().iter().enumerate() {
        let Some(rec) = store.get(id) else { continue };
        for r in &rec.references {
            if r == id {
                report.self_references += 1;
                log::warn!("{id} lists itself as a reference; ignored");
                continue;
            }
            if let Some(b) = members.index_of(r) {
                let a = a as u32;
                pairs.push(if a < b { (a, b) } else { (b, a) });
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    EdgeLayer {
        kind: LayerKind::Direct,
        members: Arc::clone(members),
        edges: pairs
            .into_iter()
            .map(|(a, b)| LayerEdge { a, b, w: 1.0 })
            .collect(),
        report,
    }
}

/// Bibliographic coupling over the members' full reference lists.
///
/// References cited by more than `hot_ref_cap` members never count towards
/// the shared total, but the Salton denominators use the full `|R(a)|`.
pub fn build_bc_edges(
    store: &CorpusStore,
    members: &Arc<IdTable>,
    min_shared: usize,
    hot_ref_cap: usize,
) -> EdgeLayer {
    let mut report = LayerReport::default();
    let mut ref_index: HashMap<&str, u32> = HashMap::new();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(members.len());
    for id in members.ids() {
        let mut row = Vec::new();
        if let Some(rec) = store.get(id) {
            for r in &rec.references {
                if r == id {
                    report.self_references += 1;
                    log::warn!("{id} lists itself as a reference; ignored");
                    continue;
                }
                let next = ref_index.len() as u32;
                row.push(*ref_index.entry(r.as_str()).or_insert(next));
            }
        }
        row.sort_unstable();
        row.dedup();
        if row.is_empty() {
            report.skipped_empty += 1;
        }
        rows.push(row);
    }
    let (edges, capped) = coupling_join(&rows, ref_index.len(), min_shared, hot_ref_cap);
    report.capped = capped;
    EdgeLayer {
        kind: LayerKind::Bc,
        members: Arc::clone(members),
        edges,
        report,
    }
}

/// Co-citation over external citers. Citers citing more than `citer_cap`
/// members are dropped entirely, so the Salton denominators count only the
/// remaining citers. Cited ids outside `members` are ignored.
pub fn build_cc_edges(
    citers: &CiterTable,
    members: &Arc<IdTable>,
    min_cociters: usize,
    citer_cap: usize,
) -> EdgeLayer {
    let mut report = LayerReport::default();
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); members.len()];
    let mut kept = 0u32;
    for (citer, cited) in &citers.citers {
        let mut targets: Vec<u32> = Vec::with_capacity(cited.len());
        for c in cited {
            if c == citer {
                report.self_references += 1;
                log::warn!("{citer} lists itself as a reference; ignored");
                continue;
            }
            if let Some(i) = members.index_of(c) {
                targets.push(i);
            }
        }
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            continue;
        }
        if targets.len() > citer_cap {
            report.capped += 1;
            continue;
        }
        for t in targets {
            rows[t as usize].push(kept);
        }
        kept += 1;
    }
    report.skipped_empty = rows.iter().filter(|r| r.is_empty()).count();
    let (edges, _) = coupling_join(&rows, kept as usize, min_cociters, usize::MAX);
    EdgeLayer {
        kind: LayerKind::Cc,
        members: Arc::clone(members),
        edges,
        report,
    }
}

/// Pairs of rows sharing at least `min_shared` items, counted through the
/// item -> rows inverted lists. Items held by more than `cap` rows are
/// excluded from counting. Returns sorted edges and the number of capped
/// items.
fn coupling_join(
    rows: &[Vec<u32>],
    n_items: usize,
    min_shared: usize,
    cap: usize,
) -> (Vec<LayerEdge>, usize) {
    let mut holders: Vec<Vec<u32>> = vec![Vec::new(); n_items];
    for (a, row) in rows.iter().enumerate() {
        for &it in row {
            holders[it as usize].push(a as u32);
        }
    }
    let mut capped = 0;
    for h in holders.iter_mut() {
        if h.len() > cap {
            h.clear();
            h.shrink_to_fit();
            capped += 1;
        }
    }
    let min_shared = min_shared.max(1) as u32;
    let n = rows.len();

    let per_row: Vec<Vec<LayerEdge>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], Vec::<u32>::new()),
            |(counts, touched), a| {
                for &it in &rows[a] {
                    let h = &holders[it as usize];
                    // holder lists are ascending; only partners b > a
                    let start = h.partition_point(|&b| b as usize <= a);
                    for &b in &h[start..] {
                        if counts[b as usize] == 0 {
                            touched.push(b);
                        }
                        counts[b as usize] += 1;
                    }
                }
                touched.sort_unstable();
                let mut out = Vec::new();
                for &b in touched.iter() {
                    let c = counts[b as usize];
                    counts[b as usize] = 0;
                    if c >= min_shared {
                        let w = salton_cosine(c as usize, rows[a].len(), rows[b as usize].len())
                            .expect("rows holding a shared item are non-empty");
                        out.push(LayerEdge { a: a as u32, b, w });
                    }
                }
                touched.clear();
                out
            },
        )
        .collect();
    (per_row.into_iter().flatten().collect(), capped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest, Domain, MergePolicy, PaperRecord};
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn store(refs: &[(&str, &[&str])]) -> CorpusStore {
        let recs: Vec<PaperRecord> = refs
            .iter()
            .map(|(id, rs)| {
                let mut r = PaperRecord::new(*id, format!("title {id}"), Domain::Physics);
                r.references = rs.iter().map(|s| s.to_string()).collect();
                r
            })
            .collect();
        ingest(recs, MergePolicy::default()).store
    }

    fn members(ids: &[&str]) -> Arc<IdTable> {
        Arc::new(IdTable::new(ids.iter().copied()))
    }

    #[test]
    fn salton_examples() {
        assert_eq!(salton_cosine(3, 9, 16).unwrap(), 0.25);
        assert_eq!(salton_cosine(7, 7, 7).unwrap(), 1.0);
        assert_eq!(salton_cosine(0, 4, 5).unwrap(), 0.0);
        assert!(salton_cosine(0, 0, 5).is_err());
        assert!(salton_cosine(3, 2, 5).is_err());
    }

    #[test]
    fn direct_edges() {
        let s = store(&[("a", &["b", "x"]), ("b", &["a"]), ("c", &["c", "a"])]);
        let layer = build_direct_edges(&s, &members(&["a", "b", "c"]));
        let got: Vec<_> = layer.named_edges().collect();
        assert_eq!(got, vec![("a", "b", 1.0), ("a", "c", 1.0)]);
        assert_eq!(layer.report.self_references, 1);
    }

    #[test]
    fn bc_threshold_and_identity() {
        let s = store(&[
            ("a", &["r1", "r2", "r3"]),
            ("b", &["r1", "r2", "r3"]),
            ("c", &["r1", "r2", "r9"]),
            ("d", &[]),
        ]);
        let layer = build_bc_edges(&s, &members(&["a", "b", "c", "d"]), 3, 500);
        let got: Vec<_> = layer.named_edges().collect();
        assert_eq!(got, vec![("a", "b", 1.0)]);
        assert_eq!(layer.report.skipped_empty, 1);
    }

    #[test]
    fn bc_hot_reference_keeps_full_denominator() {
        // "hot" is cited by all three papers; with cap 2 it is excluded.
        let s = store(&[
            ("a", &["hot", "r1", "r2", "r3"]),
            ("b", &["hot", "r1", "r2", "r3"]),
            ("c", &["hot", "x"]),
        ]);
        let m = members(&["a", "b", "c"]);
        let open = build_bc_edges(&s, &m, 3, 500);
        let got: Vec<_> = open.named_edges().collect();
        assert_eq!(got, vec![("a", "b", 1.0)]);
        let capped = build_bc_edges(&s, &m, 3, 2);
        let got: Vec<_> = capped.named_edges().collect();
        assert_eq!(got, vec![("a", "b", 0.75)]);
        assert_eq!(capped.report.capped, 1);
    }

    #[test]
    fn cc_three_shared_citers() {
        let mut t = CiterTable::default();
        for c in ["x", "y", "z"] {
            t.insert(c, ["a".to_string(), "b".to_string()]);
        }
        t.insert("w", ["a".to_string(), "c".to_string()]);
        let layer = build_cc_edges(&t, &members(&["a", "b", "c"]), 3, 200);
        let got: Vec<_> = layer.named_edges().collect();
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].0, got[0].1), ("a", "b"));
        assert!((got[0].2 - 3.0 / (4.0f64 * 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cc_two_common_citers_is_no_edge() {
        let mut t = CiterTable::default();
        for c in ["x", "y"] {
            t.insert(c, ["a".to_string(), "b".to_string()]);
        }
        let layer = build_cc_edges(&t, &members(&["a", "b"]), 3, 200);
        assert!(layer.is_empty());
    }

    #[test]
    fn cc_cap_drops_citer_entirely() {
        let mut t = CiterTable::default();
        for c in ["x", "y", "z"] {
            t.insert(c, ["a".to_string(), "b".to_string()]);
        }
        t.insert("survey", ["a", "b", "c"].map(String::from));
        let layer = build_cc_edges(&t, &members(&["a", "b", "c"]), 3, 2);
        assert_eq!(layer.edges[0].w, 1.0);
        assert_eq!(layer.report.capped, 1);
    }

    fn brute_bc(
        rows: &BTreeMap<String, BTreeSet<String>>,
        min_shared: usize,
        cap: usize,
    ) -> BTreeMap<(String, String), f64> {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for r in rows.values() {
            for x in r {
                *df.entry(x).or_default() += 1;
            }
        }
        let mut out = BTreeMap::new();
        let ids: Vec<_> = rows.keys().collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let (ra, rb) = (&rows[ids[i]], &rows[ids[j]]);
                let shared = ra
                    .intersection(rb)
                    .filter(|x| df[x.as_str()] <= cap)
                    .count();
                if shared >= min_shared && shared > 0 {
                    let w = shared as f64 / ((ra.len() * rb.len()) as f64).sqrt();
                    out.insert((ids[i].clone(), ids[j].clone()), w);
                }
            }
        }
        out
    }

    fn random_rows(
        n: usize,
        n_refs: usize,
        len: usize,
        seed: u64,
    ) -> BTreeMap<String, BTreeSet<String>> {
        use rand::Rng;
        let mut rng = crate::seeds::rng_for(seed, &[]);
        (0..n)
            .map(|i| {
                let k = rng.random_range(0..=len);
                let refs = (0..k)
                    .map(|_| format!("r{}", rng.random_range(0..n_refs)))
                    .collect();
                (format!("p{i:04}"), refs)
            })
            .collect()
    }

    #[test]
    fn bc_matches_brute_force_on_300_papers() {
        let rows = random_rows(300, 120, 25, 11);
        let recs: Vec<_> = rows
            .iter()
            .map(|(id, refs)| {
                let mut r = PaperRecord::new(id.clone(), format!("t {id}"), Domain::Biology);
                r.references = refs.iter().cloned().collect();
                r
            })
            .collect();
        let s = ingest(recs, MergePolicy::default()).store;
        let m = Arc::new(IdTable::new(rows.keys().cloned()));
        for cap in [500, 40, 20] {
            let layer = build_bc_edges(&s, &m, 3, cap);
            let got: BTreeMap<(String, String), f64> = layer
                .named_edges()
                .map(|(a, b, w)| ((a.to_owned(), b.to_owned()), w))
                .collect();
            let want = brute_bc(&rows, 3, cap);
            assert_eq!(
                got.keys().collect::<Vec<_>>(),
                want.keys().collect::<Vec<_>>()
            );
            for (k, w) in &want {
                assert!((got[k] - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cc_matches_brute_force_on_300_papers() {
        // citer -> cited members; invert to member -> citers for the oracle
        let table = random_rows(1500, 300, 40, 5);
        let member_ids: Vec<String> = (0..300).map(|i| format!("r{i}")).collect();
        let m = Arc::new(IdTable::new(member_ids.iter().cloned()));
        let mut t = CiterTable::default();
        for (c, cited) in &table {
            t.insert(c.clone(), cited.iter().cloned());
        }
        let cap = 30;
        let mut inv: BTreeMap<String, BTreeSet<String>> = member_ids
            .iter()
            .map(|id| (id.clone(), BTreeSet::new()))
            .collect();
        for (c, cited) in &table {
            if cited.len() <= cap {
                for x in cited {
                    inv.get_mut(x).unwrap().insert(c.clone());
                }
            }
        }
        let want = brute_bc(&inv, 3, usize::MAX);
        let layer = build_cc_edges(&t, &m, 3, cap);
        let got: BTreeMap<(String, String), f64> = layer
            .named_edges()
            .map(|(a, b, w)| ((a.to_owned(), b.to_owned()), w))
            .collect();
        assert!(!want.is_empty());
        assert_eq!(
            got.keys().collect::<Vec<_>>(),
            want.keys().collect::<Vec<_>>()
        );
        for (k, w) in &want {
            assert!((got[k] - w).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lowering_the_cap_never_adds_edges(seed in 0u64..1000, cap in 1usize..30) {
            let rows = random_rows(60, 40, 10, seed);
            let recs: Vec<_> = rows.iter().map(|(id, refs)| {
                let mut r = PaperRecord::new(id.clone(), format!("t {id}"), Domain::Biology);
                r.references = refs.iter().cloned().collect();
                r
            }).collect();
            let s = ingest(recs, MergePolicy::default()).store;
            let m = Arc::new(IdTable::new(rows.keys().cloned()));
            let hi = build_bc_edges(&s, &m, 2, cap + 5).len();
            let lo = build_bc_edges(&s, &m, 2, cap).len();
            prop_assert!(lo <= hi);
        }

        #[test]
        fn row_permutation_is_irrelevant(seed in 0u64..1000) {
            let rows = random_rows(50, 30, 10, seed);
            let build = |rev: bool| {
                let mut recs: Vec<_> = rows.iter().map(|(id, refs)| {
                    let mut r = PaperRecord::new(id.clone(), format!("t {id}"), Domain::Biology);
                    r.references = refs.iter().cloned().collect();
                    if rev { r.references.reverse(); }
                    r
                }).collect();
                if rev { recs.reverse(); }
                let s = ingest(recs, MergePolicy::default()).store;
                let m = Arc::new(IdTable::new(rows.keys().cloned()));
                build_bc_edges(&s, &m, 2, 500).edges
            };
            prop_assert_eq!(build(false), build(true));
        }

        #[test]
        fn weights_in_unit_interval(seed in 0u64..1000) {
            let rows = random_rows(50, 20, 10, seed);
            let recs: Vec<_> = rows.iter().map(|(id, refs)| {
                let mut r = PaperRecord::new(id.clone(), format!("t {id}"), Domain::Biology);
                r.references = refs.iter().cloned().collect();
                r
            }).collect();
            let s = ingest(recs, MergePolicy::default()).store;
            let m = Arc::new(IdTable::new(rows.keys().cloned()));
            for e in build_bc_edges(&s, &m, 1, 500).edges {
                prop_assert!(e.w > 0.0 && e.w <= 1.0);
                prop_assert!(e.a < e.b);
            }
        }
    }
}
