use std::collections::BTreeSet;
use std::sync::Arc;

use super::{AugmentedGraph, EdgeLayer, GraphError, LayerKind, MergedEdge};
use crate::ids::IdTable;

/// Sums the three layers per pair. The node set is the union of endpoints.
pub fn merge_layers(
    direct: &EdgeLayer,
    bc: &EdgeLayer,
    cc: &EdgeLayer,
) -> Result<AugmentedGraph, GraphError> {
    let members = &direct.members;
    if !Arc::ptr_eq(members, &bc.members) && members != &bc.members
        || !Arc::ptr_eq(members, &cc.members) && members != &cc.members
    {
        return Err(GraphError::MemberMismatch);
    }
    let mut all: Vec<(u32, u32, LayerKind, f64)> =
        Vec::with_capacity(direct.len() + bc.len() + cc.len());
    for layer in [direct, bc, cc] {
        all.extend(layer.edges.iter().map(|e| (e.a, e.b, layer.kind, e.w)));
    }
    all.sort_unstable_by_key(|&(a, b, k, _)| (a, b, k));

    let mut merged: Vec<(u32, u32, [f64; 3])> = Vec::new();
    for (a, b, kind, w) in all {
        if merged.last().map(|m| (m.0, m.1)) != Some((a, b)) {
            merged.push((a, b, [0.0; 3]));
        }
        let slot = &mut merged.last_mut().unwrap().2;
        slot[kind as usize] += w;
    }

    let mut used = vec![false; members.len()];
    for &(a, b, _) in &merged {
        used[a as usize] = true;
        used[b as usize] = true;
    }
    let mut remap = vec![u32::MAX; members.len()];
    let mut kept = Vec::new();
    for (i, u) in used.iter().enumerate() {
        if *u {
            remap[i] = kept.len() as u32;
            kept.push(members.id(i as u32).to_owned());
        }
    }
    let edges = merged
        .into_iter()
        .map(|(a, b, w)| MergedEdge::new(remap[a as usize], remap[b as usize], w[0], w[1], w[2]))
        .collect();
    AugmentedGraph::new(IdTable::new(kept), edges)
}

/// Restricts the graph to `universe` and lists universe members without any
/// edge. Edges with an endpoint outside the universe are dropped.
pub fn remove_orphans<'a>(
    graph: &AugmentedGraph,
    universe: impl IntoIterator<Item = &'a str>,
) -> (AugmentedGraph, Vec<String>) {
    let universe: BTreeSet<&str> = universe.into_iter().collect();
    let nodes = graph.nodes();
    let inside: Vec<bool> = nodes
        .ids()
        .iter()
        .map(|id| universe.contains(id.as_str()))
        .collect();
    let mut used = vec![false; nodes.len()];
    let mut edges = Vec::with_capacity(graph.edge_count());
    for e in graph.edges() {
        if inside[e.a as usize] && inside[e.b as usize] {
            used[e.a as usize] = true;
            used[e.b as usize] = true;
            edges.push(*e);
        }
    }
    let orphans: Vec<String> = universe
        .iter()
        .filter(|id| nodes.index_of(id).is_none_or(|i| !used[i as usize]))
        .map(|s| (*s).to_owned())
        .collect();
    if used.iter().all(|&u| u) {
        return (graph.clone(), orphans);
    }
    let mut remap = vec![u32::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (i, u) in used.iter().enumerate() {
        if *u {
            remap[i] = kept.len() as u32;
            kept.push(nodes.id(i as u32).to_owned());
        }
    }
    for e in &mut edges {
        e.a = remap[e.a as usize];
        e.b = remap[e.b as usize];
    }
    let g = AugmentedGraph::new(IdTable::new(kept), edges).expect("subgraph of a valid graph");
    (g, orphans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{LayerEdge, LayerReport};

    fn layer(kind: LayerKind, m: &Arc<IdTable>, edges: &[(&str, &str, f64)]) -> EdgeLayer {
        let mut es: Vec<LayerEdge> = edges
            .iter()
            .map(|(a, b, w)| LayerEdge {
                a: m.index_of(a).unwrap(),
                b: m.index_of(b).unwrap(),
                w: *w,
            })
            .collect();
        es.sort_by_key(|e| (e.a, e.b));
        EdgeLayer {
            kind,
            members: Arc::clone(m),
            edges: es,
            report: LayerReport::default(),
        }
    }

    #[test]
    fn all_three_layers_sum() {
        let m = Arc::new(IdTable::new(["a", "b", "z"]));
        let g = merge_layers(
            &layer(LayerKind::Direct, &m, &[("a", "b", 1.0)]),
            &layer(LayerKind::Bc, &m, &[("a", "b", 0.25)]),
            &layer(LayerKind::Cc, &m, &[("a", "b", 0.4)]),
        )
        .unwrap();
        assert_eq!(g.nodes().ids(), &["a", "b"]);
        let e = g.edges()[0];
        assert_eq!(e.w_total, 1.65);
        assert_eq!((e.w_direct, e.w_bc, e.w_cc), (1.0, 0.25, 0.4));
    }

    #[test]
    fn hand_merged_fixture() {
        let ids = ["p0", "p1", "p2", "p3", "p4", "p5"];
        let m = Arc::new(IdTable::new(ids));
        let direct = layer(
            LayerKind::Direct,
            &m,
            &[
                ("p0", "p1", 1.0),
                ("p0", "p2", 1.0),
                ("p3", "p4", 1.0),
                ("p1", "p5", 1.0),
            ],
        );
        let bc = layer(
            LayerKind::Bc,
            &m,
            &[
                ("p0", "p1", 0.5),
                ("p2", "p3", 0.2),
                ("p3", "p4", 0.75),
                ("p4", "p5", 0.1),
            ],
        );
        let cc = layer(
            LayerKind::Cc,
            &m,
            &[
                ("p0", "p1", 0.125),
                ("p2", "p3", 0.3),
                ("p0", "p5", 0.6),
                ("p2", "p4", 0.9),
            ],
        );
        let g = merge_layers(&direct, &bc, &cc).unwrap();
        let want: Vec<(&str, &str, f64, f64, f64, f64)> = vec![
            ("p0", "p1", 1.625, 1.0, 0.5, 0.125),
            ("p0", "p2", 1.0, 1.0, 0.0, 0.0),
            ("p0", "p5", 0.6, 0.0, 0.0, 0.6),
            ("p1", "p5", 1.0, 1.0, 0.0, 0.0),
            ("p2", "p3", 0.5, 0.0, 0.2, 0.3),
            ("p2", "p4", 0.9, 0.0, 0.0, 0.9),
            ("p3", "p4", 1.75, 1.0, 0.75, 0.0),
            ("p4", "p5", 0.1, 0.0, 0.1, 0.0),
        ];
        let got: Vec<_> = g
            .named_edges()
            .map(|(a, b, e)| (a, b, e.w_total, e.w_direct, e.w_bc, e.w_cc))
            .collect();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!((g.0, g.1), (w.0, w.1));
            assert!((g.2 - w.2).abs() < 1e-15, "{g:?} vs {w:?}");
            assert_eq!((g.3, g.4, g.5), (w.3, w.4, w.5));
        }
        for e in g.edges() {
            assert_eq!(e.w_total - (e.w_direct + e.w_bc + e.w_cc), 0.0);
        }
    }

    #[test]
    fn mismatched_members_rejected() {
        let m1 = Arc::new(IdTable::new(["a", "b"]));
        let m2 = Arc::new(IdTable::new(["a", "c"]));
        let l = layer(LayerKind::Direct, &m1, &[]);
        let r = merge_layers(
            &l,
            &layer(LayerKind::Bc, &m2, &[]),
            &layer(LayerKind::Cc, &m1, &[]),
        );
        assert!(matches!(r, Err(GraphError::MemberMismatch)));
    }

    #[test]
    fn orphans_listed() {
        let g = AugmentedGraph::from_weighted([], [("a", "b", 1.0), ("b", "c", 0.5)]).unwrap();
        let (g2, orphans) = remove_orphans(&g, ["a", "b", "c", "d"]);
        assert_eq!(orphans, vec!["d"]);
        assert_eq!(g2, g);
        let (_, none) = remove_orphans(&g, ["a", "b", "c"]);
        assert!(none.is_empty());
        let (g3, orph) = remove_orphans(&g, ["a", "b"]);
        assert!(orph.is_empty());
        assert_eq!(g3.nodes().ids(), &["a", "b"]);
    }

    #[test]
    fn planted_isolation_fraction() {
        let ids: Vec<String> = (0..100).map(|i| format!("n{i:03}")).collect();
        let edges: Vec<(&str, &str, f64)> = (0..89)
            .map(|i| (ids[i].as_str(), ids[i + 1].as_str(), 1.0))
            .collect();
        let g = AugmentedGraph::from_weighted([], edges).unwrap();
        let (_, orphans) = remove_orphans(&g, ids.iter().map(String::as_str));
        assert_eq!(orphans.len() as f64 / 100.0, 0.10);
    }
}
