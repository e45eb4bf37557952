use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use agenda_bench::corpus;
use agenda_core::community::leiden_cpm;
use agenda_core::embeddings::topk_neighbors;
use agenda_core::graph::{build_bc_edges, build_graph, GraphParams};
use agenda_core::retrieval::{Bm25Index, Bm25Params};
use agenda_core::IdTable;

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    for n in [5_000, 20_000] {
        let p = corpus(n);
        let members = Arc::new(IdTable::new(p.store.ids().map(str::to_owned)));
        g.bench_with_input(BenchmarkId::new("bc_join", n), &p, |b, p| {
            b.iter(|| build_bc_edges(&p.store, &members, 3, 500))
        });
        let (graph, _) = build_graph(&p.store, &p.citers, &GraphParams::default()).unwrap();
        g.bench_with_input(BenchmarkId::new("leiden", n), &graph, |b, graph| {
            b.iter(|| leiden_cpm(graph, 1e-4, 0, 10).unwrap())
        });
        let pool = IdTable::new(p.embeddings.ids().ids().iter().take(4000).cloned());
        g.bench_with_input(
            BenchmarkId::new("knn_k100", pool.len()),
            &pool,
            |b, pool| b.iter(|| topk_neighbors(&p.embeddings, pool, 100).unwrap()),
        );
        let index = Bm25Index::build(&p.store, Bm25Params::default());
        g.bench_with_input(BenchmarkId::new("bm25_50_queries", n), &p, |b, p| {
            b.iter(|| {
                for q in p.queries.iter().take(50) {
                    index.search(&q.query_id, &q.description, 100, Some(q.domain));
                }
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
