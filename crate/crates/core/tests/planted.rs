use std::collections::BTreeMap;

use agenda_core::community::{hierarchical_l2, leiden_cpm, Partition};
use agenda_core::concordance::concordance_report;
use agenda_core::embeddings::topk_neighbors;
use agenda_core::graph::{build_graph, GraphParams};
use agenda_core::synth::{adjusted_rand_index, generate, Planted, PlantedSpec};

fn restricted(found: &Partition, truth: &Partition) -> BTreeMap<String, u32> {
    found
        .labels()
        .keys()
        .map(|k| (k.clone(), truth.get(k).unwrap()))
        .collect()
}

fn recover(p: &Planted, seed: u64) -> (f64, f64) {
    let (g, _) = build_graph(&p.store, &p.citers, &GraphParams::default()).unwrap();
    let l1 = leiden_cpm(&g, 1e-4, seed, 10).unwrap();
    let l2 = hierarchical_l2(&g, &l1, 1e-2, 50, seed, 10).unwrap();
    l2.check_refines(&l1).unwrap();
    (
        adjusted_rand_index(l1.labels(), &restricted(&l1, &p.truth.l1)).unwrap(),
        adjusted_rand_index(l2.labels(), &restricted(&l2, &p.truth.l2)).unwrap(),
    )
}

#[test]
fn strong_spec_recovers_both_levels() {
    for seed in 0..3 {
        let p = generate(&PlantedSpec {
            seed,
            ..PlantedSpec::strong()
        })
        .unwrap();
        let (a1, a2) = recover(&p, seed);
        assert!(a1 >= 0.9 && a2 >= 0.9, "seed {seed}: {a1} {a2}");
    }
}

#[test]
fn eight_blocks() {
    let spec = PlantedSpec {
        n_l1: 8,
        l2_per_l1: 1,
        ..PlantedSpec::strong()
    };
    let p = generate(&spec).unwrap();
    let (g, _) = build_graph(&p.store, &p.citers, &GraphParams::default()).unwrap();
    let l1 = leiden_cpm(&g, 1e-3, 4, 10).unwrap();
    let ari = adjusted_rand_index(l1.labels(), &restricted(&l1, &p.truth.l1)).unwrap();
    assert!(ari >= 0.95, "{ari}");
}

#[test]
fn equal_probabilities_plant_nothing() {
    let mut aris = Vec::new();
    for seed in 0..5 {
        let spec = PlantedSpec {
            p_ref_in_l2: 0.02,
            p_ref_in_l1: 0.02,
            p_ref_cross: 0.02,
            p_cite_in_l2: 0.01,
            p_cite_in_l1: 0.01,
            p_cite_cross: 0.01,
            p_citer_in_l2: 0.0,
            seed,
            ..PlantedSpec::strong()
        };
        let p = generate(&spec).unwrap();
        let (g, _) = build_graph(&p.store, &p.citers, &GraphParams::default()).unwrap();
        let found = leiden_cpm(&g, 0.05, seed, 10).unwrap();
        aris.push(adjusted_rand_index(found.labels(), &restricted(&found, &p.truth.l2)).unwrap());
    }
    let mean = aris.iter().sum::<f64>() / aris.len() as f64;
    assert!(mean.abs() < 0.05, "{aris:?}");
}

#[test]
fn l2_recovery_grows_with_in_l2_references() {
    let mut means = Vec::new();
    for p_in in [0.1, 0.2, 0.3] {
        let mut sum = 0.0;
        for seed in 0..10 {
            let spec = PlantedSpec {
                p_ref_in_l2: p_in,
                p_cite_in_l2: 0.02,
                citers_per_l2: 0,
                seed,
                ..PlantedSpec::strong()
            };
            sum += recover(&generate(&spec).unwrap(), seed).1;
        }
        means.push(sum / 10.0);
    }
    assert!(means.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{means:?}");
    assert!(means[2] > means[0], "{means:?}");
}

#[test]
fn embeddings_encode_l1_more_than_l2() {
    let p = generate(&PlantedSpec::hierarchical_gap()).unwrap();
    let t = topk_neighbors(&p.embeddings, p.embeddings.ids(), 10).unwrap();
    let r1 = concordance_report("toy", "all", &t, &p.truth.l1, &[10]).unwrap();
    let r2 = concordance_report("toy", "all", &t, &p.truth.l2, &[10]).unwrap();
    assert!(r1.cumulative_topk[&10] - r2.cumulative_topk[&10] >= 0.2);
    assert!(r2.enrichment[&10] > 1.0);
}
