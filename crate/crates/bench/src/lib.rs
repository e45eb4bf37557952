//! Criterion benchmarks for the hot paths; see `benches/pipeline.rs`.

use agenda_core::synth::{generate, Planted, PlantedSpec};

/// Planted corpus of roughly `n` papers at seed 0.
pub fn corpus(n: usize) -> Planted {
    generate(&PlantedSpec::scale(n)).expect("scale preset is valid")
}
