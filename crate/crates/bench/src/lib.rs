//! Shared fixtures for the pipeline benchmarks.

use fairscore_core::{generate, Scenario, ScenarioSpec, ScoreSet};

/// A tail-biased synthetic dataset at a configurable cell size.
pub fn bg_dataset(n_per_cell: usize) -> ScoreSet {
    let mut spec = ScenarioSpec::new(Scenario::BiasedGenuineTail, 1.0, 42);
    spec.n_genuine = n_per_cell;
    spec.n_impostor = n_per_cell;
    generate(&spec).expect("valid spec")
}
