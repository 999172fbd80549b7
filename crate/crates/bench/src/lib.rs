//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use compcond::rng::{sample_matrix, sample_vector};
use compcond::{Matrix, Pattern, PatternKind, SeedSpec};

/// A seeded sample of the given shape and its right-hand side.
pub fn fixture(kind: PatternKind, n: usize) -> (Matrix, Vec<f64>) {
    let pattern = Arc::new(Pattern::from_kind(kind, n).expect("valid pattern"));
    let seed = SeedSpec::new(0xBE7C, n as u64);
    (sample_matrix(&pattern, seed), sample_vector(n, seed))
}
