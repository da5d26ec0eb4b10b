//! Fixtures shared by the criterion benches.

use critaudit::harness::{objective_by_id, sample_objective};
use critaudit::{paper_dataset, ObjectiveSample, PaperVariant, PerformanceMatrix};

pub fn full_dataset() -> PerformanceMatrix {
    paper_dataset(PaperVariant::Full)
}

/// `size` uniform points of the 2-d sphere.
pub fn sphere_sample(size: usize, seed: u64) -> ObjectiveSample {
    let obj = objective_by_id("sphere-2d").expect("built-in objective");
    sample_objective(&obj, size, seed)
}
