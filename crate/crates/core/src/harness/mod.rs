//! Seeded comparison-based optimizers and benchmark objectives.

pub mod objective;
pub mod optimizer;
pub mod rng;

pub use objective::{benchmark_suite, objective_by_id, sample_objective, ObjectiveKind, ObjectiveSpec};
pub use optimizer::{
    optimizer_by_id, run, run_transformed, Eval, Evaluator, OptimizerKind, OptimizerParams,
    OptimizerSpec,
};
pub use rng::{derive_seed, SplitMix64};
