//! Audits for optimization performance metrics and algorithm-ranking
//! methods.
//!
//! Metrics are checked for invariance under strictly increasing
//! re-modellings of the objective ([`iso_audit`]); ranking methods are
//! checked for independence of irrelevant alternatives ([`iia`]). The
//! [`generators`] module builds the adversarial datasets, and [`harness`]
//! provides seeded comparison-based optimizers to produce traces.

pub mod error;
pub mod generators;
pub mod harness;
pub mod iia;
pub mod iso_audit;
pub mod matrix;
pub mod metrics;
pub mod rank;
pub mod ranking;
pub mod report;
pub mod special;
pub mod trace;
pub mod transform;

pub use error::{Error, Result};
pub use generators::{order_consistent, paper_dataset, random_matrix, DatasetSpec, PaperVariant};
pub use harness::{ObjectiveSpec, OptimizerSpec, SplitMix64};
pub use iia::{
    augment_random, iia_check, rank_insensitivity_probe, simpson_check, stability_curve,
    AugmentSource, IIAAudit, IIAViolationReport, StabilityCurve, SubsetStrategy,
};
pub use iso_audit::{audit_metric, perturbation_audit, trace_invariance_check, IsoAuditReport, Verdict};
pub use matrix::PerformanceMatrix;
pub use metrics::{MetricCase, MetricId};
pub use rank::{pairs_to_ranks, ranks_to_pairs, to_pairwise, to_ranks, PairwiseOutcomes, PairwiseWinMatrix, RankMatrix};
pub use ranking::{
    bt_compare, bt_fit, compare_avg_rank, critical_difference, friedman_test, BradleyTerryFit,
    BtOptions, CdConvention, ComparisonMethod, ComparisonOutcome, CriticalDifference,
    FriedmanResult, Preference,
};
pub use report::{Report, ReportBody, SCHEMA_VERSION};
pub use trace::{ObjectiveSample, ParetoCase, ParetoPoint, SearchTrace};
pub use transform::{transform_suite, MonotoneTransform};
