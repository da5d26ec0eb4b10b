//! Algorithm comparison: Friedman test with critical differences, and
//! Bradley-Terry strengths.

mod bradley_terry;
mod friedman;
mod method;

pub use bradley_terry::{bt_fit, reaches, stationarity_residual, win_components, BradleyTerryFit, BtOptions};
pub use friedman::{critical_difference, friedman_test, CdConvention, CriticalDifference, FriedmanResult, LOG10_P_FLOOR};
pub use method::{
    bt_compare, compare_avg_rank, Analysis, AvgRankAnalysis, BtAnalysis, ComparisonMethod,
    ComparisonOutcome, Evidence, Preference, RawMeanAnalysis, DEFAULT_ALPHA,
};
