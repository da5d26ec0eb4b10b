//! Friedman test and Bonferroni-corrected critical differences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::RankMatrix;
use crate::special::{chi_square_ln_sf, normal_upper_quantile};

/// Below this, `p_value` is reported as exactly 0.
pub const LOG10_P_FLOOR: f64 = -300.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub log10_p: f64,
    pub avg_ranks: Vec<f64>,
}

/// Friedman statistic on the rank matrix (no tie correction).
///
/// Computed from rank sums `S_j` as `12/(n k (k+1)) Σ S_j² − 3n(k+1)`,
/// which is exact in floating point for integer and half-integer ranks.
pub fn friedman_test(r: &RankMatrix) -> FriedmanResult {
    let k = r.n_algorithms() as f64;
    let n = r.n_problems() as f64;
    let sum_sq: f64 = (0..r.n_algorithms())
        .map(|a| {
            let s: f64 = (0..r.n_problems()).map(|p| r.rank(a, p)).sum();
            s * s
        })
        .sum();
    let chi_square = (12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0)).max(0.0);
    let df = r.n_algorithms().saturating_sub(1);
    let ln_sf = if df == 0 {
        0.0
    } else {
        chi_square_ln_sf(chi_square, df as f64)
    };
    let log10_p = ln_sf / std::f64::consts::LN_10;
    let p_value = if log10_p < LOG10_P_FLOOR {
        0.0
    } else {
        ln_sf.exp().min(1.0)
    };
    FriedmanResult {
        chi_square,
        degrees_of_freedom: df,
        p_value,
        log10_p,
        avg_ranks: r.avg_rank.clone(),
    }
}

/// How many comparisons the significance level is split over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdConvention {
    /// `m = k − 1`: every algorithm against one control (Bonferroni-Dunn).
    ControlBonferroni,
    /// `m = k(k − 1)/2`: all pairs.
    AllpairsBonferroni,
}

impl CdConvention {
    pub fn comparisons(&self, k: usize) -> usize {
        match self {
            CdConvention::ControlBonferroni => k - 1,
            CdConvention::AllpairsBonferroni => k * (k - 1) / 2,
        }
    }

    pub fn short(&self) -> &'static str {
        match self {
            CdConvention::ControlBonferroni => "control",
            CdConvention::AllpairsBonferroni => "allpairs",
        }
    }
}

impl fmt::Display for CdConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CdConvention::ControlBonferroni => "control_bonferroni",
            CdConvention::AllpairsBonferroni => "allpairs_bonferroni",
        })
    }
}

impl FromStr for CdConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "control" | "control_bonferroni" => Ok(CdConvention::ControlBonferroni),
            "allpairs" | "allpairs_bonferroni" => Ok(CdConvention::AllpairsBonferroni),
            _ => Err(Error::InvalidArgument(format!("unknown CD convention `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDifference {
    pub alpha: f64,
    pub k: usize,
    pub n: usize,
    pub convention: CdConvention,
    pub q_alpha: f64,
    pub value: f64,
}

/// `q_α · sqrt(k(k+1)/(6n))` with `q_α = Φ⁻¹(1 − α/(2m))`.
pub fn critical_difference(
    k: usize,
    n: usize,
    alpha: f64,
    convention: CdConvention,
) -> Result<CriticalDifference> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need k ≥ 2 algorithms, got {k}")));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one problem".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    let m = convention.comparisons(k) as f64;
    let q_alpha = normal_upper_quantile(alpha / (2.0 * m));
    let (kf, nf) = (k as f64, n as f64);
    Ok(CriticalDifference {
        alpha,
        k,
        n,
        convention,
        q_alpha,
        value: q_alpha * (kf * (kf + 1.0) / (6.0 * nf)).sqrt(),
    })
}
