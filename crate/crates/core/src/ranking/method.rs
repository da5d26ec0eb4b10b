//! Comparison methods behind a common id, and the outcomes they produce.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bradley_terry::{bt_fit, win_components, BradleyTerryFit, BtOptions};
use super::friedman::{critical_difference, friedman_test, CdConvention, CriticalDifference, FriedmanResult};
use crate::error::{Error, Result};
use crate::matrix::PerformanceMatrix;
use crate::rank::{to_pairwise, to_ranks, PairwiseWinMatrix};

pub const DEFAULT_ALPHA: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    AOverB,
    BOverA,
    Indifferent,
}

impl Preference {
    pub fn is_strict(&self) -> bool {
        !matches!(self, Preference::Indifferent)
    }

    pub fn mirror(&self) -> Self {
        match self {
            Preference::AOverB => Preference::BOverA,
            Preference::BOverA => Preference::AOverB,
            Preference::Indifferent => Preference::Indifferent,
        }
    }

    /// Both strict and pointing in opposite directions.
    pub fn opposes(&self, other: &Preference) -> bool {
        self.is_strict() && other.is_strict() && self != other
    }

    fn from_score(score: f64) -> Self {
        if score > 0.0 {
            Preference::AOverB
        } else if score < 0.0 {
            Preference::BOverA
        } else {
            Preference::Indifferent
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    AvgRank {
        avg_rank_a: f64,
        avg_rank_b: f64,
        /// `avg_rank_b − avg_rank_a`
        gap: f64,
        critical_difference: CriticalDifference,
        friedman: FriedmanResult,
    },
    BradleyTerry {
        theta_a: f64,
        theta_b: f64,
        p_a_over_b: f64,
        p_b_over_a: f64,
        /// Algorithms in the fitted component holding the pair.
        component_size: usize,
        /// Set when the pair sits in different components and the
        /// probability is the limit 0 or 1 rather than a fitted value.
        separated: bool,
    },
    RawMean {
        mean_a: f64,
        mean_b: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub a: String,
    pub b: String,
    pub preference: Preference,
    /// Signed strength of the preference; positive favors `a`.
    pub score: f64,
    pub evidence: Evidence,
}

impl ComparisonOutcome {
    pub fn winner(&self) -> Option<&str> {
        match self.preference {
            Preference::AOverB => Some(&self.a),
            Preference::BOverA => Some(&self.b),
            Preference::Indifferent => None,
        }
    }

    /// `"A ≻ B"`, `"B ≻ A"` or `"A ~ B"` with the actual labels.
    pub fn describe(&self) -> String {
        match self.preference {
            Preference::AOverB => format!("{} ≻ {}", self.a, self.b),
            Preference::BOverA => format!("{} ≻ {}", self.b, self.a),
            Preference::Indifferent => format!("{} ~ {}", self.a, self.b),
        }
    }
}

/// Preference toward the lower average rank when the gap exceeds the
/// critical difference.
pub fn compare_avg_rank(
    d: &PerformanceMatrix,
    a: &str,
    b: &str,
    alpha: f64,
    convention: CdConvention,
) -> Result<ComparisonOutcome> {
    let analysis = AvgRankAnalysis::new(d, alpha, convention)?;
    let (ia, ib) = (d.algorithm_index(a)?, d.algorithm_index(b)?);
    Ok(analysis.compare(ia, ib))
}

/// Outcome read from a fit; `a` and `b` must be retained in it.
pub fn bt_compare(fit: &BradleyTerryFit, a: &str, b: &str) -> Result<ComparisonOutcome> {
    let (ta, tb) = (fit.theta_of(a)?, fit.theta_of(b)?);
    Ok(bt_outcome(a, b, ta, tb, fit.theta.len(), false))
}

fn bt_outcome(a: &str, b: &str, ta: f64, tb: f64, size: usize, separated: bool) -> ComparisonOutcome {
    let p = if separated {
        if ta > tb {
            1.0
        } else {
            0.0
        }
    } else {
        ta / (ta + tb)
    };
    ComparisonOutcome {
        a: a.to_string(),
        b: b.to_string(),
        preference: Preference::from_score(p - 0.5),
        score: p - 0.5,
        evidence: Evidence::BradleyTerry {
            theta_a: ta,
            theta_b: tb,
            p_a_over_b: p,
            p_b_over_a: 1.0 - p,
            component_size: size,
            separated,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComparisonMethod {
    FriedmanCd { convention: CdConvention, alpha: f64 },
    BradleyTerry { options: BtOptions },
    /// Compares row means of the raw values; a control that ignores ranks.
    RawMean,
}

impl ComparisonMethod {
    pub fn friedman_cd(convention: CdConvention) -> Self {
        ComparisonMethod::FriedmanCd {
            convention,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn bradley_terry() -> Self {
        ComparisonMethod::BradleyTerry {
            options: BtOptions::default(),
        }
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        match self {
            ComparisonMethod::FriedmanCd { convention, .. } => {
                ComparisonMethod::FriedmanCd { convention, alpha }
            }
            other => other,
        }
    }

    /// Everything needed to answer pairwise queries on `d`.
    pub fn analyze(&self, d: &PerformanceMatrix) -> Result<Analysis> {
        Ok(match self {
            ComparisonMethod::FriedmanCd { convention, alpha } => {
                Analysis::AvgRank(AvgRankAnalysis::new(d, *alpha, *convention)?)
            }
            ComparisonMethod::BradleyTerry { options } => {
                Analysis::BradleyTerry(BtAnalysis::new(d, options)?)
            }
            ComparisonMethod::RawMean => Analysis::RawMean(RawMeanAnalysis::new(d)),
        })
    }

    pub fn compare(&self, d: &PerformanceMatrix, a: &str, b: &str) -> Result<ComparisonOutcome> {
        let (ia, ib) = (d.algorithm_index(a)?, d.algorithm_index(b)?);
        Ok(self.analyze(d)?.compare(ia, ib))
    }

    /// Preference for every unordered pair `(i, j)`, `i < j`, row-major.
    pub fn preferences(&self, d: &PerformanceMatrix) -> Result<Vec<Preference>> {
        let analysis = self.analyze(d)?;
        let k = d.n_algorithms();
        let mut out = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                out.push(analysis.compare(i, j).preference);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for ComparisonMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparisonMethod::FriedmanCd { convention, .. } => {
                write!(f, "friedman_cd({})", convention.short())
            }
            ComparisonMethod::BradleyTerry { .. } => f.write_str("bradley_terry"),
            ComparisonMethod::RawMean => f.write_str("raw_mean"),
        }
    }
}

impl FromStr for ComparisonMethod {
    type Err = Error;

    /// Bare `friedman_cd` means the control convention.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "friedman_cd" => return Ok(Self::friedman_cd(CdConvention::ControlBonferroni)),
            "bradley_terry" => return Ok(Self::bradley_terry()),
            "raw_mean" => return Ok(Self::RawMean),
            _ => {}
        }
        s.strip_prefix("friedman_cd(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|c| c.parse().ok())
            .map(Self::friedman_cd)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub enum Analysis {
    AvgRank(AvgRankAnalysis),
    BradleyTerry(BtAnalysis),
    RawMean(RawMeanAnalysis),
}

impl Analysis {
    pub fn compare(&self, a: usize, b: usize) -> ComparisonOutcome {
        match self {
            Analysis::AvgRank(x) => x.compare(a, b),
            Analysis::BradleyTerry(x) => x.compare(a, b),
            Analysis::RawMean(x) => x.compare(a, b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AvgRankAnalysis {
    ids: Vec<String>,
    pub friedman: FriedmanResult,
    pub critical_difference: CriticalDifference,
}

impl AvgRankAnalysis {
    pub fn new(d: &PerformanceMatrix, alpha: f64, convention: CdConvention) -> Result<Self> {
        let friedman = friedman_test(&to_ranks(d));
        let critical_difference =
            critical_difference(d.n_algorithms(), d.n_problems(), alpha, convention)?;
        Ok(Self {
            ids: d.algorithm_ids().to_vec(),
            friedman,
            critical_difference,
        })
    }

    pub fn compare(&self, a: usize, b: usize) -> ComparisonOutcome {
        let (ra, rb) = (self.friedman.avg_ranks[a], self.friedman.avg_ranks[b]);
        let gap = rb - ra;
        let preference = if gap.abs() > self.critical_difference.value {
            Preference::from_score(gap)
        } else {
            Preference::Indifferent
        };
        ComparisonOutcome {
            a: self.ids[a].clone(),
            b: self.ids[b].clone(),
            preference,
            score: gap,
            evidence: Evidence::AvgRank {
                avg_rank_a: ra,
                avg_rank_b: rb,
                gap,
                critical_difference: self.critical_difference.clone(),
                friedman: self.friedman.clone(),
            },
        }
    }
}

/// Bradley-Terry over the strongly connected components of the win graph.
///
/// A pair inside one component is read from that component's fit. A pair
/// split across components is decided by which side reaches the other
/// through observed wins; the fitted likelihood pushes that probability to
/// its limit, so it is reported as 0 or 1 with `separated` set.
#[derive(Debug, Clone)]
pub struct BtAnalysis {
    ids: Vec<String>,
    reach: Vec<Vec<bool>>,
    component_of: Vec<usize>,
    fits: Vec<Option<BradleyTerryFit>>,
}

impl BtAnalysis {
    pub fn new(d: &PerformanceMatrix, options: &BtOptions) -> Result<Self> {
        let wins = to_pairwise(d);
        let comps = win_components(&wins);
        let mut component_of = vec![0; wins.k()];
        let mut fits = Vec::with_capacity(comps.len());
        for (c, members) in comps.iter().enumerate() {
            for &m in members {
                component_of[m] = c;
            }
            fits.push(if members.len() > 1 {
                Some(bt_fit(&wins.restrict(members), options)?)
            } else {
                None
            });
        }
        Ok(Self {
            ids: d.algorithm_ids().to_vec(),
            reach: reachability(&wins),
            component_of,
            fits,
        })
    }

    pub fn compare(&self, a: usize, b: usize) -> ComparisonOutcome {
        let (la, lb) = (&self.ids[a], &self.ids[b]);
        let (ca, cb) = (self.component_of[a], self.component_of[b]);
        if ca == cb {
            if let Some(fit) = &self.fits[ca] {
                let (ta, tb) = (fit.theta_of(la), fit.theta_of(lb));
                if let (Ok(ta), Ok(tb)) = (ta, tb) {
                    return bt_outcome(la, lb, ta, tb, fit.theta.len(), false);
                }
            }
            return bt_outcome(la, lb, 1.0, 1.0, 1, false);
        }
        let (ta, tb) = if self.reach[a][b] {
            (1.0, 0.0)
        } else if self.reach[b][a] {
            (0.0, 1.0)
        } else {
            // never compared through any chain
            let mut o = bt_outcome(la, lb, 1.0, 1.0, 1, false);
            if let Evidence::BradleyTerry { separated, .. } = &mut o.evidence {
                *separated = true;
            }
            return o;
        };
        bt_outcome(la, lb, ta, tb, 1, true)
    }
}

/// `reach[i][j]`: a chain of wins leads from `i` to `j`.
fn reachability(w: &PairwiseWinMatrix) -> Vec<Vec<bool>> {
    let k = w.k();
    (0..k)
        .map(|start| {
            let mut seen = vec![false; k];
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in 0..k {
                    if w.wins[i][j] > 0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RawMeanAnalysis {
    ids: Vec<String>,
    means: Vec<f64>,
}

impl RawMeanAnalysis {
    pub fn new(d: &PerformanceMatrix) -> Self {
        let n = d.n_problems() as f64;
        Self {
            ids: d.algorithm_ids().to_vec(),
            means: (0..d.n_algorithms())
                .map(|a| d.row(a).iter().sum::<f64>() / n)
                .collect(),
        }
    }

    pub fn compare(&self, a: usize, b: usize) -> ComparisonOutcome {
        let (ma, mb) = (self.means[a], self.means[b]);
        ComparisonOutcome {
            a: self.ids[a].clone(),
            b: self.ids[b].clone(),
            preference: Preference::from_score(mb - ma),
            score: mb - ma,
            evidence: Evidence::RawMean {
                mean_a: ma,
                mean_b: mb,
            },
        }
    }
}
