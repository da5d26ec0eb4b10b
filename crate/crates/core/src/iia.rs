//! IIA and Simpson paradox searches, the rank-insensitivity probe and the
//! random-augmentation stability study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{derive_seed, objective_by_id, optimizer_by_id, run, SplitMix64};
use crate::matrix::PerformanceMatrix;
use crate::rank::to_ranks;
use crate::ranking::{ComparisonMethod, ComparisonOutcome, Preference};

pub const DEFAULT_GREEDY_BUDGET: usize = 500;
/// Largest algorithm count for which exhaustive search is allowed.
pub const EXHAUSTIVE_LIMIT: usize = 12;

pub const RANK_INSENSITIVE_ADVICE: &str = "method output is unchanged by replacing values with \
    within-problem ranks; run iia_check against the adversarial datasets D and D[{A,B,C1}] \
    before trusting its pairwise verdicts";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetStrategy {
    Explicit { subsets: Vec<Vec<String>> },
    GreedyRemoval { budget: usize },
    Exhaustive,
}

impl SubsetStrategy {
    pub fn greedy() -> Self {
        SubsetStrategy::GreedyRemoval {
            budget: DEFAULT_GREEDY_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Algorithms,
    Problems,
}

/// A strict preference on the full data that flips on a projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IIAViolationReport {
    pub method: String,
    pub pair: (String, String),
    pub projection: Projection,
    pub baseline: Preference,
    pub witness_subset: Vec<String>,
    pub removed: Vec<String>,
    pub evidence_before: ComparisonOutcome,
    pub evidence_after: ComparisonOutcome,
}

/// A projection where one side of the comparison is indifferent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndifferenceWarning {
    pub subset: Vec<String>,
    pub baseline: Preference,
    pub observed: Preference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IIAAudit {
    pub method: String,
    pub pair: (String, String),
    pub projection: Projection,
    pub baseline: ComparisonOutcome,
    pub evaluations: usize,
    pub violation: Option<IIAViolationReport>,
    pub warnings: Vec<IndifferenceWarning>,
}

impl IIAAudit {
    pub fn found(&self) -> bool {
        self.violation.is_some()
    }

    pub fn summary(&self) -> String {
        match &self.violation {
            None => "no violation found".to_string(),
            Some(v) => format!(
                "violation: {} on the full data, {} on [{}]",
                v.evidence_before.describe(),
                v.evidence_after.describe(),
                v.witness_subset.join(",")
            ),
        }
    }
}

struct Search<'a> {
    method: &'a ComparisonMethod,
    d: &'a PerformanceMatrix,
    projection: Projection,
    a: String,
    b: String,
    baseline: ComparisonOutcome,
    evaluations: usize,
    warnings: Vec<IndifferenceWarning>,
}

impl<'a> Search<'a> {
    fn new(
        method: &'a ComparisonMethod,
        d: &'a PerformanceMatrix,
        projection: Projection,
        a: &str,
        b: &str,
    ) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!("pair needs two labels, got {a} twice")));
        }
        let baseline = method.compare(d, a, b)?;
        Ok(Self {
            method,
            d,
            projection,
            a: a.to_string(),
            b: b.to_string(),
            baseline,
            evaluations: 1,
            warnings: Vec::new(),
        })
    }

    fn universe(&self) -> &[String] {
        match self.projection {
            Projection::Algorithms => self.d.algorithm_ids(),
            Projection::Problems => self.d.problem_ids(),
        }
    }

    /// Runs the method on a projection, in the universe's order.
    fn evaluate(&mut self, subset: &[String]) -> Result<ComparisonOutcome> {
        self.evaluations += 1;
        let wrap = |e: Error| Error::OnSubset {
            method: self.method.id(),
            subset: subset.join(","),
            source: Box::new(e),
        };
        let projected = match self.projection {
            Projection::Algorithms => self.d.project_algorithms(subset),
            Projection::Problems => self.d.project_problems(subset),
        }
        .map_err(wrap)?;
        self.method.compare(&projected, &self.a, &self.b).map_err(wrap)
    }

    /// Records warnings and returns a report when `outcome` flips the baseline.
    fn judge(&mut self, subset: &[String], outcome: ComparisonOutcome) -> Option<IIAViolationReport> {
        let before = self.baseline.preference;
        let after = outcome.preference;
        let strict_subset = subset.len() < self.universe().len();
        if before.opposes(&after) && strict_subset {
            let removed = self
                .universe()
                .iter()
                .filter(|l| !subset.contains(l))
                .cloned()
                .collect();
            return Some(IIAViolationReport {
                method: self.method.id(),
                pair: (self.a.clone(), self.b.clone()),
                projection: self.projection,
                baseline: before,
                witness_subset: subset.to_vec(),
                removed,
                evidence_before: self.baseline.clone(),
                evidence_after: outcome,
            });
        }
        if before != after && (!before.is_strict() || !after.is_strict()) {
            self.warnings.push(IndifferenceWarning {
                subset: subset.to_vec(),
                baseline: before,
                observed: after,
            });
        }
        None
    }

    fn finish(self, violation: Option<IIAViolationReport>) -> IIAAudit {
        IIAAudit {
            method: self.method.id(),
            pair: (self.a, self.b),
            projection: self.projection,
            baseline: self.baseline,
            evaluations: self.evaluations,
            violation,
            warnings: self.warnings,
        }
    }

    /// Sorts a subset into the universe's order and checks membership.
    fn canonical(&self, subset: &[String]) -> Result<Vec<String>> {
        let kind = match self.projection {
            Projection::Algorithms => "algorithm",
            Projection::Problems => "problem",
        };
        if let Some(bad) = subset.iter().find(|l| !self.universe().contains(l)) {
            return Err(Error::UnknownLabel {
                kind,
                label: bad.clone(),
            });
        }
        Ok(self
            .universe()
            .iter()
            .filter(|l| subset.contains(l))
            .cloned()
            .collect())
    }

    fn explicit(mut self, subsets: &[Vec<String>]) -> Result<IIAAudit> {
        for s in subsets {
            let s = self.canonical(s)?;
            if self.projection == Projection::Algorithms
                && !(s.contains(&self.a) && s.contains(&self.b))
            {
                return Err(Error::InvalidArgument(format!(
                    "subset [{}] must contain both {} and {}",
                    s.join(","),
                    self.a,
                    self.b
                )));
            }
            if s.is_empty() {
                return Err(Error::EmptySet("problem subset"));
            }
            let outcome = self.evaluate(&s)?;
            if let Some(v) = self.judge(&s, outcome) {
                return Ok(self.finish(Some(v)));
            }
        }
        Ok(self.finish(None))
    }

    fn third_parties(&self) -> Vec<String> {
        self.universe()
            .iter()
            .filter(|l| **l != self.a && **l != self.b)
            .cloned()
            .collect()
    }

    fn greedy(mut self, budget: usize) -> Result<IIAAudit> {
        let sign = match self.baseline.preference {
            Preference::AOverB => 1.0,
            Preference::BOverA => -1.0,
            // nothing strict to reverse
            Preference::Indifferent => return Ok(self.finish(None)),
        };
        let mut current: Vec<String> = self.universe().to_vec();
        loop {
            let candidates: Vec<String> = current
                .iter()
                .filter(|l| **l != self.a && **l != self.b)
                .cloned()
                .collect();
            let mut best: Option<(f64, String)> = None;
            for t in candidates {
                if self.evaluations >= budget {
                    return Ok(self.finish(None));
                }
                let subset: Vec<String> = current.iter().filter(|l| **l != t).cloned().collect();
                let outcome = self.evaluate(&subset)?;
                let oriented = sign * outcome.score;
                if let Some(v) = self.judge(&subset, outcome) {
                    return Ok(self.finish(Some(v)));
                }
                if best.as_ref().map_or(true, |(s, _)| oriented < *s) {
                    best = Some((oriented, t));
                }
            }
            match best {
                Some((_, t)) => current.retain(|l| *l != t),
                None => return Ok(self.finish(None)),
            }
        }
    }

    fn exhaustive(mut self) -> Result<IIAAudit> {
        let k = self.universe().len();
        if k > EXHAUSTIVE_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "exhaustive search is limited to {EXHAUSTIVE_LIMIT} entries, got {k}; use greedy_removal"
            )));
        }
        let third = self.third_parties();
        // every mask except the full set
        for mask in 0..(1u64 << third.len()) - 1 {
            let keep: Vec<&String> = third
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, l)| l)
                .collect();
            let subset: Vec<String> = self
                .universe()
                .iter()
                .filter(|l| **l == self.a || **l == self.b || keep.contains(l))
                .cloned()
                .collect();
            let outcome = self.evaluate(&subset)?;
            if let Some(v) = self.judge(&subset, outcome) {
                return Ok(self.finish(Some(v)));
            }
        }
        Ok(self.finish(None))
    }
}

/// Looks for a strict subset of algorithms (always containing `a` and `b`)
/// on which the method's strict preference between them reverses.
pub fn iia_check(
    method: &ComparisonMethod,
    d: &PerformanceMatrix,
    a: &str,
    b: &str,
    strategy: &SubsetStrategy,
) -> Result<IIAAudit> {
    let search = Search::new(method, d, Projection::Algorithms, a, b)?;
    match strategy {
        SubsetStrategy::Explicit { subsets } => search.explicit(subsets),
        SubsetStrategy::GreedyRemoval { budget } => search.greedy(*budget),
        SubsetStrategy::Exhaustive => search.exhaustive(),
    }
}

/// Same search over subsets of problems.
pub fn simpson_check(
    method: &ComparisonMethod,
    d: &PerformanceMatrix,
    a: &str,
    b: &str,
    problem_subsets: &[Vec<String>],
) -> Result<IIAAudit> {
    Search::new(method, d, Projection::Problems, a, b)?.explicit(problem_subsets)
}

/// True when the method gives the same preference on every pair whether it
/// sees `d` or the within-problem ranks of `d`.
pub fn rank_insensitivity_probe(method: &ComparisonMethod, d: &PerformanceMatrix) -> Result<bool> {
    let on_values = method.preferences(d)?;
    let on_ranks = method.preferences(&to_ranks(d).to_matrix())?;
    Ok(on_values == on_ranks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugmentSource {
    /// Each cell uniform on its column's `[min, max]` in the input.
    UniformColumnRange,
    /// Each cell uniform on fixed per-column bounds.
    UniformBounds { bounds: Vec<(f64, f64)> },
    /// Each cell is the best value a seeded optimizer run found on that
    /// column's objective. One objective id applies to every column.
    Harness {
        optimizer: String,
        objectives: Vec<String>,
        budget: usize,
    },
}

/// Appends `m` synthetic algorithms `R1..Rm` (renamed on collision).
pub fn augment_random(
    d: &PerformanceMatrix,
    m: usize,
    seed: u64,
    source: &AugmentSource,
) -> Result<PerformanceMatrix> {
    let mut out = d.clone();
    if m == 0 {
        return Ok(out);
    }
    let n = d.n_problems();
    let rows: Vec<Vec<f64>> = match source {
        AugmentSource::UniformColumnRange => uniform_rows(&d.column_ranges(), m, seed),
        AugmentSource::UniformBounds { bounds } => {
            if bounds.len() != n {
                return Err(Error::Shape(format!("{} bounds for {n} problems", bounds.len())));
            }
            uniform_rows(bounds, m, seed)
        }
        AugmentSource::Harness {
            optimizer,
            objectives,
            budget,
        } => {
            if objectives.is_empty() {
                return Err(Error::NoObjectiveRegistry);
            }
            if objectives.len() != 1 && objectives.len() != n {
                return Err(Error::Shape(format!(
                    "{} objectives for {n} problems; give one or one per problem",
                    objectives.len()
                )));
            }
            let opt = optimizer_by_id(optimizer)?;
            let objs = objectives
                .iter()
                .map(|o| objective_by_id(o))
                .collect::<Result<Vec<_>>>()?;
            (0..m)
                .map(|r| {
                    let row_seed = derive_seed(seed, r as u64);
                    (0..n)
                        .map(|j| {
                            let obj = &objs[if objs.len() == 1 { 0 } else { j }];
                            let trace = run(&opt, obj, *budget, derive_seed(row_seed, j as u64))?;
                            Ok(trace.values().iter().copied().fold(f64::INFINITY, f64::min))
                        })
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<_>>()?
        }
    };
    let mut ids = Vec::with_capacity(m);
    let mut next = 1usize;
    while ids.len() < m {
        let id = format!("R{next}");
        next += 1;
        if d.algorithm_ids().iter().all(|x| *x != id) {
            ids.push(id);
        }
    }
    out.append_rows(ids, rows)?;
    Ok(out)
}

fn uniform_rows(bounds: &[(f64, f64)], m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..m)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| if hi > lo { rng.uniform(lo, hi) } else { lo })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCurve {
    pub method: String,
    pub pair: (String, String),
    pub reference_preference: Preference,
    pub m_values: Vec<usize>,
    pub reversal_frequency: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Spearman correlation of `m_values` against `reversal_frequency`.
    pub spearman: f64,
}

impl StabilityCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,frequency\n");
        for (m, f) in self.m_values.iter().zip(&self.reversal_frequency) {
            s.push_str(&format!("{m},{f}\n"));
        }
        s
    }
}

/// For each `m`, the share of `trials` augmentations of `base` whose
/// `(a, b)` preference differs from the method's preference on `reference`.
///
/// Synthetic rows are drawn uniformly within the reference's column ranges;
/// pass `base` as the reference for a self-referenced study. An indifferent
/// outcome counts as differing from a strict reference.
pub fn stability_curve(
    method: &ComparisonMethod,
    base: &PerformanceMatrix,
    reference: &PerformanceMatrix,
    a: &str,
    b: &str,
    m_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<StabilityCurve> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if base.problem_ids() != reference.problem_ids() {
        return Err(Error::Shape("base and reference must share problems".into()));
    }
    let reference_preference = method.compare(reference, a, b)?.preference;
    let source = AugmentSource::UniformBounds {
        bounds: reference.column_ranges(),
    };
    let mut freq = Vec::with_capacity(m_grid.len());
    for &m in m_grid {
        let mut differs = 0usize;
        for t in 0..trials {
            let trial_seed = derive_seed(derive_seed(seed, m as u64), t as u64);
            let aug = augment_random(base, m, trial_seed, &source)?;
            if method.compare(&aug, a, b)?.preference != reference_preference {
                differs += 1;
            }
        }
        freq.push(differs as f64 / trials as f64);
    }
    let xs: Vec<f64> = m_grid.iter().map(|&m| m as f64).collect();
    Ok(StabilityCurve {
        method: method.id(),
        pair: (a.to_string(), b.to_string()),
        reference_preference,
        spearman: spearman(&xs, &freq),
        m_values: m_grid.to_vec(),
        reversal_frequency: freq,
        trials,
        seed,
    })
}

/// Pearson correlation of average ranks; 0 when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = crate::rank::rank_values(x);
    let ry = crate::rank::rank_values(y);
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{order_consistent, paper_dataset, PaperVariant};
    use crate::ranking::CdConvention;

    fn labels(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn full_set_is_never_a_witness() {
        let d = paper_dataset(PaperVariant::Small);
        let m = ComparisonMethod::friedman_cd(CdConvention::AllpairsBonferroni);
        let audit = iia_check(
            &m,
            &d,
            "A",
            "B",
            &SubsetStrategy::Explicit {
                subsets: vec![labels(&["A", "B", "C1"])],
            },
        )
        .unwrap();
        assert!(!audit.found());
        assert_eq!(audit.summary(), "no violation found");
    }

    #[test]
    fn explicit_subset_must_hold_pair() {
        let d = paper_dataset(PaperVariant::Small);
        let m = ComparisonMethod::friedman_cd(CdConvention::AllpairsBonferroni);
        let r = iia_check(
            &m,
            &d,
            "A",
            "B",
            &SubsetStrategy::Explicit {
                subsets: vec![labels(&["A", "C1"])],
            },
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn bad_subsets_are_errors() {
        let d = paper_dataset(PaperVariant::Small);
        let m = ComparisonMethod::friedman_cd(CdConvention::ControlBonferroni);
        assert!(simpson_check(&m, &d, "A", "B", &[vec![]]).is_err());
        assert!(simpson_check(&m, &d, "A", "B", &[labels(&["nope"])]).is_err());
        let bad_alpha = m.with_alpha(2.0);
        assert!(simpson_check(&bad_alpha, &d, "A", "B", &[labels(&["f1"])]).is_err());
    }

    #[test]
    fn simpson_first_block() {
        let d = paper_dataset(PaperVariant::Small);
        let m = ComparisonMethod::friedman_cd(CdConvention::AllpairsBonferroni);
        let first: Vec<String> = (1..=100).map(|j| format!("f{j}")).collect();
        let audit = simpson_check(&m, &d, "A", "B", &[first]).unwrap();
        let v = audit.violation.expect("reversal on first block");
        assert_eq!(v.baseline, Preference::BOverA);
        assert_eq!(v.evidence_after.preference, Preference::AOverB);

        let all: Vec<String> = d.problem_ids().to_vec();
        assert!(!simpson_check(&m, &d, "A", "B", &[all]).unwrap().found());
    }

    #[test]
    fn order_consistent_single_columns() {
        let d = order_consistent(5, 12, 3).unwrap();
        let singles: Vec<Vec<String>> = d.problem_ids().iter().map(|p| vec![p.clone()]).collect();
        for m in [
            ComparisonMethod::friedman_cd(CdConvention::ControlBonferroni),
            ComparisonMethod::bradley_terry(),
        ] {
            assert!(!simpson_check(&m, &d, "a1", "a2", &singles).unwrap().found());
        }
    }

    #[test]
    fn exhaustive_limit() {
        let d = order_consistent(13, 3, 1).unwrap();
        let m = ComparisonMethod::RawMean;
        assert!(iia_check(&m, &d, "a1", "a2", &SubsetStrategy::Exhaustive).is_err());
    }

    #[test]
    fn exhaustive_counts_subsets() {
        let d = order_consistent(6, 5, 2).unwrap();
        let m = ComparisonMethod::RawMean;
        let audit = iia_check(&m, &d, "a1", "a2", &SubsetStrategy::Exhaustive).unwrap();
        // baseline + 2^4 − 1 strict subsets
        assert_eq!(audit.evaluations, 16);
    }

    #[test]
    fn greedy_respects_budget() {
        let d = paper_dataset(PaperVariant::Full);
        let m = ComparisonMethod::friedman_cd(CdConvention::ControlBonferroni);
        let audit = iia_check(&m, &d, "A", "B", &SubsetStrategy::GreedyRemoval { budget: 40 }).unwrap();
        assert!(audit.evaluations <= 40);
    }

    #[test]
    fn raw_mean_ignores_third_parties() {
        let d = PerformanceMatrix::from_rows(
            labels(&["A", "B", "X"]),
            labels(&["p1", "p2", "p3", "p4", "p5"]),
            vec![
                vec![1.0, 1.0, 1.0, 3.0, 3.0],
                vec![2.0, 2.0, 2.0, 1.0, 1.0],
                vec![3.0, 3.0, 3.0, 2.0, 2.0],
            ],
        )
        .unwrap();
        let audit = iia_check(&ComparisonMethod::RawMean, &d, "B", "A", &SubsetStrategy::greedy()).unwrap();
        assert!(!audit.found());
        assert_eq!(audit.evaluations, 2);
    }

    #[test]
    fn augment_contract() {
        let d = paper_dataset(PaperVariant::Small);
        assert_eq!(augment_random(&d, 0, 1, &AugmentSource::UniformColumnRange).unwrap(), d);
        let aug = augment_random(&d, 5, 42, &AugmentSource::UniformColumnRange).unwrap();
        assert_eq!(aug.n_algorithms(), 8);
        assert_eq!(aug.project_algorithms(d.algorithm_ids()).unwrap(), d);
        let ranges = d.column_ranges();
        for r in 3..8 {
            for (p, &(lo, hi)) in ranges.iter().enumerate() {
                let v = aug.value(r, p);
                assert!(lo <= v && v <= hi);
            }
        }
        assert_eq!(aug, augment_random(&d, 5, 42, &AugmentSource::UniformColumnRange).unwrap());
    }

    #[test]
    fn harness_source() {
        let d = PerformanceMatrix::from_rows(
            labels(&["x", "y"]),
            labels(&["sphere", "rastrigin"]),
            vec![vec![0.1, 2.0], vec![0.2, 1.0]],
        )
        .unwrap();
        let src = AugmentSource::Harness {
            optimizer: "random_search".into(),
            objectives: labels(&["sphere-2d", "rastrigin-2d"]),
            budget: 20,
        };
        let aug = augment_random(&d, 2, 7, &src).unwrap();
        assert_eq!(aug.n_algorithms(), 4);
        assert!(aug.row(2).iter().all(|v| *v >= 0.0));
        assert_eq!(aug, augment_random(&d, 2, 7, &src).unwrap());
        let empty = AugmentSource::Harness {
            optimizer: "random_search".into(),
            objectives: vec![],
            budget: 20,
        };
        assert!(matches!(augment_random(&d, 1, 7, &empty), Err(Error::NoObjectiveRegistry)));
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5]), 0.0);
    }

    #[test]
    fn curve_at_zero_is_binary() {
        let small = paper_dataset(PaperVariant::Small);
        let m = ComparisonMethod::friedman_cd(CdConvention::AllpairsBonferroni);
        let c = stability_curve(&m, &small, &small, "A", "B", &[0], 3, 9).unwrap();
        assert_eq!(c.reversal_frequency, vec![0.0]);
        let c = stability_curve(&m, &small, &small, "A", "B", &[0, 5, 20], 1, 9).unwrap();
        assert!(c.reversal_frequency.iter().all(|f| *f == 0.0 || *f == 1.0));
        assert!(c.to_csv().starts_with("m,frequency\n0,"));
    }
}
