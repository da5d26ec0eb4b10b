//! Relative ranking, pairwise outcomes and win counts.
//!
//! A column of `k` values, its rank vector, and its `k(k-1)/2` pairwise
//! outcomes carry the same ordering information: ranks and pairs convert
//! into each other exactly. Raw values to ranks is the lossy step.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::PerformanceMatrix;

/// Average ranks of `values`, 1 = smallest. Ties share the mean of the
/// rank positions they occupy.
pub fn rank_values(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Per-column ranks of a performance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    pub algorithm_ids: Vec<String>,
    pub problem_ids: Vec<String>,
    /// Row-major like the source matrix.
    pub ranks: Vec<f64>,
    pub avg_rank: Vec<f64>,
}

impl RankMatrix {
    pub fn n_algorithms(&self) -> usize {
        self.algorithm_ids.len()
    }

    pub fn n_problems(&self) -> usize {
        self.problem_ids.len()
    }

    pub fn rank(&self, algorithm: usize, problem: usize) -> f64 {
        self.ranks[algorithm * self.n_problems() + problem]
    }

    pub fn column(&self, problem: usize) -> Vec<f64> {
        (0..self.n_algorithms())
            .map(|a| self.rank(a, problem))
            .collect()
    }

    pub fn avg_rank_of(&self, label: &str) -> Result<f64> {
        self.algorithm_ids
            .iter()
            .position(|id| id == label)
            .map(|i| self.avg_rank[i])
            .ok_or_else(|| Error::UnknownLabel {
                kind: "algorithm",
                label: label.to_string(),
            })
    }

    /// The ranks viewed as a performance matrix (the `R` data).
    pub fn to_matrix(&self) -> PerformanceMatrix {
        PerformanceMatrix::new(
            self.algorithm_ids.clone(),
            self.problem_ids.clone(),
            self.ranks.clone(),
        )
        .expect("ranks are finite and ids already validated")
    }
}

pub fn to_ranks(d: &PerformanceMatrix) -> RankMatrix {
    let (k, n) = (d.n_algorithms(), d.n_problems());
    let mut ranks = vec![0.0; k * n];
    for p in 0..n {
        for (a, r) in rank_values(&d.column(p)).into_iter().enumerate() {
            ranks[a * n + p] = r;
        }
    }
    let avg_rank = (0..k)
        .map(|a| ranks[a * n..(a + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    RankMatrix {
        algorithm_ids: d.algorithm_ids().to_vec(),
        problem_ids: d.problem_ids().to_vec(),
        ranks,
        avg_rank,
    }
}

/// Outcome of comparing item `first` with item `second` (`first < second`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairRelation {
    FirstBetter,
    SecondBetter,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairOutcome {
    pub first: usize,
    pub second: usize,
    pub relation: PairRelation,
}

/// All unordered-pair outcomes for `k` items, ordered `(0,1), (0,2), …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseOutcomes {
    pub k: usize,
    pub outcomes: Vec<PairOutcome>,
}

pub fn ranks_to_pairs(ranks: &[f64]) -> PairwiseOutcomes {
    let k = ranks.len();
    let mut outcomes = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let relation = match ranks[i].partial_cmp(&ranks[j]) {
                Some(Ordering::Less) => PairRelation::FirstBetter,
                Some(Ordering::Greater) => PairRelation::SecondBetter,
                _ => PairRelation::Tie,
            };
            outcomes.push(PairOutcome {
                first: i,
                second: j,
                relation,
            });
        }
    }
    PairwiseOutcomes { k, outcomes }
}

/// Inverse of [`ranks_to_pairs`]. Fails with [`Error::Intransitive`] when
/// the outcomes are not a weak order.
pub fn pairs_to_ranks(pairs: &PairwiseOutcomes) -> Result<Vec<f64>> {
    let k = pairs.k;
    let expected = k * k.saturating_sub(1) / 2;
    let mut seen = vec![false; k * k];
    let mut beaten_by = vec![0usize; k];
    let mut ties = vec![0usize; k];
    for o in &pairs.outcomes {
        let (a, b) = (o.first.min(o.second), o.first.max(o.second));
        if a == b || b >= k {
            return Err(Error::InvalidArgument(format!(
                "pair ({}, {}) is not a pair of distinct items below {k}",
                o.first, o.second
            )));
        }
        if std::mem::replace(&mut seen[a * k + b], true) {
            return Err(Error::InvalidArgument(format!("pair ({a}, {b}) given twice")));
        }
        let winner = match o.relation {
            PairRelation::Tie => None,
            PairRelation::FirstBetter => Some(o.first),
            PairRelation::SecondBetter => Some(o.second),
        };
        match winner {
            None => {
                ties[a] += 1;
                ties[b] += 1;
            }
            Some(w) => {
                let l = if w == a { b } else { a };
                beaten_by[l] += 1;
            }
        }
    }
    if pairs.outcomes.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{k} items need {expected} outcomes, got {}",
            pairs.outcomes.len()
        )));
    }
    let ranks: Vec<f64> = (0..k)
        .map(|i| 1.0 + beaten_by[i] as f64 + ties[i] as f64 / 2.0)
        .collect();
    // A weak order is reproduced exactly by its average ranks; anything
    // else (cycles, non-transitive ties) is not.
    let mut canonical = pairs.outcomes.clone();
    for o in &mut canonical {
        if o.first > o.second {
            std::mem::swap(&mut o.first, &mut o.second);
            o.relation = match o.relation {
                PairRelation::FirstBetter => PairRelation::SecondBetter,
                PairRelation::SecondBetter => PairRelation::FirstBetter,
                PairRelation::Tie => PairRelation::Tie,
            };
        }
    }
    canonical.sort_by_key(|o| (o.first, o.second));
    if ranks_to_pairs(&ranks).outcomes != canonical {
        return Err(Error::Intransitive);
    }
    Ok(ranks)
}

/// `wins[i][j]` = number of problems on which algorithm `i` strictly beats `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseWinMatrix {
    pub algorithm_ids: Vec<String>,
    pub wins: Vec<Vec<u64>>,
}

impl PairwiseWinMatrix {
    pub fn k(&self) -> usize {
        self.algorithm_ids.len()
    }

    pub fn total_wins(&self, i: usize) -> u64 {
        self.wins[i].iter().sum()
    }

    /// Square sub-matrix on `keep` (indices in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        Self {
            algorithm_ids: keep.iter().map(|&i| self.algorithm_ids[i].clone()).collect(),
            wins: keep
                .iter()
                .map(|&i| keep.iter().map(|&j| self.wins[i][j]).collect())
                .collect(),
        }
    }
}

pub fn to_pairwise(d: &PerformanceMatrix) -> PairwiseWinMatrix {
    let k = d.n_algorithms();
    let mut wins = vec![vec![0u64; k]; k];
    for p in 0..d.n_problems() {
        let col = d.column(p);
        for i in 0..k {
            for j in 0..k {
                if col[i] < col[j] {
                    wins[i][j] += 1;
                }
            }
        }
    }
    PairwiseWinMatrix {
        algorithm_ids: d.algorithm_ids().to_vec(),
        wins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(ranks: &[f64]) -> Vec<PairRelation> {
        ranks_to_pairs(ranks).outcomes.iter().map(|o| o.relation).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_values(&[1.0, 99.0, 100.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_values(&[2.0, 2.0, 5.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_values(&[7.0, 7.0, 7.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn pair_examples() {
        use PairRelation::*;
        assert_eq!(col(&[1.0, 2.0, 3.0]), vec![FirstBetter, FirstBetter, FirstBetter]);
        assert_eq!(col(&[2.0, 1.0]), vec![SecondBetter]);
        assert_eq!(col(&[1.5, 1.5, 3.0]), vec![Tie, FirstBetter, FirstBetter]);
        assert_eq!(ranks_to_pairs(&[1.0; 5]).outcomes.len(), 10);
    }

    #[test]
    fn pairs_back_to_ranks() {
        let p = ranks_to_pairs(&[1.0, 2.0, 3.0]);
        assert_eq!(pairs_to_ranks(&p).unwrap(), vec![1.0, 2.0, 3.0]);
        let tied = ranks_to_pairs(&[1.5, 1.5, 3.0]);
        assert_eq!(pairs_to_ranks(&tied).unwrap(), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn cycle_is_intransitive() {
        use PairRelation::*;
        let cycle = PairwiseOutcomes {
            k: 3,
            outcomes: vec![
                PairOutcome { first: 0, second: 1, relation: FirstBetter },
                PairOutcome { first: 1, second: 2, relation: FirstBetter },
                PairOutcome { first: 0, second: 2, relation: SecondBetter },
            ],
        };
        assert!(matches!(pairs_to_ranks(&cycle), Err(Error::Intransitive)));
        // 0~1, 1~2 but 0 > 2: ties that do not chain
        let loose = PairwiseOutcomes {
            k: 3,
            outcomes: vec![
                PairOutcome { first: 0, second: 1, relation: Tie },
                PairOutcome { first: 1, second: 2, relation: Tie },
                PairOutcome { first: 0, second: 2, relation: FirstBetter },
            ],
        };
        assert!(matches!(pairs_to_ranks(&loose), Err(Error::Intransitive)));
    }

    #[test]
    fn missing_pairs_rejected() {
        let mut p = ranks_to_pairs(&[1.0, 2.0, 3.0]);
        p.outcomes.pop();
        assert!(matches!(pairs_to_ranks(&p), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pairwise_counts() {
        let d = PerformanceMatrix::from_rows(
            vec!["a".into(), "b".into()],
            vec!["p".into()],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap();
        let w = to_pairwise(&d);
        assert_eq!(w.wins, vec![vec![0, 1], vec![0, 0]]);

        let same = PerformanceMatrix::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["p".into(), "q".into()],
            vec![vec![3.0, 4.0]; 3],
        )
        .unwrap();
        assert!(to_pairwise(&same).wins.iter().flatten().all(|&w| w == 0));
    }

    fn matrix_strategy() -> impl Strategy<Value = PerformanceMatrix> {
        (2usize..7, 1usize..6).prop_flat_map(|(k, n)| {
            prop::collection::vec(0i32..5, k * n).prop_map(move |cells| {
                PerformanceMatrix::new(
                    (0..k).map(|i| format!("a{i}")).collect(),
                    (0..n).map(|j| format!("p{j}")).collect(),
                    cells.into_iter().map(f64::from).collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_sums_and_idempotence(d in matrix_strategy()) {
            let r = to_ranks(&d);
            let k = d.n_algorithms() as f64;
            for p in 0..d.n_problems() {
                let s: f64 = r.column(p).iter().sum();
                prop_assert_eq!(s, k * (k + 1.0) / 2.0);
            }
            let rr = to_ranks(&r.to_matrix());
            prop_assert_eq!(rr.ranks, r.ranks);
        }

        #[test]
        fn tied_columns_round_trip(d in matrix_strategy()) {
            let r = to_ranks(&d);
            for p in 0..d.n_problems() {
                let column = r.column(p);
                prop_assert_eq!(pairs_to_ranks(&ranks_to_pairs(&column)).unwrap(), column);
            }
        }

        #[test]
        fn projection_commutes_with_pairwise(d in matrix_strategy(), mask in prop::collection::vec(any::<bool>(), 7)) {
            let keep: Vec<usize> = (0..d.n_algorithms()).filter(|&i| mask[i]).collect();
            prop_assume!(keep.len() >= 2);
            let labels: Vec<&str> = keep.iter().map(|&i| d.algorithm_ids()[i].as_str()).collect();
            let lhs = to_pairwise(&d.project_algorithms(&labels).unwrap());
            let rhs = to_pairwise(&d).restrict(&keep);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn wins_bounded_by_problems(d in matrix_strategy()) {
            let w = to_pairwise(&d);
            for i in 0..w.k() {
                prop_assert_eq!(w.wins[i][i], 0);
                for j in 0..w.k() {
                    prop_assert!(w.wins[i][j] + w.wins[j][i] <= d.n_problems() as u64);
                }
            }
        }
    }
}
