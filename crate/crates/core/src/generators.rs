//! Adversarial and synthetic performance matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::SplitMix64;
use crate::matrix::PerformanceMatrix;

pub const PAPER_ALGORITHMS: usize = 100;
pub const PAPER_PROBLEMS: usize = 500;
/// Problems in the first block, where A scores 1.
pub const PAPER_FIRST_BLOCK: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaperVariant {
    Full,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DatasetSpec {
    PaperFull,
    PaperSmall,
    OrderConsistent { k: usize, n: usize, seed: u64 },
    Random { k: usize, n: usize, lo: f64, hi: f64, seed: u64 },
}

impl DatasetSpec {
    pub fn generate(&self) -> Result<PerformanceMatrix> {
        match *self {
            DatasetSpec::PaperFull => Ok(paper_dataset(PaperVariant::Full)),
            DatasetSpec::PaperSmall => Ok(paper_dataset(PaperVariant::Small)),
            DatasetSpec::OrderConsistent { k, n, seed } => order_consistent(k, n, seed),
            DatasetSpec::Random { k, n, lo, hi, seed } => random_matrix(k, n, lo, hi, seed),
        }
    }
}

pub fn paper_algorithm_ids() -> Vec<String> {
    let mut ids = vec!["A".to_string(), "B".to_string()];
    ids.extend((1..=PAPER_ALGORITHMS - 2).map(|i| format!("C{i}")));
    ids
}

fn problem_ids(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("f{j}")).collect()
}

/// The 100 × 500 construction, or its projection onto `{A, B, C1}`.
///
/// Rows are A, B, C1..C98. On the first 100 problems A scores 1, B 99,
/// C1 100 and C_i scores i; on the remaining 400, A scores 99, B 98,
/// C1 100 and C_i scores i − 1.
pub fn paper_dataset(variant: PaperVariant) -> PerformanceMatrix {
    let ids = paper_algorithm_ids();
    let rows: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| {
            (0..PAPER_PROBLEMS)
                .map(|p| {
                    let first = p < PAPER_FIRST_BLOCK;
                    let v = match (id.as_str(), first) {
                        ("A", true) => 1,
                        ("A", false) => 99,
                        ("B", true) => 99,
                        ("B", false) => 98,
                        ("C1", _) => 100,
                        (c, _) => {
                            let i: usize = c[1..].parse().expect("C label");
                            if first {
                                i
                            } else {
                                i - 1
                            }
                        }
                    };
                    v as f64
                })
                .collect()
        })
        .collect();
    let full = PerformanceMatrix::from_rows(ids, problem_ids(PAPER_PROBLEMS), rows)
        .expect("adversarial dataset is well formed");
    match variant {
        PaperVariant::Full => full,
        PaperVariant::Small => full
            .project_algorithms(&["A", "B", "C1"])
            .expect("A, B, C1 exist"),
    }
}

/// Every column ranks the algorithms identically.
///
/// Each algorithm gets a random strength; column `j` maps strengths
/// through its own increasing affine map, so magnitudes vary per column
/// while the order never does.
pub fn order_consistent(k: usize, n: usize, seed: u64) -> Result<PerformanceMatrix> {
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "order_consistent needs k ≥ 2 and n ≥ 1, got k = {k}, n = {n}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    // distinct strengths: a shuffled 1..=k plus a small jitter below 1
    let mut order: Vec<usize> = (1..=k).collect();
    for i in (1..k).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let strength: Vec<f64> = order.iter().map(|&o| o as f64 + 0.5 * rng.next_f64()).collect();
    let maps: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.uniform(0.5, 10.0), rng.uniform(-50.0, 50.0)))
        .collect();
    let rows = strength
        .iter()
        .map(|s| maps.iter().map(|(a, b)| a * s + b).collect())
        .collect();
    PerformanceMatrix::from_rows(
        (1..=k).map(|i| format!("a{i}")).collect(),
        problem_ids(n),
        rows,
    )
}

/// I.i.d. uniform cells on `[lo, hi)`.
pub fn random_matrix(k: usize, n: usize, lo: f64, hi: f64, seed: u64) -> Result<PerformanceMatrix> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "random_matrix needs finite lo < hi, got [{lo}, {hi})"
        )));
    }
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!(
            "random_matrix needs k ≥ 2 and n ≥ 1, got k = {k}, n = {n}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let rows = (0..k)
        .map(|_| (0..n).map(|_| rng.uniform(lo, hi)).collect())
        .collect();
    PerformanceMatrix::from_rows(
        (1..=k).map(|i| format!("a{i}")).collect(),
        problem_ids(n),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::to_ranks;

    #[test]
    fn adversarial_cells() {
        let d = paper_dataset(PaperVariant::Full);
        assert_eq!(d.n_algorithms(), 100);
        assert_eq!(d.n_problems(), 500);
        let c97 = d.algorithm_index("C97").unwrap();
        assert_eq!(d.value(c97, 0), 97.0);
        assert_eq!(d.value(c97, 499), 96.0);
        let c98 = d.algorithm_index("C98").unwrap();
        assert_eq!((d.value(c98, 0), d.value(c98, 100)), (98.0, 97.0));
        let a = d.algorithm_index("A").unwrap();
        assert_eq!(d.row(a).iter().sum::<f64>(), 39_700.0);
    }

    #[test]
    fn columns_are_permutations() {
        let d = paper_dataset(PaperVariant::Full);
        for p in 0..d.n_problems() {
            let mut col = d.column(p);
            col.sort_by(f64::total_cmp);
            let expected: Vec<f64> = (1..=100).map(f64::from).collect();
            assert_eq!(col, expected);
        }
    }

    #[test]
    fn small_matches_display() {
        let s = paper_dataset(PaperVariant::Small);
        assert_eq!(s.algorithm_ids(), ["A", "B", "C1"]);
        for (row, (x, y)) in [(1.0, 99.0), (99.0, 98.0), (100.0, 100.0)].into_iter().enumerate() {
            assert!(s.row(row)[..100].iter().all(|&v| v == x));
            assert!(s.row(row)[100..].iter().all(|&v| v == y));
        }
    }

    #[test]
    fn order_consistent_columns_agree() {
        let d = order_consistent(3, 4, 11).unwrap();
        let r = to_ranks(&d);
        let first = r.column(0);
        for p in 1..4 {
            assert_eq!(r.column(p), first);
        }
        assert_eq!(d, order_consistent(3, 4, 11).unwrap());
    }

    #[test]
    fn random_matrix_contract() {
        let d = random_matrix(2, 3, 0.0, 1.0, 9).unwrap();
        assert!(d.values().iter().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(d, random_matrix(2, 3, 0.0, 1.0, 9).unwrap());
        assert!(random_matrix(2, 3, 1.0, 1.0, 9).is_err());
        let r = to_ranks(&random_matrix(6, 20, -3.0, 3.0, 1).unwrap());
        for p in 0..20 {
            assert_eq!(r.column(p).iter().sum::<f64>(), 21.0);
        }
    }
}
