//! Bradley-Terry strengths by the Zermelo fixed point with Newman's update.

use petgraph::algo::{has_path_connecting, tarjan_scc};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::PairwiseWinMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub drop_zero_win: bool,
}

impl Default for BtOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-13,
            drop_zero_win: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BradleyTerryFit {
    /// Retained labels, aligned with `theta`.
    pub algorithm_ids: Vec<String>,
    pub theta: Vec<f64>,
    pub dropped: Vec<String>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest relative stationarity residual over retained algorithms.
    pub residual: f64,
}

impl BradleyTerryFit {
    pub fn theta_of(&self, label: &str) -> Result<f64> {
        match self.algorithm_ids.iter().position(|l| l == label) {
            Some(i) => Ok(self.theta[i]),
            None if self.dropped.iter().any(|l| l == label) => {
                Err(Error::DroppedLabel(label.to_string()))
            }
            None => Err(Error::UnknownLabel {
                kind: "algorithm",
                label: label.to_string(),
            }),
        }
    }

    /// `θ_a / (θ_a + θ_b)`.
    pub fn probability(&self, a: &str, b: &str) -> Result<f64> {
        let (ta, tb) = (self.theta_of(a)?, self.theta_of(b)?);
        Ok(ta / (ta + tb))
    }
}

fn win_graph(w: &PairwiseWinMatrix) -> (DiGraph<usize, ()>, Vec<NodeIndex>) {
    let mut g = DiGraph::new();
    let nodes: Vec<_> = (0..w.k()).map(|i| g.add_node(i)).collect();
    for i in 0..w.k() {
        for j in 0..w.k() {
            if i != j && w.wins[i][j] > 0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    (g, nodes)
}

/// Strongly connected components of the "beats at least once" graph,
/// each sorted ascending.
pub fn win_components(w: &PairwiseWinMatrix) -> Vec<Vec<usize>> {
    let (g, _) = win_graph(w);
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| g[n]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

/// Whether `a` beats `b` through some chain of observed wins.
pub fn reaches(w: &PairwiseWinMatrix, a: usize, b: usize) -> bool {
    let (g, nodes) = win_graph(w);
    has_path_connecting(&g, nodes[a], nodes[b], None)
}

pub fn bt_fit(w: &PairwiseWinMatrix, options: &BtOptions) -> Result<BradleyTerryFit> {
    if (0..w.k()).all(|i| w.total_wins(i) == 0) {
        return Err(Error::NoComparisons);
    }
    let keep: Vec<usize> = (0..w.k())
        .filter(|&i| !options.drop_zero_win || w.total_wins(i) > 0)
        .collect();
    let dropped = (0..w.k())
        .filter(|i| !keep.contains(i))
        .map(|i| w.algorithm_ids[i].clone())
        .collect();
    let sub = w.restrict(&keep);
    if win_components(&sub).len() != 1 {
        return Err(Error::Disconnected);
    }

    let k = sub.k();
    let n: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| (sub.wins[i][j] + sub.wins[j][i]) as f64).collect())
        .collect();

    let mut theta = vec![1.0; k];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        iterations += 1;
        let prev = theta.clone();
        for i in 0..k {
            // Newman's form: Σ_j w_ij θ_j/(θ_i+θ_j) over Σ_j w_ji/(θ_i+θ_j)
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..k {
                if j == i || n[i][j] == 0.0 {
                    continue;
                }
                let s = theta[i] + theta[j];
                num += sub.wins[i][j] as f64 * theta[j] / s;
                den += sub.wins[j][i] as f64 / s;
            }
            // den is 0 only for a lone algorithm
            if den > 0.0 {
                theta[i] = num / den;
            }
        }
        let log_mean = theta.iter().map(|t| t.ln()).sum::<f64>() / k as f64;
        let g = log_mean.exp();
        theta.iter_mut().for_each(|t| *t /= g);
        let change = theta
            .iter()
            .zip(&prev)
            .map(|(t, p)| ((t - p) / p).abs())
            .fold(0.0, f64::max);
        if change < options.tol {
            converged = true;
            break;
        }
    }

    Ok(BradleyTerryFit {
        residual: stationarity_residual(&sub, &theta),
        algorithm_ids: sub.algorithm_ids,
        theta,
        dropped,
        iterations,
        converged,
    })
}

/// `max_i |lhs_i − rhs_i| / (lhs_i + rhs_i)` for the fixed-point equations
/// `Σ_j w_ij θ_j/(θ_i+θ_j) = θ_i Σ_j w_ji/(θ_i+θ_j)`.
pub fn stationarity_residual(w: &PairwiseWinMatrix, theta: &[f64]) -> f64 {
    let k = w.k();
    let mut worst: f64 = 0.0;
    for i in 0..k {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for j in 0..k {
            if j == i {
                continue;
            }
            let s = theta[i] + theta[j];
            lhs += w.wins[i][j] as f64 * theta[j] / s;
            rhs += theta[i] * w.wins[j][i] as f64 / s;
        }
        if lhs + rhs > 0.0 {
            worst = worst.max((lhs - rhs).abs() / (lhs + rhs));
        }
    }
    worst
}
