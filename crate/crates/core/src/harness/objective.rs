//! Benchmark objectives with known optima.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::rng::SplitMix64;
use crate::trace::ObjectiveSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Sphere,
    Rastrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub id: String,
    pub kind: ObjectiveKind,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub f_star: Option<f64>,
    pub x_star: Option<Vec<f64>>,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, dimension: usize) -> Self {
        let (name, bound) = match kind {
            ObjectiveKind::Sphere => ("sphere", 5.12),
            ObjectiveKind::Rastrigin => ("rastrigin", 5.12),
        };
        Self {
            id: format!("{name}-{dimension}d"),
            kind,
            lower: vec![-bound; dimension],
            upper: vec![bound; dimension],
            f_star: Some(0.0),
            x_star: Some(vec![0.0; dimension]),
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self.kind {
            ObjectiveKind::Sphere => x.iter().map(|v| v * v).sum(),
            ObjectiveKind::Rastrigin => {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (TAU * v).cos())
                        .sum::<f64>()
            }
        }
    }

    /// Bounds on the objective over the box: `(f*, upper bound)`.
    pub fn value_bounds(&self) -> (f64, f64) {
        let sq: f64 = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().max(u.abs()).powi(2))
            .sum();
        let hi = match self.kind {
            ObjectiveKind::Sphere => sq,
            ObjectiveKind::Rastrigin => sq + 20.0 * self.dimension() as f64,
        };
        (self.f_star.unwrap_or(0.0), hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| (l..=u).contains(&v))
    }

    pub fn random_point(&self, rng: &mut SplitMix64) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| rng.uniform(l, u))
            .collect()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

/// Sphere and Rastrigin in 2 and 5 dimensions.
pub fn benchmark_suite() -> Vec<ObjectiveSpec> {
    [ObjectiveKind::Sphere, ObjectiveKind::Rastrigin]
        .into_iter()
        .flat_map(|k| [2, 5].map(|d| ObjectiveSpec::new(k, d)))
        .collect()
}

/// Looks up a suite member; a bare `sphere`/`rastrigin` means 2-d.
pub fn objective_by_id(id: &str) -> Result<ObjectiveSpec> {
    let full = match id {
        "sphere" | "rastrigin" => format!("{id}-2d"),
        other => other.to_string(),
    };
    benchmark_suite()
        .into_iter()
        .find(|o| o.id == full)
        .ok_or_else(|| Error::UnknownObjective(id.to_string()))
}

/// Monte Carlo sample of the objective on its box, for empirical-rank
/// normalization of continuous domains. The normalization axioms then
/// hold on these points only.
pub fn sample_objective(objective: &ObjectiveSpec, size: usize, seed: u64) -> ObjectiveSample {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Vec<f64>> = (0..size).map(|_| objective.random_point(&mut rng)).collect();
    let values = points.iter().map(|p| objective.evaluate(p)).collect();
    ObjectiveSample {
        domain_points: points,
        values,
        f_star: objective.f_star,
        x_star: objective.x_star.clone(),
    }
}
