//! Isomorphism audits for metrics and search traces.
//!
//! Two probes, both sound for violations only:
//!
//! * the transform suite evaluates a metric on `f` and on `h∘f` for a set
//!   of strictly increasing `h` and records the largest output change;
//! * the perturbation probe nudges one value upward by less than the gap
//!   to the next larger value. The nudged function is still isomorphic to
//!   the original, so any change in the metric certifies a violation of
//!   the zero-partial-derivative necessary condition.
//!
//! Passing both is evidence, not proof; reports say "no violation found".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{run_transformed, ObjectiveSpec, OptimizerSpec};
use crate::metrics::{evaluate, MetricCase, MetricId};
use crate::trace::point_key;
use crate::transform::MonotoneTransform;

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.5, 0.1, 0.01];
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Relative factor of the sensitivity threshold `factor · (1 + |T|)`.
pub const SENSITIVITY_FACTOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No transform or perturbation changed the output.
    Isomorphic,
    /// Linear transforms pass, some nonlinear probe changed the output.
    LinearOnly,
    /// Even a linear transform changed the output.
    Violates,
}

impl Verdict {
    pub fn summary(&self) -> &'static str {
        match self {
            Verdict::Isomorphic => "no violation found",
            Verdict::LinearOnly => "linear isomorphism only: violates the isomorphism criterion",
            Verdict::Violates => "violates even the linear isomorphism criterion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformDelta {
    pub transform: String,
    pub linear: bool,
    pub max_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensitivity {
    pub index: usize,
    pub fraction: f64,
    pub epsilon: f64,
    pub estimate: f64,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoAuditReport {
    pub metric: String,
    pub verdict: Verdict,
    pub summary: String,
    pub tolerance: f64,
    pub deltas: Vec<TransformDelta>,
    pub sensitivities: Vec<Sensitivity>,
    pub notes: Vec<String>,
}

/// Largest absolute componentwise difference; infinite on length mismatch.
fn max_delta(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Evaluates `metric` under `h∘f` for one suite member, returning the
/// transformed case's output.
fn evaluate_under(metric: &MetricId, case: &MetricCase, t: &MonotoneTransform) -> Result<Vec<f64>> {
    let values = case.objective_values();
    let h = t.resolve(&values);
    let wrap = |e: Error| Error::UnderTransform {
        metric: metric.to_string(),
        transform: t.to_string(),
        source: Box::new(e),
    };
    h.check_domain(&values).map_err(wrap)?;
    let mapped = case.map_objective(|v| h.eval(v)).map_err(wrap)?;
    evaluate(metric, &mapped).map_err(wrap)
}

/// Runs the transform suite, and the perturbation probe when the trace
/// values are pairwise distinct.
pub fn audit_metric(
    metric: &MetricId,
    case: &MetricCase,
    suite: &[MonotoneTransform],
    tolerance: f64,
) -> Result<IsoAuditReport> {
    let base = evaluate(metric, case)?;
    let mut deltas = Vec::with_capacity(suite.len());
    for t in suite {
        let out = evaluate_under(metric, case, t)?;
        deltas.push(TransformDelta {
            transform: t.to_string(),
            linear: t.is_linear(),
            max_delta: max_delta(&base, &out),
        });
    }

    let mut notes = Vec::new();
    let sensitivities = match perturbation_audit(metric, case, &DEFAULT_FRACTIONS) {
        Ok(s) => s,
        Err(Error::DuplicateTraceValues { first, second }) => {
            notes.push(format!(
                "perturbation probe skipped: trace values {first} and {second} coincide"
            ));
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    if matches!(metric, MetricId::IsoNorm(_)) {
        notes.push(
            "normalization is the empirical rank map on the sampled points; \
             the axioms are guaranteed on that set only"
                .into(),
        );
    }
    if matches!(metric, MetricId::Igdx | MetricId::Igdf) {
        notes.push("perturbation probe reads trace values only; point-set metrics are covered by the transform suite".into());
    }

    let linear_fail = deltas.iter().any(|d| d.linear && d.max_delta > tolerance);
    let nonlinear_fail = deltas.iter().any(|d| !d.linear && d.max_delta > tolerance);
    let sens_fail = sensitivities.iter().any(|s| s.exceeds);
    let verdict = if linear_fail {
        Verdict::Violates
    } else if nonlinear_fail || sens_fail {
        Verdict::LinearOnly
    } else {
        Verdict::Isomorphic
    };
    Ok(IsoAuditReport {
        metric: metric.to_string(),
        verdict,
        summary: verdict.summary().to_string(),
        tolerance,
        deltas,
        sensitivities,
        notes,
    })
}

/// Finite-difference sensitivity of the metric to each trace value, using
/// only isomorphism-preserving upward perturbations.
///
/// For index `j` the step is `fraction × gap`, where `gap` is the distance
/// from `u_j` to the next larger known objective value (trace or sample).
/// The largest value has no gap and is stepped by `fraction·|u_j| + fraction`.
/// The perturbation moves every occurrence of point `x_j` in the case.
pub fn perturbation_audit(
    metric: &MetricId,
    case: &MetricCase,
    fractions: &[f64],
) -> Result<Vec<Sensitivity>> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "perturbation fraction {f} is outside (0, 1)"
        )));
    }
    let u = case.trace.values();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if u[i] == u[j] {
                return Err(Error::DuplicateTraceValues { first: i, second: j });
            }
        }
    }
    let base = evaluate(metric, case)?;
    let scale = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = SENSITIVITY_FACTOR * (1.0 + scale);

    let mut known: Vec<f64> = u.to_vec();
    known.extend(&case.context.values);
    let mut out = Vec::with_capacity(u.len() * fractions.len());
    for (j, &uj) in u.iter().enumerate() {
        let next = known
            .iter()
            .copied()
            .filter(|&v| v > uj)
            .fold(f64::INFINITY, f64::min);
        let key = point_key(&case.trace.points()[j]);
        for &fraction in fractions {
            let step = if next.is_finite() {
                fraction * (next - uj)
            } else {
                fraction * uj.abs() + fraction
            };
            let moved = uj + step;
            let epsilon = moved - uj;
            if epsilon <= 0.0 {
                out.push(Sensitivity {
                    index: j,
                    fraction,
                    epsilon: 0.0,
                    estimate: 0.0,
                    exceeds: false,
                });
                continue;
            }
            let perturbed = perturb_point(case, &key, moved)?;
            let after = evaluate(metric, &perturbed)?;
            let estimate = max_delta(&base, &after) / epsilon;
            out.push(Sensitivity {
                index: j,
                fraction,
                epsilon,
                estimate,
                exceeds: estimate > threshold,
            });
        }
    }
    Ok(out)
}

fn perturb_point(case: &MetricCase, key: &[u64], value: f64) -> Result<MetricCase> {
    let trace_values = case
        .trace
        .points()
        .iter()
        .zip(case.trace.values())
        .map(|(p, &v)| if point_key(p) == key { value } else { v })
        .collect();
    let mut perturbed = case.clone();
    perturbed.trace = case.trace.with_values(trace_values)?;
    for (p, v) in perturbed
        .context
        .domain_points
        .iter()
        .zip(perturbed.context.values.iter_mut())
    {
        if point_key(p) == key {
            *v = value;
        }
    }
    Ok(perturbed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvarianceResult {
    pub optimizer: String,
    pub objective: String,
    pub transform: String,
    pub seed: u64,
    pub budget: usize,
    pub identical: bool,
    pub first_divergence: Option<usize>,
    pub hash_original: String,
    pub hash_transformed: String,
}

/// Runs the optimizer with the same seed on `f` and on `h∘f` and compares
/// the visited points element by element.
pub fn trace_invariance_check(
    optimizer: &OptimizerSpec,
    objective: &ObjectiveSpec,
    transform: &MonotoneTransform,
    seed: u64,
    budget: usize,
) -> Result<InvarianceResult> {
    if !optimizer.comparison_based {
        return Err(Error::NotComparisonBased(optimizer.id()));
    }
    let (lo, hi) = objective.value_bounds();
    let h = transform.resolve(&[lo, hi]);
    h.check_domain(&[lo, hi])?;
    let original = run_transformed(optimizer, objective, None, budget, seed)?;
    let mapped = run_transformed(optimizer, objective, Some(&h), budget, seed)?;
    let first_divergence = original
        .points()
        .iter()
        .zip(mapped.points())
        .position(|(a, b)| point_key(a) != point_key(b))
        .or_else(|| (original.len() != mapped.len()).then_some(original.len().min(mapped.len())));
    Ok(InvarianceResult {
        optimizer: optimizer.id(),
        objective: objective.id.clone(),
        transform: transform.to_string(),
        seed,
        budget,
        identical: first_divergence.is_none(),
        first_divergence,
        hash_original: original.point_hash(),
        hash_transformed: mapped.point_hash(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{objective_by_id, OptimizerKind};
    use crate::trace::{ObjectiveSample, SearchTrace};
    use crate::transform::transform_suite;

    fn worked() -> MetricCase {
        MetricCase::new(
            SearchTrace::from_values(vec![10.0, 1.0]).unwrap(),
            ObjectiveSample::with_optimum(0.0),
        )
    }

    #[test]
    fn conv_rate_is_linear_only() {
        let r = audit_metric(&MetricId::ConvRate, &worked(), &transform_suite(Some(0.0)), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::LinearOnly);
        for d in &r.deltas {
            if d.linear {
                assert!(d.max_delta <= 1e-12, "{d:?}");
            }
        }
        let cube = r.deltas.iter().find(|d| d.transform == "odd_power(3)").unwrap();
        assert!((cube.max_delta - 0.099).abs() < 1e-12);
    }

    #[test]
    fn sign_metric_is_isomorphic() {
        let r = audit_metric(&MetricId::SignCmp, &worked(), &transform_suite(Some(0.0)), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Isomorphic);
        assert_eq!(r.summary, "no violation found");
        assert!(r.sensitivities.iter().all(|s| s.estimate == 0.0));
    }

    #[test]
    fn perturbation_matches_analytic_derivative() {
        let s = perturbation_audit(&MetricId::ConvRate, &worked(), &[0.01]).unwrap();
        // ∂(u2/u1)/∂u1 = −u2/u1² → magnitude 0.01
        assert!((s[0].estimate - 0.01).abs() / 0.01 < 0.05, "{s:?}");
        assert!(s[0].exceeds);
        // ∂(u2/u1)/∂u2 = 1/u1 = 0.1, step stays below the gap of 9
        assert!((s[1].estimate - 0.1).abs() < 1e-9);
        assert!((s[1].epsilon - 0.09).abs() < 1e-12);
    }

    #[test]
    fn duplicates_block_the_probe() {
        let case = MetricCase::new(
            SearchTrace::from_values(vec![3.0, 3.0]).unwrap(),
            ObjectiveSample::with_optimum(0.0),
        );
        assert!(matches!(
            perturbation_audit(&MetricId::ConvRate, &case, &[0.1]),
            Err(Error::DuplicateTraceValues { .. })
        ));
        assert!(perturbation_audit(&MetricId::ConvRate, &worked(), &[1.5]).is_err());
        // audit_metric still runs the suite and notes the skip
        let r = audit_metric(&MetricId::SignCmp, &case, &transform_suite(None), 1e-9).unwrap();
        assert!(r.sensitivities.is_empty());
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn normalized_metric_has_zero_sensitivity() {
        let values = vec![9.0, 4.0, 6.0, 1.0, 2.5];
        let trace = SearchTrace::from_values(values).unwrap();
        let case = MetricCase::new(trace.clone(), ObjectiveSample::from_trace(&trace).f_star(Some(0.0)));
        let metric = MetricId::IsoNorm(Box::new(MetricId::MaxMin));
        let s = perturbation_audit(&metric, &case, &DEFAULT_FRACTIONS).unwrap();
        assert!(s.iter().all(|s| s.estimate == 0.0), "{s:?}");
    }

    #[test]
    fn transform_failures_carry_the_transform() {
        let case = MetricCase::new(
            SearchTrace::from_values(vec![10.0, -5.0]).unwrap(),
            ObjectiveSample::with_optimum(0.0),
        );
        let err = audit_metric(&MetricId::SignCmp, &case, &[MonotoneTransform::log_shift(0.0)], 1e-9)
            .unwrap_err();
        assert!(matches!(err, Error::UnderTransform { ref transform, .. } if transform == "log_shift(0)"));
    }

    #[test]
    fn refuses_non_comparison_optimizers() {
        let mut spec = OptimizerSpec::new(OptimizerKind::RandomSearch);
        spec.comparison_based = false;
        let o = objective_by_id("sphere").unwrap();
        let err = trace_invariance_check(&spec, &o, &MonotoneTransform::OddPower { p: 3 }, 1, 10);
        assert!(matches!(err, Err(Error::NotComparisonBased(_))));
    }

    #[test]
    fn spec_examples_for_trace_invariance() {
        let sphere = objective_by_id("sphere-2d").unwrap();
        let cases = [
            (OptimizerKind::RandomSearch, MonotoneTransform::OddPower { p: 3 }, 42, 200),
            (OptimizerKind::HillClimber1p1, MonotoneTransform::exponential(), 7, 200),
            (OptimizerKind::PsoBasic, MonotoneTransform::Linear { a: 2.0, b: 5.0 }, 1, 500),
        ];
        for (kind, t, seed, budget) in cases {
            let r = trace_invariance_check(&OptimizerSpec::new(kind), &sphere, &t, seed, budget).unwrap();
            assert!(r.identical, "{r:?}");
            assert_eq!(r.hash_original, r.hash_transformed);
            let again = trace_invariance_check(&OptimizerSpec::new(kind), &sphere, &t, seed, budget).unwrap();
            assert_eq!(r, again);
        }
    }
}
