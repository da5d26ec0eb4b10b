//! Performance metrics and the isomorphism-normalization wrapper.
//!
//! A metric reads a [`MetricCase`] (a search trace plus what is known about
//! the objective) and returns a vector of outputs. Metrics are free to read
//! objective magnitudes; whether their outputs survive a monotone
//! re-modelling of the objective is what `iso_audit` checks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::PerformanceMatrix;
use crate::rank::rank_values;
use crate::trace::{point_key, ObjectiveSample, ParetoCase, SearchTrace};

/// Ratio of successive distances to the optimum value,
/// `|f_curr − f*| / |f_prev − f*|`.
pub fn conv_rate(f_prev: f64, f_curr: f64, f_star: f64) -> Result<f64> {
    let denom = (f_prev - f_star).abs();
    if denom == 0.0 {
        return Err(Error::DivisionByZero(
            "previous value already equals the optimum".into(),
        ));
    }
    Ok((f_curr - f_star).abs() / denom)
}

/// `‖x_{n+1} − x*‖ / ‖x_n − x*‖^q` for every consecutive pair of points.
/// A near-constant tail estimates the rate for order `q`.
pub fn conv_order_ratios(points: &[Vec<f64>], x_star: &[f64], q: f64) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "convergence order needs at least two points".into(),
        ));
    }
    if q < 1.0 {
        return Err(Error::InvalidArgument(format!("order q = {q} is below 1")));
    }
    let dist = points
        .iter()
        .map(|p| euclidean(p, x_star))
        .collect::<Result<Vec<_>>>()?;
    dist.windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[0] == 0.0 {
                Err(Error::DivisionByZero(format!(
                    "point {i} coincides with the optimizer"
                )))
            } else {
                Ok(w[1] / w[0].powf(q))
            }
        })
        .collect()
}

/// Inverted generational distance: mean over `reference` of the distance
/// to the nearest point of `approximation`.
pub fn igd(reference: &[Vec<f64>], approximation: &[Vec<f64>]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptySet("IGD reference set"));
    }
    if approximation.is_empty() {
        return Err(Error::EmptySet("IGD approximation set"));
    }
    let mut total = 0.0;
    for v in reference {
        let mut best = f64::INFINITY;
        for p in approximation {
            best = best.min(euclidean(v, p)?);
        }
        total += best;
    }
    Ok(total / reference.len() as f64)
}

fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// `(f_max − f) / (f_max − f_min)`: 1 at the best value, 0 at the worst.
pub fn max_min_scale(values: &[f64], f_max: f64, f_min: f64) -> Result<Vec<f64>> {
    if f_max == f_min {
        return Err(Error::Degenerate(f_max));
    }
    if f_max < f_min {
        return Err(Error::InvalidArgument(format!(
            "f_max {f_max} is below f_min {f_min}"
        )));
    }
    let span = f_max - f_min;
    Ok(values.iter().map(|&f| (f_max - f) / span).collect())
}

/// Column-wise max-min scaling of a performance matrix, using each
/// column's own extremes.
pub fn max_min_scale_matrix(d: &PerformanceMatrix) -> Result<PerformanceMatrix> {
    let ranges = d.column_ranges();
    if let Some((lo, _)) = ranges.iter().find(|(lo, hi)| lo == hi) {
        return Err(Error::Degenerate(*lo));
    }
    d.map_columns(|c, v| (ranges[c].1 - v) / (ranges[c].1 - ranges[c].0))
}

/// Empirical-rank normalization: each value becomes
/// `(rank − 1) / max(1, n − 1)` over the sample, ties averaged.
///
/// On the sampled points the result is order-equivalent to the input and
/// identical for every order-equivalent input. Nothing is claimed off the
/// sample. `f_star` becomes the normalized minimum.
pub fn iso_normalize(sample: &ObjectiveSample) -> ObjectiveSample {
    let n = sample.values.len();
    let scale = (n.max(2) - 1) as f64;
    let values: Vec<f64> = rank_values(&sample.values)
        .into_iter()
        .map(|r| (r - 1.0) / scale)
        .collect();
    let f_star = values.iter().copied().fold(None, |m: Option<f64>, v| {
        Some(m.map_or(v, |m| m.min(v)))
    });
    ObjectiveSample {
        domain_points: sample.domain_points.clone(),
        values,
        f_star,
        x_star: sample.x_star.clone(),
    }
}

/// Stable metric identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MetricId {
    /// Best-so-far convergence rate against `f*`.
    ConvRate,
    /// Decision-space convergence ratios of order `q`.
    ConvOrder { q: f64 },
    /// IGD on decision vectors.
    Igdx,
    /// IGD on objective vectors.
    Igdf,
    /// Max-min scaled trace values.
    MaxMin,
    /// `sign(u_i − u_{i+1})` for consecutive values.
    SignCmp,
    /// Base metric evaluated on the rank-normalized objective.
    IsoNorm(Box<MetricId>),
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::ConvRate => write!(f, "conv_rate"),
            MetricId::ConvOrder { q } if *q == 1.0 => write!(f, "conv_order"),
            MetricId::ConvOrder { q } => write!(f, "conv_order({q})"),
            MetricId::Igdx => write!(f, "igdx"),
            MetricId::Igdf => write!(f, "igdf"),
            MetricId::MaxMin => write!(f, "max_min"),
            MetricId::SignCmp => write!(f, "sign_cmp"),
            MetricId::IsoNorm(base) => write!(f, "iso_norm({base})"),
        }
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let unknown = || Error::UnknownMetric(s.to_string());
        if let Some(inner) = s.strip_prefix("iso_norm(").and_then(|r| r.strip_suffix(')')) {
            return Ok(MetricId::IsoNorm(Box::new(inner.parse()?)));
        }
        if let Some(q) = s.strip_prefix("conv_order(").and_then(|r| r.strip_suffix(')')) {
            let q: f64 = q.trim().parse().map_err(|_| unknown())?;
            return Ok(MetricId::ConvOrder { q });
        }
        match s {
            "conv_rate" => Ok(MetricId::ConvRate),
            "conv_order" => Ok(MetricId::ConvOrder { q: 1.0 }),
            "igdx" => Ok(MetricId::Igdx),
            "igdf" => Ok(MetricId::Igdf),
            "max_min" => Ok(MetricId::MaxMin),
            "sign_cmp" => Ok(MetricId::SignCmp),
            _ => Err(unknown()),
        }
    }
}

/// Everything a metric may read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCase {
    pub trace: SearchTrace,
    pub context: ObjectiveSample,
    pub pareto: Option<ParetoCase>,
}

impl MetricCase {
    pub fn new(trace: SearchTrace, context: ObjectiveSample) -> Self {
        Self {
            trace,
            context,
            pareto: None,
        }
    }

    pub fn with_pareto(mut self, pareto: ParetoCase) -> Self {
        self.pareto = Some(pareto);
        self
    }

    /// Applies `h` to every objective value the case holds: trace values,
    /// sampled values, `f*`, and each objective coordinate of the Pareto
    /// sets. Decision vectors are untouched.
    pub fn map_objective(&self, h: impl Fn(f64) -> f64) -> Result<Self> {
        let trace = self
            .trace
            .with_values(self.trace.values().iter().map(|&v| h(v)).collect())?;
        let context = ObjectiveSample {
            domain_points: self.context.domain_points.clone(),
            values: self.context.values.iter().map(|&v| h(v)).collect(),
            f_star: self.context.f_star.map(&h),
            x_star: self.context.x_star.clone(),
        };
        let pareto = self.pareto.as_ref().map(|p| {
            let map = |pts: &[crate::trace::ParetoPoint]| {
                pts.iter()
                    .map(|pt| crate::trace::ParetoPoint {
                        decision: pt.decision.clone(),
                        objectives: pt.objectives.iter().map(|&v| h(v)).collect(),
                    })
                    .collect()
            };
            ParetoCase {
                reference: map(&p.reference),
                approximation: map(&p.approximation),
            }
        });
        Ok(Self {
            trace,
            context,
            pareto,
        })
    }

    /// Every objective value in the case, for range-dependent transforms.
    pub fn objective_values(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.trace.values().to_vec();
        out.extend(&self.context.values);
        out.extend(self.context.f_star);
        if let Some(p) = &self.pareto {
            for pt in p.reference.iter().chain(&p.approximation) {
                out.extend(&pt.objectives);
            }
        }
        out
    }
}

/// Evaluates `metric` on `case`.
pub fn evaluate(metric: &MetricId, case: &MetricCase) -> Result<Vec<f64>> {
    let name = || metric.to_string();
    match metric {
        MetricId::ConvRate => {
            let f_star = case.context.f_star.ok_or_else(|| Error::MissingContext {
                metric: name(),
                field: "f_star",
            })?;
            let best = case.trace.best_so_far();
            if best.len() < 2 {
                return Err(Error::InvalidArgument(
                    "conv_rate needs a trace of at least two values".into(),
                ));
            }
            best.windows(2)
                .map(|w| conv_rate(w[0], w[1], f_star))
                .collect()
        }
        MetricId::ConvOrder { q } => {
            let x_star = case
                .context
                .x_star
                .as_ref()
                .ok_or_else(|| Error::MissingContext {
                    metric: name(),
                    field: "x_star",
                })?;
            conv_order_ratios(case.trace.points(), x_star, *q)
        }
        MetricId::Igdx | MetricId::Igdf => {
            let p = case.pareto.as_ref().ok_or_else(|| Error::MissingContext {
                metric: name(),
                field: "pareto",
            })?;
            let pick = |pts: &[crate::trace::ParetoPoint]| -> Vec<Vec<f64>> {
                pts.iter()
                    .map(|pt| {
                        if matches!(metric, MetricId::Igdx) {
                            pt.decision.clone()
                        } else {
                            pt.objectives.clone()
                        }
                    })
                    .collect()
            };
            Ok(vec![igd(&pick(&p.reference), &pick(&p.approximation))?])
        }
        MetricId::MaxMin => {
            let all = case
                .trace
                .values()
                .iter()
                .chain(&case.context.values)
                .chain(case.context.f_star.iter());
            let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            max_min_scale(case.trace.values(), hi, lo)
        }
        MetricId::SignCmp => {
            let v = case.trace.values();
            if v.len() < 2 {
                return Err(Error::InvalidArgument(
                    "sign_cmp needs a trace of at least two values".into(),
                ));
            }
            Ok(v.windows(2)
                .map(|w| match w[0].partial_cmp(&w[1]) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Less) => -1.0,
                    _ => 0.0,
                })
                .collect())
        }
        MetricId::IsoNorm(base) => {
            normalize_metric(base, &case.context, &case.trace, case.pareto.clone())
        }
    }
}

/// `M'(f) = M(N(f))`: evaluates `base` after replacing every objective
/// value with its rank-normalized counterpart over `sample`.
///
/// Each trace point must occur in the sample. If the sample has no points,
/// the trace itself is used as the sample.
pub fn normalize_metric(
    base: &MetricId,
    sample: &ObjectiveSample,
    trace: &SearchTrace,
    pareto: Option<ParetoCase>,
) -> Result<Vec<f64>> {
    if matches!(base, MetricId::Igdx | MetricId::Igdf) && pareto.is_some() {
        if matches!(base, MetricId::Igdf) {
            return Err(Error::InvalidArgument(
                "iso_norm does not define a normalization of objective-space point sets".into(),
            ));
        }
        // decision space is untouched by normalization
        let case = MetricCase {
            trace: trace.clone(),
            context: sample.clone(),
            pareto,
        };
        return evaluate(base, &case);
    }
    let sample = if sample.is_empty() {
        ObjectiveSample::from_trace(trace)
            .f_star(sample.f_star)
            .x_star(sample.x_star.clone())
    } else {
        sample.clone()
    };
    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(sample.len());
    for (i, p) in sample.domain_points.iter().enumerate() {
        index.entry(point_key(p)).or_insert(i);
    }
    let positions = trace
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            index
                .get(&point_key(p))
                .copied()
                .ok_or(Error::PointNotSampled { index: i })
        })
        .collect::<Result<Vec<_>>>()?;
    let normalized = iso_normalize(&sample);
    let values = positions.iter().map(|&i| normalized.values[i]).collect();
    let case = MetricCase {
        trace: trace.with_values(values)?,
        context: normalized,
        pareto,
    };
    evaluate(base, &case)
}
