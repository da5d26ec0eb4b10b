//! Comparison-based toy optimizers.
//!
//! Optimizers see the objective only through [`Evaluator`]: they get an
//! opaque [`Eval`] handle per evaluation and may ask which of two handles
//! is strictly better. Magnitudes stay inside the evaluator and end up in
//! the trace, where metrics may read them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::objective::ObjectiveSpec;
use crate::harness::rng::SplitMix64;
use crate::trace::SearchTrace;
use crate::transform::MonotoneTransform;

/// Handle to one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Eval(usize);

pub struct Evaluator<'a> {
    objective: &'a ObjectiveSpec,
    transform: Option<&'a MonotoneTransform>,
    budget: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(
        objective: &'a ObjectiveSpec,
        transform: Option<&'a MonotoneTransform>,
        budget: usize,
    ) -> Self {
        Self {
            objective,
            transform,
            budget,
            points: Vec::with_capacity(budget),
            values: Vec::with_capacity(budget),
        }
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.values.len()
    }

    pub fn evaluate(&mut self, x: Vec<f64>) -> Result<Eval> {
        if self.remaining() == 0 {
            return Err(Error::InvalidArgument("evaluation budget exhausted".into()));
        }
        let raw = self.objective.evaluate(&x);
        let v = match self.transform {
            Some(h) => h.eval(raw),
            None => raw,
        };
        if !v.is_finite() {
            return Err(Error::EvaluatorFailure(self.values.len()));
        }
        self.points.push(x);
        self.values.push(v);
        Ok(Eval(self.values.len() - 1))
    }

    /// Strict comparison; ties are never "better".
    pub fn better(&self, a: Eval, b: Eval) -> bool {
        self.values[a.0] < self.values[b.0]
    }

    fn into_trace(self) -> Result<SearchTrace> {
        SearchTrace::new(self.points, self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    RandomSearch,
    HillClimber1p1,
    PsoBasic,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 3] = [
        OptimizerKind::RandomSearch,
        OptimizerKind::HillClimber1p1,
        OptimizerKind::PsoBasic,
    ];
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::RandomSearch => "random_search",
            OptimizerKind::HillClimber1p1 => "hill_climber_1p1",
            OptimizerKind::PsoBasic => "pso_basic",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::UnknownOptimizer(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    pub swarm_size: usize,
    /// Mutation standard deviation as a fraction of the box width.
    pub step_scale: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            step_scale: 0.1,
            inertia: 0.7298,
            cognitive: 1.49618,
            social: 1.49618,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub params: OptimizerParams,
    /// Whether update logic reads objective values only through order
    /// comparisons. All built-in kinds do.
    pub comparison_based: bool,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            params: OptimizerParams::default(),
            comparison_based: true,
        }
    }

    pub fn id(&self) -> String {
        self.kind.to_string()
    }
}

pub fn optimizer_by_id(id: &str) -> Result<OptimizerSpec> {
    Ok(OptimizerSpec::new(id.parse()?))
}

/// Runs `optimizer` on `objective` for exactly `budget` evaluations.
pub fn run(
    optimizer: &OptimizerSpec,
    objective: &ObjectiveSpec,
    budget: usize,
    seed: u64,
) -> Result<SearchTrace> {
    run_transformed(optimizer, objective, None, budget, seed)
}

/// Like [`run`], but the optimizer sees `h∘f` instead of `f`. The
/// transform must already be resolved (see [`MonotoneTransform::resolve`]).
pub fn run_transformed(
    optimizer: &OptimizerSpec,
    objective: &ObjectiveSpec,
    transform: Option<&MonotoneTransform>,
    budget: usize,
    seed: u64,
) -> Result<SearchTrace> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let mut ev = Evaluator::new(objective, transform, budget);
    let mut rng = SplitMix64::new(seed);
    match optimizer.kind {
        OptimizerKind::RandomSearch => random_search(&mut ev, &mut rng)?,
        OptimizerKind::HillClimber1p1 => hill_climber(&mut ev, &mut rng, &optimizer.params)?,
        OptimizerKind::PsoBasic => pso(&mut ev, &mut rng, &optimizer.params)?,
    }
    ev.into_trace()
}

fn random_search(ev: &mut Evaluator<'_>, rng: &mut SplitMix64) -> Result<()> {
    while ev.remaining() > 0 {
        let x = ev.objective.random_point(rng);
        ev.evaluate(x)?;
    }
    Ok(())
}

fn hill_climber(ev: &mut Evaluator<'_>, rng: &mut SplitMix64, p: &OptimizerParams) -> Result<()> {
    let obj = ev.objective;
    let mut x = obj.random_point(rng);
    let mut incumbent = ev.evaluate(x.clone())?;
    while ev.remaining() > 0 {
        let mut cand: Vec<f64> = x
            .iter()
            .zip(obj.lower.iter().zip(&obj.upper))
            .map(|(v, (l, u))| v + p.step_scale * (u - l) * rng.normal())
            .collect();
        obj.clamp(&mut cand);
        let e = ev.evaluate(cand.clone())?;
        if ev.better(e, incumbent) {
            incumbent = e;
            x = cand;
        }
    }
    Ok(())
}

fn pso(ev: &mut Evaluator<'_>, rng: &mut SplitMix64, p: &OptimizerParams) -> Result<()> {
    let obj = ev.objective;
    let dim = obj.dimension();
    let size = p.swarm_size.max(1).min(ev.remaining());
    let width: Vec<f64> = obj.lower.iter().zip(&obj.upper).map(|(l, u)| u - l).collect();

    let mut pos: Vec<Vec<f64>> = (0..size).map(|_| obj.random_point(rng)).collect();
    let mut vel: Vec<Vec<f64>> = (0..size)
        .map(|_| width.iter().map(|w| rng.uniform(-0.1 * w, 0.1 * w)).collect())
        .collect();
    let mut pbest = pos.clone();
    let mut pbest_eval = Vec::with_capacity(size);
    let mut gbest: Option<(Vec<f64>, Eval)> = None;
    for x in &pos {
        let e = ev.evaluate(x.clone())?;
        pbest_eval.push(e);
        if gbest.as_ref().map_or(true, |(_, g)| ev.better(e, *g)) {
            gbest = Some((x.clone(), e));
        }
    }
    let (mut gpos, mut geval) = gbest.expect("swarm has at least one particle");

    'outer: loop {
        for i in 0..size {
            if ev.remaining() == 0 {
                break 'outer;
            }
            for d in 0..dim {
                let r1 = rng.next_f64();
                let r2 = rng.next_f64();
                let v = p.inertia * vel[i][d]
                    + p.cognitive * r1 * (pbest[i][d] - pos[i][d])
                    + p.social * r2 * (gpos[d] - pos[i][d]);
                vel[i][d] = v.clamp(-width[d], width[d]);
                pos[i][d] += vel[i][d];
            }
            obj.clamp(&mut pos[i]);
            let e = ev.evaluate(pos[i].clone())?;
            if ev.better(e, pbest_eval[i]) {
                pbest[i] = pos[i].clone();
                pbest_eval[i] = e;
                if ev.better(e, geval) {
                    gpos = pos[i].clone();
                    geval = e;
                }
            }
        }
    }
    Ok(())
}
