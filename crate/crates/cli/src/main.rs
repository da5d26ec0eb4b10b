use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use critaudit::generators::{order_consistent, paper_dataset, random_matrix, PaperVariant};
use critaudit::harness::{objective_by_id, optimizer_by_id, run_transformed, sample_objective};
use critaudit::iia::{iia_check, simpson_check, stability_curve, SubsetStrategy};
use critaudit::iso_audit::{audit_metric, trace_invariance_check, DEFAULT_TOLERANCE};
use critaudit::metrics::{MetricCase, MetricId};
use critaudit::rank::{to_pairwise, to_ranks};
use critaudit::ranking::{bt_fit, ComparisonMethod, FriedmanResult};
use critaudit::report::{
    load_reports, render_markdown, GenerateReport, HarnessReport, RankReport, Report, ReportBody,
};
use critaudit::trace::{ObjectiveSample, SearchTrace};
use critaudit::transform::{transform_suite, MonotoneTransform};
use critaudit::{Error, PerformanceMatrix};

/// Audits performance metrics for isomorphism and ranking methods for IIA.
///
/// Exit status: 0 clean, 1 a paradox or violation was found, 2 usage or
/// data error.
#[derive(Debug, Parser, Serialize)]
#[command(name = "critaudit", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "CRITAUDIT_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Write a performance matrix CSV.
    Generate(GenerateArgs),
    /// Rank the algorithms in a performance matrix.
    Rank(RankArgs),
    /// Search for IIA (algorithm subsets) or Simpson (problem subsets) reversals.
    AuditIia(AuditIiaArgs),
    /// Audit a metric for isomorphism, or an optimizer for trace invariance.
    AuditIso(AuditIsoArgs),
    /// Run a seeded optimizer and write its search trace.
    Harness(HarnessArgs),
    /// Summarize JSON artifacts as markdown.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Variant {
    Full,
    Small,
    OrderConsistent,
    Random,
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "full")]
    variant: Variant,
    /// Algorithms (order-consistent and random variants).
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Problems (order-consistent and random variants).
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    lo: f64,
    #[arg(long, default_value_t = 1.0)]
    hi: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Where to write the JSON report.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct RankArgs {
    /// friedman_cd(control|allpairs), bradley_terry or raw_mean.
    #[arg(long)]
    method: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = critaudit::ranking::DEFAULT_ALPHA)]
    alpha: f64,
    /// Compare two algorithms, as `A,B`.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AuditIiaArgs {
    #[arg(long)]
    method: String,
    #[arg(long)]
    input: PathBuf,
    /// The compared algorithms, as `A,B`.
    #[arg(long)]
    pair: String,
    #[arg(long, default_value_t = critaudit::ranking::DEFAULT_ALPHA)]
    alpha: f64,
    /// Explicit algorithm subset to test; repeatable.
    #[arg(long = "subset")]
    subsets: Vec<String>,
    /// Explicit problem subset to test (Simpson direction); repeatable.
    #[arg(long = "problem-subset", conflicts_with_all = ["subsets", "exhaustive"])]
    problem_subsets: Vec<String>,
    /// Try every subset of third parties (at most 12 algorithms).
    #[arg(long, conflicts_with = "subsets")]
    exhaustive: bool,
    /// Method evaluations allowed for greedy removal.
    #[arg(long, default_value_t = critaudit::iia::DEFAULT_GREEDY_BUDGET)]
    budget: usize,
    /// Write a stability curve CSV instead of searching subsets.
    #[arg(long, conflicts_with_all = ["subsets", "problem_subsets", "exhaustive"])]
    curve: Option<PathBuf>,
    /// Matrix whose preference the curve is measured against (default: input).
    #[arg(long, requires = "curve")]
    reference: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,10,50,200")]
    m_grid: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AuditIsoArgs {
    /// Metric id, e.g. conv_rate, max_min, sign_cmp, iso_norm(conv_rate).
    #[arg(long, required_unless_present = "optimizer")]
    metric: Option<String>,
    /// Trace CSV (`x0,…,value`).
    #[arg(long, required_unless_present = "optimizer")]
    trace: Option<PathBuf>,
    /// Known optimum value.
    #[arg(long)]
    fstar: Option<f64>,
    /// Sampled domain points, same format as a trace.
    #[arg(long, conflicts_with = "mc_samples")]
    sample: Option<PathBuf>,
    /// Benchmark objective: sampled for normalization, or run for invariance.
    #[arg(long)]
    objective: Option<String>,
    /// Monte Carlo sample size when sampling `--objective`.
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Check trace invariance of this optimizer instead of auditing a metric.
    #[arg(long, conflicts_with_all = ["metric", "trace"], requires = "objective")]
    optimizer: Option<String>,
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct HarnessArgs {
    #[arg(long)]
    optimizer: String,
    #[arg(long)]
    objective: String,
    #[arg(long)]
    budget: usize,
    /// Monotone transform applied to the objective, e.g. odd_power(3).
    #[arg(long)]
    transform: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ReportArgs {
    /// JSON artifacts written by other subcommands.
    #[arg(required = true)]
    artifacts: Vec<PathBuf>,
    /// Write the markdown here instead of stdout.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

const DEFAULT_MC_SAMPLES: usize = 10_000;

enum Outcome {
    Clean,
    Violation,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version exit 0, usage errors exit 2
        Err(e) => e.exit(),
    };
    match dispatch(&cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(hint) = hint(&e) {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(2)
        }
    }
}

fn hint(e: &anyhow::Error) -> Option<&'static str> {
    let missing = e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::NotFound)
    });
    if missing {
        return Some("check that the path exists");
    }
    match e.downcast_ref::<Error>()? {
        Error::Parse { .. } | Error::Csv(_) => {
            Some("matrices use a header `algorithm,<problem ids>`; traces use `x0,…,value`")
        }
        Error::UnknownLabel { .. } => Some("labels must match the CSV exactly, e.g. --pair A,B"),
        Error::UnknownMethod(_) => {
            Some("methods: friedman_cd(control), friedman_cd(allpairs), bradley_terry, raw_mean")
        }
        Error::UnknownMetric(_) => {
            Some("metrics: conv_rate, conv_order, igdx, igdf, max_min, sign_cmp, iso_norm(<metric>)")
        }
        Error::UnknownOptimizer(_) => Some("optimizers: random_search, hill_climber_1p1, pso_basic"),
        Error::UnknownObjective(_) => {
            Some("objectives: sphere-2d, sphere-5d, rastrigin-2d, rastrigin-5d")
        }
        Error::Schema(_) => Some("regenerate the artifacts with this version of critaudit"),
        Error::MissingContext { .. } => Some("pass --fstar for metrics that need the optimum"),
        Error::PointNotSampled { .. } => {
            Some("normalized metrics need every trace point in --sample, or use --objective")
        }
        _ => None,
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn emit(report: &Report, json: Option<&Path>) -> Result<()> {
    if let Some(p) = json {
        write_atomic(p, report.to_json()?.as_bytes())?;
    }
    print!("{}", render_markdown(std::slice::from_ref(report))?);
    Ok(())
}

fn load_matrix(path: &Path) -> Result<PerformanceMatrix> {
    PerformanceMatrix::load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_pair(s: &str) -> Result<(String, String)> {
    match s.split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => bail!("--pair expects two labels separated by a comma, got `{s}`"),
    }
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_method(id: &str, alpha: f64) -> Result<ComparisonMethod> {
    Ok(id.parse::<ComparisonMethod>()?.with_alpha(alpha))
}

fn config(cli: &Cli) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(&cli.command)?;
    // the subcommand is the report's `command`; keep just its arguments
    if let serde_json::Value::Object(map) = &mut v {
        if let Some((_, inner)) = map.iter_mut().next() {
            v = inner.take();
        }
    }
    if let serde_json::Value::Object(map) = &mut v {
        map.insert("seed".into(), cli.seed.into());
    }
    Ok(v)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cfg = config(cli)?;
    match &cli.command {
        Command::Generate(a) => generate(a, cli.seed, cfg),
        Command::Rank(a) => rank(a, cfg),
        Command::AuditIia(a) => audit_iia(a, cli.seed, cfg),
        Command::AuditIso(a) => audit_iso(a, cli.seed, cfg),
        Command::Harness(a) => harness(a, cli.seed, cfg),
        Command::Report(a) => report(a),
    }
}

fn generate(a: &GenerateArgs, seed: u64, cfg: serde_json::Value) -> Result<Outcome> {
    let d = match a.variant {
        Variant::Full => paper_dataset(PaperVariant::Full),
        Variant::Small => paper_dataset(PaperVariant::Small),
        Variant::OrderConsistent => order_consistent(a.k, a.n, seed)?,
        Variant::Random => random_matrix(a.k, a.n, a.lo, a.hi, seed)?,
    };
    write_atomic(&a.output, d.to_csv_string().as_bytes())?;
    let body = ReportBody::Generate(GenerateReport {
        output: a.output.display().to_string(),
        n_algorithms: d.n_algorithms(),
        n_problems: d.n_problems(),
    });
    emit(&Report::new("generate", cfg, body), a.json.as_deref())?;
    Ok(Outcome::Clean)
}

fn rank(a: &RankArgs, cfg: serde_json::Value) -> Result<Outcome> {
    let method = parse_method(&a.method, a.alpha)?;
    let d = load_matrix(&a.input)?;
    let analysis = method.analyze(&d)?;
    let ranks = to_ranks(&d);
    let mut report = RankReport {
        method: method.id(),
        algorithm_ids: d.algorithm_ids().to_vec(),
        avg_ranks: ranks.avg_rank.clone(),
        friedman: None,
        critical_difference: None,
        bradley_terry: None,
        bradley_terry_error: None,
        comparison: None,
    };
    match (&method, &analysis) {
        (ComparisonMethod::FriedmanCd { .. }, critaudit::ranking::Analysis::AvgRank(x)) => {
            report.friedman = Some(FriedmanResult::clone(&x.friedman));
            report.critical_difference = Some(x.critical_difference.clone());
        }
        (ComparisonMethod::BradleyTerry { options }, _) => match bt_fit(&to_pairwise(&d), options) {
            Ok(fit) => report.bradley_terry = Some(fit),
            Err(e) => report.bradley_terry_error = Some(e.to_string()),
        },
        _ => {}
    }
    if let Some(p) = &a.pair {
        let (x, y) = parse_pair(p)?;
        let (ix, iy) = (d.algorithm_index(&x)?, d.algorithm_index(&y)?);
        report.comparison = Some(analysis.compare(ix, iy));
    }
    emit(&Report::new("rank", cfg, ReportBody::Rank(report)), a.json.as_deref())?;
    Ok(Outcome::Clean)
}

fn audit_iia(a: &AuditIiaArgs, seed: u64, cfg: serde_json::Value) -> Result<Outcome> {
    let method = parse_method(&a.method, a.alpha)?;
    let d = load_matrix(&a.input)?;
    let (x, y) = parse_pair(&a.pair)?;

    if let Some(curve_path) = &a.curve {
        let reference = match &a.reference {
            Some(p) => load_matrix(p)?,
            None => d.clone(),
        };
        let curve = stability_curve(&method, &d, &reference, &x, &y, &a.m_grid, a.trials, seed)?;
        write_atomic(curve_path, curve.to_csv().as_bytes())?;
        let body = ReportBody::StabilityCurve(curve);
        emit(&Report::new("audit-iia", cfg, body), a.json.as_deref())?;
        return Ok(Outcome::Clean);
    }

    let audit = if !a.problem_subsets.is_empty() {
        let subsets: Vec<Vec<String>> = a.problem_subsets.iter().map(|s| parse_list(s)).collect();
        simpson_check(&method, &d, &x, &y, &subsets)?
    } else {
        let strategy = if !a.subsets.is_empty() {
            SubsetStrategy::Explicit {
                subsets: a.subsets.iter().map(|s| parse_list(s)).collect(),
            }
        } else if a.exhaustive {
            SubsetStrategy::Exhaustive
        } else {
            SubsetStrategy::GreedyRemoval { budget: a.budget }
        };
        iia_check(&method, &d, &x, &y, &strategy)?
    };
    let found = audit.found();
    emit(&Report::new("audit-iia", cfg, ReportBody::IiaAudit(audit)), a.json.as_deref())?;
    Ok(if found { Outcome::Violation } else { Outcome::Clean })
}

fn audit_iso(a: &AuditIsoArgs, seed: u64, cfg: serde_json::Value) -> Result<Outcome> {
    if let Some(opt_id) = &a.optimizer {
        let opt = optimizer_by_id(opt_id)?;
        let obj = objective_by_id(a.objective.as_deref().unwrap_or_default())?;
        let results = transform_suite(obj.f_star)
            .iter()
            .map(|t| trace_invariance_check(&opt, &obj, t, seed, a.budget))
            .collect::<critaudit::Result<Vec<_>>>()?;
        let clean = results.iter().all(|r| r.identical);
        let body = ReportBody::TraceInvariance { results };
        emit(&Report::new("audit-iso", cfg, body), a.json.as_deref())?;
        return Ok(if clean { Outcome::Clean } else { Outcome::Violation });
    }

    let metric: MetricId = a.metric.as_deref().unwrap_or_default().parse()?;
    let trace_path = a.trace.as_deref().expect("clap requires --trace");
    let trace = SearchTrace::load_csv(trace_path)
        .with_context(|| format!("reading {}", trace_path.display()))?;
    let mut sample = match (&a.sample, &a.objective) {
        (Some(p), _) => {
            let s = SearchTrace::load_csv(p).with_context(|| format!("reading {}", p.display()))?;
            ObjectiveSample::new(s.points().to_vec(), s.values().to_vec())?
        }
        (None, Some(id)) => {
            let obj = objective_by_id(id)?;
            let mut s = sample_objective(&obj, a.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES), seed);
            s.include_trace(&trace);
            s
        }
        (None, None) => ObjectiveSample::new(Vec::new(), Vec::new())?,
    };
    if a.fstar.is_some() {
        sample.f_star = a.fstar;
    }
    let suite = transform_suite(sample.f_star);
    let case = MetricCase::new(trace, sample);
    let r = audit_metric(&metric, &case, &suite, a.tolerance)?;
    let clean = r.verdict == critaudit::Verdict::Isomorphic;
    emit(&Report::new("audit-iso", cfg, ReportBody::IsoAudit(r)), a.json.as_deref())?;
    Ok(if clean { Outcome::Clean } else { Outcome::Violation })
}

fn harness(a: &HarnessArgs, seed: u64, cfg: serde_json::Value) -> Result<Outcome> {
    let opt = optimizer_by_id(&a.optimizer)?;
    let obj = objective_by_id(&a.objective)?;
    let transform = match &a.transform {
        Some(t) => {
            let (lo, hi) = obj.value_bounds();
            let h = t.parse::<MonotoneTransform>()?.resolve(&[lo, hi]);
            h.check_domain(&[lo, hi])?;
            Some(h)
        }
        None => None,
    };
    let trace = run_transformed(&opt, &obj, transform.as_ref(), a.budget, seed)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    write_atomic(&a.output, &buf)?;
    let body = ReportBody::Harness(HarnessReport {
        optimizer: opt.id(),
        objective: obj.id.clone(),
        transform: transform.as_ref().map(|t| t.to_string()),
        budget: a.budget,
        seed,
        trace_hash: trace.point_hash(),
        best_value: trace.values().iter().copied().fold(f64::INFINITY, f64::min),
        output: a.output.display().to_string(),
    });
    emit(&Report::new("harness", cfg, body), a.json.as_deref())?;
    Ok(Outcome::Clean)
}

fn report(a: &ReportArgs) -> Result<Outcome> {
    let texts = a
        .artifacts
        .iter()
        .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let reports = load_reports(&texts)?;
    let md = render_markdown(&reports)?;
    match &a.markdown {
        Some(p) => write_atomic(p, md.as_bytes())?,
        None => print!("{md}"),
    }
    Ok(if reports.iter().any(|r| r.body.is_violation()) {
        Outcome::Violation
    } else {
        Outcome::Clean
    })
}
