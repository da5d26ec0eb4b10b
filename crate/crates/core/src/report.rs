//! Schema-versioned JSON reports and their markdown rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iia::{IIAAudit, Projection, StabilityCurve};
use crate::iso_audit::{InvarianceResult, IsoAuditReport, Verdict};
use crate::ranking::{BradleyTerryFit, ComparisonOutcome, CriticalDifference, Evidence, FriedmanResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "critaudit";

/// Rankings of every algorithm under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub method: String,
    pub algorithm_ids: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub friedman: Option<FriedmanResult>,
    pub critical_difference: Option<CriticalDifference>,
    pub bradley_terry: Option<BradleyTerryFit>,
    /// Why no global fit is available, when it is not.
    pub bradley_terry_error: Option<String>,
    pub comparison: Option<ComparisonOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub output: String,
    pub n_algorithms: usize,
    pub n_problems: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessReport {
    pub optimizer: String,
    pub objective: String,
    pub transform: Option<String>,
    pub budget: usize,
    pub seed: u64,
    pub trace_hash: String,
    pub best_value: f64,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    Generate(GenerateReport),
    Rank(RankReport),
    IiaAudit(IIAAudit),
    StabilityCurve(StabilityCurve),
    IsoAudit(IsoAuditReport),
    TraceInvariance { results: Vec<InvarianceResult> },
    Harness(HarnessReport),
}

impl ReportBody {
    /// Whether the body records a paradox or isomorphism failure.
    pub fn is_violation(&self) -> bool {
        match self {
            ReportBody::IiaAudit(a) => a.found(),
            ReportBody::IsoAudit(r) => r.verdict != Verdict::Isomorphic,
            ReportBody::TraceInvariance { results } => results.iter().any(|r| !r.identical),
            _ => false,
        }
    }

    fn is_audit(&self) -> bool {
        matches!(
            self,
            ReportBody::IiaAudit(_) | ReportBody::IsoAudit(_) | ReportBody::TraceInvariance { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub command: String,
    /// Effective configuration, defaults included.
    pub config: serde_json::Value,
    pub body: ReportBody,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value, body: ReportBody) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.to_string(),
            command: command.to_string(),
            config,
            body,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let version = raw
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Schema("missing schema_version".into()))?;
        if version != SCHEMA_VERSION as u64 {
            return Err(Error::Schema(format!(
                "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
            )));
        }
        Ok(serde_json::from_value(raw)?)
    }
}

/// Parses several artifacts, refusing any mix of schema versions.
pub fn load_reports<S: AsRef<str>>(texts: &[S]) -> Result<Vec<Report>> {
    let mut versions = Vec::new();
    for t in texts {
        let raw: serde_json::Value = serde_json::from_str(t.as_ref())?;
        let v = raw.get("schema_version").and_then(|v| v.as_u64());
        if !versions.contains(&v) {
            versions.push(v);
        }
    }
    if versions.len() > 1 {
        let shown: Vec<String> = versions
            .iter()
            .map(|v| v.map_or("missing".to_string(), |v| v.to_string()))
            .collect();
        return Err(Error::Schema(format!(
            "artifacts mix schema versions {}",
            shown.join(" and ")
        )));
    }
    texts.iter().map(|t| Report::from_json(t.as_ref())).collect()
}

fn fmt_p(p: f64, log10_p: f64) -> String {
    if p == 0.0 {
        format!("0.0 (log10 {log10_p:.1})")
    } else {
        format!("{p:.3e}")
    }
}

fn outcome_row(label: &str, o: &ComparisonOutcome, out: &mut String) {
    match &o.evidence {
        Evidence::AvgRank {
            avg_rank_a,
            avg_rank_b,
            critical_difference,
            friedman,
            ..
        } => {
            let _ = writeln!(
                out,
                "| {label} | {avg_rank_a:.4} | {avg_rank_b:.4} | {} | {:.3} | {} |",
                fmt_p(friedman.p_value, friedman.log10_p),
                critical_difference.value,
                o.describe()
            );
        }
        Evidence::BradleyTerry {
            theta_a,
            theta_b,
            p_a_over_b,
            p_b_over_a,
            ..
        } => {
            let _ = writeln!(
                out,
                "| {label} | {theta_a:.4e} | {theta_b:.4e} | {p_a_over_b:.4} | {p_b_over_a:.4} | {} |",
                o.describe()
            );
        }
        Evidence::RawMean { mean_a, mean_b } => {
            let _ = writeln!(out, "| {label} | {mean_a:.4} | {mean_b:.4} | {} |", o.describe());
        }
    }
}

fn outcome_header(o: &ComparisonOutcome, out: &mut String) {
    let (a, b) = (&o.a, &o.b);
    match &o.evidence {
        Evidence::AvgRank { .. } => {
            let _ = writeln!(
                out,
                "| Data | average rank of {a} | average rank of {b} | p-value | CD | result |\n|---|---|---|---|---|---|"
            );
        }
        Evidence::BradleyTerry { .. } => {
            let _ = writeln!(
                out,
                "| Data | θ_{a} | θ_{b} | P({a}≻{b}) | P({b}≻{a}) | result |\n|---|---|---|---|---|---|"
            );
        }
        Evidence::RawMean { .. } => {
            let _ = writeln!(out, "| Data | mean of {a} | mean of {b} | result |\n|---|---|---|---|");
        }
    }
}

fn config_line(config: &serde_json::Value) -> String {
    match config.as_object() {
        Some(map) if !map.is_empty() => map
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", "),
        _ => "(none)".to_string(),
    }
}

/// Human-readable summary of a set of reports.
pub fn render_markdown(reports: &[Report]) -> Result<String> {
    if let Some(r) = reports.iter().find(|r| r.schema_version != SCHEMA_VERSION) {
        return Err(Error::Schema(format!(
            "schema_version {} is not supported",
            r.schema_version
        )));
    }
    let mut out = String::from("# critaudit report\n\n");
    let audits: Vec<&Report> = reports.iter().filter(|r| r.body.is_audit()).collect();
    let found = audits.iter().filter(|r| r.body.is_violation()).count();
    if found == 0 {
        out.push_str("**no violation found**");
        if !audits.is_empty() {
            let _ = write!(out, " across {} audit(s)", audits.len());
        }
        out.push_str("\n\n");
    } else {
        let _ = writeln!(out, "**{found} of {} audit(s) found a violation**\n", audits.len());
    }

    for r in reports {
        let _ = writeln!(out, "## {}\n", r.command);
        let _ = writeln!(out, "config: {}\n", config_line(&r.config));
        match &r.body {
            ReportBody::Generate(g) => {
                let _ = writeln!(
                    out,
                    "wrote {} ({} algorithms × {} problems)\n",
                    g.output, g.n_algorithms, g.n_problems
                );
            }
            ReportBody::Rank(rank) => {
                let _ = writeln!(out, "method: {}\n", rank.method);
                if let Some(f) = &rank.friedman {
                    let _ = writeln!(
                        out,
                        "Friedman χ² = {:.4}, df = {}, p = {}\n",
                        f.chi_square,
                        f.degrees_of_freedom,
                        fmt_p(f.p_value, f.log10_p)
                    );
                }
                if let Some(cd) = &rank.critical_difference {
                    let _ = writeln!(
                        out,
                        "CD = {:.4} (alpha {}, convention {})\n",
                        cd.value, cd.alpha, cd.convention
                    );
                }
                if let Some(e) = &rank.bradley_terry_error {
                    let _ = writeln!(out, "no global Bradley-Terry fit: {e}\n");
                }
                let fit = rank.bradley_terry.as_ref();
                out.push_str(if fit.is_some() {
                    "| algorithm | average rank | θ |\n|---|---|---|\n"
                } else {
                    "| algorithm | average rank |\n|---|---|\n"
                });
                for (id, r) in rank.algorithm_ids.iter().zip(&rank.avg_ranks) {
                    match fit {
                        Some(f) => {
                            let theta = f
                                .theta_of(id)
                                .map_or_else(|_| "dropped".to_string(), |t| format!("{t:.4e}"));
                            let _ = writeln!(out, "| {id} | {r:.4} | {theta} |");
                        }
                        None => {
                            let _ = writeln!(out, "| {id} | {r:.4} |");
                        }
                    }
                }
                out.push('\n');
                if let Some(c) = &rank.comparison {
                    outcome_header(c, &mut out);
                    outcome_row("D", c, &mut out);
                    out.push('\n');
                }
            }
            ReportBody::IiaAudit(a) => {
                let what = match a.projection {
                    Projection::Algorithms => "algorithm subsets",
                    Projection::Problems => "problem subsets",
                };
                let _ = writeln!(
                    out,
                    "method: {}; pair: {}, {}; searched {}; {} evaluation(s)\n",
                    a.method, a.pair.0, a.pair.1, what, a.evaluations
                );
                outcome_header(&a.baseline, &mut out);
                outcome_row("D", &a.baseline, &mut out);
                if let Some(v) = &a.violation {
                    let label = format!("D[{{{}}}]", v.witness_subset.join(","));
                    let label = if label.len() > 60 {
                        format!("D[{} kept, {} removed]", v.witness_subset.len(), v.removed.len())
                    } else {
                        label
                    };
                    outcome_row(&label, &v.evidence_after, &mut out);
                }
                let _ = writeln!(out, "\n{}\n", a.summary());
                if !a.warnings.is_empty() {
                    let _ = writeln!(
                        out,
                        "{} projection(s) moved to or from indifference (warnings, not violations)\n",
                        a.warnings.len()
                    );
                }
            }
            ReportBody::StabilityCurve(c) => {
                let _ = writeln!(
                    out,
                    "method: {}; pair: {}, {}; trials: {}; seed: {}; Spearman(m, frequency) = {:.4}\n",
                    c.method, c.pair.0, c.pair.1, c.trials, c.seed, c.spearman
                );
                out.push_str("| m | reversal frequency |\n|---|---|\n");
                for (m, f) in c.m_values.iter().zip(&c.reversal_frequency) {
                    let _ = writeln!(out, "| {m} | {f:.4} |");
                }
                out.push('\n');
            }
            ReportBody::IsoAudit(iso) => {
                let _ = writeln!(
                    out,
                    "metric: {}; verdict: {:?}; tolerance: {:e}\n\n{}\n",
                    iso.metric, iso.verdict, iso.tolerance, iso.summary
                );
                out.push_str("| transform | linear | max delta |\n|---|---|---|\n");
                for d in &iso.deltas {
                    let _ = writeln!(out, "| {} | {} | {:.3e} |", d.transform, d.linear, d.max_delta);
                }
                out.push('\n');
                for n in &iso.notes {
                    let _ = writeln!(out, "- {n}");
                }
                if !iso.notes.is_empty() {
                    out.push('\n');
                }
            }
            ReportBody::TraceInvariance { results } => {
                out.push_str("| optimizer | objective | transform | seed | identical |\n|---|---|---|---|---|\n");
                for t in results {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} |",
                        t.optimizer, t.objective, t.transform, t.seed, t.identical
                    );
                }
                out.push('\n');
            }
            ReportBody::Harness(h) => {
                let _ = writeln!(
                    out,
                    "{} on {} ({} evaluations, seed {}, transform {}): best {:e}, trace {}\n",
                    h.optimizer,
                    h.objective,
                    h.budget,
                    h.seed,
                    h.transform.as_deref().unwrap_or("none"),
                    h.best_value,
                    h.trace_hash
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn dummy() -> Report {
        Report::new(
            "generate",
            json!({"variant": "full", "seed": 1}),
            ReportBody::Generate(GenerateReport {
                output: "d.csv".into(),
                n_algorithms: 100,
                n_problems: 500,
            }),
        )
    }

    #[test]
    fn empty_set_reports_nothing_found() {
        let md = render_markdown(&[]).unwrap();
        assert!(md.contains("no violation found"));
    }

    #[test]
    fn json_round_trip() {
        let r = dummy();
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn mixed_versions_rejected() {
        let ok = dummy().to_json().unwrap();
        let old = ok.replace("\"schema_version\": 1", "\"schema_version\": 0");
        assert!(matches!(load_reports(&[ok.clone(), old.clone()]), Err(Error::Schema(_))));
        assert!(matches!(load_reports(&[old]), Err(Error::Schema(_))));
        assert_eq!(load_reports(&[ok]).unwrap().len(), 1);
    }

    #[test]
    fn config_is_rendered() {
        let md = render_markdown(&[dummy()]).unwrap();
        assert!(md.contains("seed=1"));
        assert!(md.contains("variant=\"full\""));
    }
}
