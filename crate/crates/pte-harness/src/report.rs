//! Campaign reports: a canonical JSON document and a text table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use minilang::defects::{self, Category, DefectSet};
use minilang::Outcome;
use pte::{CaseResult, Verdict};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: ConfigEcho,
    pub summary: Summary,
    pub cases: Vec<CaseRecord>,
    /// Not serialized: JSON reports must be byte-identical across runs.
    #[serde(skip)]
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub source: String,
    pub seeds: usize,
    pub rules: Vec<String>,
    pub compose: bool,
    pub defects: String,
    pub per_site: bool,
    pub naive_lsp: bool,
    pub timeout_ms: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counts {
    pub cases: usize,
    pub applied: usize,
    pub pass: usize,
    pub fail: usize,
    pub inapplicable: usize,
    pub rule_error: usize,
}

impl Counts {
    fn add(&mut self, c: &CaseResult) {
        self.cases += 1;
        self.applied += usize::from(c.applied);
        match c.verdict {
            Verdict::Pass { .. } => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Inapplicable => self.inapplicable += 1,
            Verdict::RuleError { .. } => self.rule_error += 1,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub total: Counts,
    /// Keyed by rule id, or by `+`-joined ids for a composition.
    pub per_rule: BTreeMap<String, Counts>,
    /// Failing cases attributed to each bug category.
    pub fail_categories: BTreeMap<Category, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub rule: String,
    pub applied: bool,
    pub t1: Option<String>,
    pub verdict: String,
    pub matched: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Attribution {
    pub defect: String,
    pub category: Category,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseRecord {
    pub seed: String,
    pub rules: String,
    pub site: Option<usize>,
    pub applied: bool,
    pub t0: String,
    pub t1: Option<String>,
    pub verdict: String,
    pub matched: Option<String>,
    pub message: Option<String>,
    pub stdout_t0: Option<String>,
    pub stdout_t1: Option<String>,
    /// Transformed program, kept for failing and erroring cases.
    pub transformed: Option<String>,
    pub attributed_to: Vec<Attribution>,
    pub steps: Vec<StepRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct Timing {
    pub total: Duration,
    pub workers: usize,
}

fn matched(v: &Verdict) -> Option<String> {
    match v {
        Verdict::Pass { matched } => Some(matched.to_string()),
        _ => None,
    }
}

fn stdout(o: &Outcome) -> Option<String> {
    let s = o.stdout();
    (!s.is_empty()).then(|| s.to_string())
}

/// Active defects whose designated detector is exactly this rule sequence.
pub fn attribute(rules: &str, active: &DefectSet) -> Vec<Attribution> {
    defects::catalog()
        .into_iter()
        .filter(|d| active.has(d.id) && d.designated_detector.contains(&rules))
        .map(|d| Attribution {
            defect: d.id.to_string(),
            category: d.category,
        })
        .collect()
}

impl Report {
    pub fn build(config: ConfigEcho, active: &DefectSet, results: &[CaseResult], timing: Timing) -> Report {
        let mut summary = Summary::default();
        let mut cases = Vec::with_capacity(results.len());
        for c in results {
            let rules = c.rules.join("+");
            summary.total.add(c);
            summary.per_rule.entry(rules.clone()).or_default().add(c);
            let failing = c.verdict.is_fail() || c.verdict.is_rule_error();
            let attributed_to = if c.verdict.is_fail() {
                attribute(&rules, active)
            } else {
                Vec::new()
            };
            for a in &attributed_to {
                *summary.fail_categories.entry(a.category).or_default() += 1;
            }
            cases.push(CaseRecord {
                seed: c.seed.clone(),
                rules,
                site: c.site,
                applied: c.applied,
                t0: c.t0.summary(),
                t1: c.t1.as_ref().map(Outcome::summary),
                verdict: c.verdict.label().to_string(),
                matched: matched(&c.verdict),
                message: match &c.verdict {
                    Verdict::RuleError { message } => Some(message.clone()),
                    _ => None,
                },
                stdout_t0: if failing { stdout(&c.t0) } else { None },
                stdout_t1: if failing { c.t1.as_ref().and_then(stdout) } else { None },
                transformed: if failing { c.transformed.clone() } else { None },
                attributed_to,
                steps: if c.steps.len() > 1 {
                    c.steps
                        .iter()
                        .map(|s| StepRecord {
                            rule: s.rule.clone(),
                            applied: s.applied,
                            t1: s.t1.as_ref().map(Outcome::summary),
                            verdict: s.verdict.label().to_string(),
                            matched: matched(&s.verdict),
                        })
                        .collect()
                } else {
                    Vec::new()
                },
            });
        }
        Report {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo {
                name: "pte".to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            config,
            summary,
            cases,
            timing,
        }
    }

    /// Zero failing cases and zero rule errors.
    pub fn is_clean(&self) -> bool {
        self.summary.total.fail == 0 && self.summary.total.rule_error == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "pte {}  source={} seeds={} defects={} compose={}",
            self.tool.version, c.source, c.seeds, c.defects, c.compose
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<28} {:>6} {:>8} {:>6} {:>6} {:>8} {:>6}",
            "rule", "cases", "applied", "pass", "fail", "inappl", "error"
        );
        let row = |out: &mut String, name: &str, k: &Counts| {
            let _ = writeln!(
                out,
                "{:<28} {:>6} {:>8} {:>6} {:>6} {:>8} {:>6}",
                name, k.cases, k.applied, k.pass, k.fail, k.inapplicable, k.rule_error
            );
        };
        for (rule, k) in &self.summary.per_rule {
            row(&mut out, rule, k);
        }
        row(&mut out, "total", &self.summary.total);

        let bad: Vec<_> = self
            .cases
            .iter()
            .filter(|c| c.verdict == "fail" || c.verdict == "rule_error")
            .collect();
        if !bad.is_empty() {
            let _ = writeln!(out, "\nfailures:");
            for case in bad {
                let site = case.site.map(|s| format!("#{s}")).unwrap_or_default();
                let t1 = case.t1.as_deref().unwrap_or("-");
                let _ = write!(
                    out,
                    "  {}{} {} {}: t0={} t1={}",
                    case.seed, site, case.rules, case.verdict, case.t0, t1
                );
                if !case.attributed_to.is_empty() {
                    let ids: Vec<_> = case.attributed_to.iter().map(|a| a.defect.as_str()).collect();
                    let _ = write!(out, " [{}]", ids.join(","));
                }
                if let Some(m) = &case.message {
                    let _ = write!(out, " ({m})");
                }
                let _ = writeln!(out);
            }
        }
        if !self.summary.fail_categories.is_empty() {
            let _ = writeln!(out, "\ncategories:");
            for (cat, n) in &self.summary.fail_categories {
                let _ = writeln!(out, "  {:<30} {n}", cat.as_str());
            }
        }
        let _ = writeln!(
            out,
            "\nwall time {:.3}s on {} worker(s)",
            self.timing.total.as_secs_f64(),
            self.timing.workers
        );
        out
    }
}
