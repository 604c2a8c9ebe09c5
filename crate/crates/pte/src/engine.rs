//! Runs rules over seed programs and checks expectations.

use minilang::checker::{self, Analysis};
use minilang::parser;
use minilang::printer;
use minilang::{DefectSet, Diagnostic, NodeId, Outcome, Pipeline, Program};
use rayon::prelude::*;
use serde::Serialize;

use crate::expectation::{check_expectation, Verdict};
use crate::rule::{Rule, RuleContext, Transformed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    /// Stable identifier, usually the path relative to the corpus root.
    pub id: String,
    pub source: String,
}

impl Seed {
    pub fn new(id: impl Into<String>, source: impl Into<String>) -> Self {
        Seed {
            id: id.into(),
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineConfig {
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    /// One case per matching site instead of one case rewriting all sites.
    pub per_site: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("seed {id} does not parse: {diagnostic}")]
    SeedParse { id: String, diagnostic: String },
    #[error("empty rule sequence")]
    EmptySequence,
    #[error("thread pool: {0}")]
    Pool(String),
}

/// One step of a composed case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepResult {
    pub rule: String,
    pub applied: bool,
    pub t1: Option<Outcome>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    pub seed: String,
    pub rules: Vec<String>,
    /// Site index in per-site mode.
    pub site: Option<usize>,
    pub applied: bool,
    pub t0: Outcome,
    pub t1: Option<Outcome>,
    /// Source of the final transformed program, when there is one.
    pub transformed: Option<String>,
    pub verdict: Verdict,
    /// Per-step results of a composed sequence; empty for single rules.
    pub steps: Vec<StepResult>,
}

impl CaseResult {
    fn sort_key(&self) -> (&str, &[String], Option<usize>) {
        (&self.seed, &self.rules, self.site)
    }
}

/// A parsed seed with its cached original outcome.
struct Prepared {
    id: String,
    program: Program,
    analysis: Analysis,
    t0: Outcome,
}

/// A program produced by a rule, or why there is none.
enum Applied {
    Inapplicable,
    Program {
        program: Program,
        source: String,
    },
    /// The compiler under test failed during the transformation.
    Rejected {
        outcome: Outcome,
        source: Option<String>,
    },
    RuleBug(String),
}

pub struct Engine<'p> {
    pipeline: &'p Pipeline,
    config: EngineConfig,
}

fn analyze(program: &Program) -> Analysis {
    checker::analyze(program, &DefectSet::none()).0
}

fn render(d: &Diagnostic, source: &str) -> String {
    d.render(source)
}

impl<'p> Engine<'p> {
    pub fn new(pipeline: &'p Pipeline, config: EngineConfig) -> Self {
        Engine { pipeline, config }
    }

    pub fn pipeline(&self) -> &Pipeline {
        self.pipeline
    }

    fn pool(&self) -> Result<rayon::ThreadPool, EngineError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))
    }

    fn prepare(&self, seeds: &[Seed]) -> Result<Vec<Prepared>, EngineError> {
        seeds
            .par_iter()
            .map(|s| {
                let program = parser::parse_source(&s.source).map_err(|d| EngineError::SeedParse {
                    id: s.id.clone(),
                    diagnostic: render(&d, &s.source),
                })?;
                let analysis = analyze(&program);
                let t0 = self.pipeline.run(&program);
                Ok(Prepared {
                    id: s.id.clone(),
                    program,
                    analysis,
                    t0,
                })
            })
            .collect()
    }

    fn context<'a>(&'a self, program: &'a Program, analysis: &'a Analysis) -> RuleContext<'a> {
        RuleContext {
            program,
            analysis,
            pipeline: self.pipeline,
        }
    }

    /// Apply `rule` at `site` (an index into its sites) or at all sites.
    fn apply(&self, rule: &dyn Rule, cx: &RuleContext, site: Option<usize>) -> Applied {
        let sites = rule.sites(cx);
        if sites.is_empty() {
            return Applied::Inapplicable;
        }
        let chosen: Vec<NodeId> = match site {
            Some(i) => vec![sites[i]],
            None => sites,
        };
        match rule.transform(cx, &chosen) {
            Transformed::Ast(root) => {
                let source = printer::to_source(&root);
                match parser::parse_source(&source) {
                    Ok(program) => Applied::Program { program, source },
                    Err(d) => Applied::RuleBug(format!(
                        "{} produced a program that does not parse: {}",
                        rule.id(),
                        render(&d, &source)
                    )),
                }
            }
            Transformed::Source(source) => match parser::parse_source(&source) {
                Ok(program) => Applied::Program { program, source },
                Err(d) => Applied::Rejected {
                    outcome: Outcome::compile_error(d),
                    source: Some(source),
                },
            },
            Transformed::Rejected(outcome) => Applied::Rejected { outcome, source: None },
        }
    }

    /// Transform one program with one rule. `None` when the precondition
    /// fails. Exposed for tests and tooling.
    pub fn apply_rule(&self, rule: &dyn Rule, program: &Program) -> Option<Result<String, String>> {
        let analysis = analyze(program);
        let cx = self.context(program, &analysis);
        match self.apply(rule, &cx, None) {
            Applied::Inapplicable => None,
            Applied::Program { source, .. } => Some(Ok(source)),
            Applied::Rejected { source, outcome } => Some(Ok(source.unwrap_or_else(|| outcome.summary()))),
            Applied::RuleBug(m) => Some(Err(m)),
        }
    }

    fn case(&self, seed: &Prepared, rule: &dyn Rule, site: Option<usize>) -> CaseResult {
        let cx = self.context(&seed.program, &seed.analysis);
        let mut result = CaseResult {
            seed: seed.id.clone(),
            rules: vec![rule.id().to_string()],
            site,
            applied: false,
            t0: seed.t0.clone(),
            t1: None,
            transformed: None,
            verdict: Verdict::Inapplicable,
            steps: Vec::new(),
        };
        let (t1, source) = match self.apply(rule, &cx, site) {
            Applied::Inapplicable => return result,
            Applied::RuleBug(message) => {
                result.applied = true;
                result.verdict = Verdict::RuleError { message };
                return result;
            }
            Applied::Program { program, source } => (self.pipeline.run(&program), Some(source)),
            Applied::Rejected { outcome, source } => (outcome, source),
        };
        result.applied = true;
        result.verdict = check_expectation(&rule.expectations(), &seed.t0, &t1);
        result.t1 = Some(t1);
        result.transformed = source;
        result
    }

    /// Every seed against every rule. Results are sorted by seed, rule and
    /// site, independent of scheduling.
    pub fn run(&self, seeds: &[Seed], rules: &[&dyn Rule]) -> Result<Vec<CaseResult>, EngineError> {
        self.pool()?.install(|| {
            let prepared = self.prepare(seeds)?;
            let jobs: Vec<(&Prepared, &dyn Rule, Option<usize>)> = prepared
                .iter()
                .flat_map(|p| rules.iter().map(move |r| (p, *r)))
                .flat_map(|(p, r)| {
                    let sites = if self.config.per_site {
                        r.sites(&self.context(&p.program, &p.analysis)).len()
                    } else {
                        0
                    };
                    if sites == 0 {
                        vec![(p, r, None)]
                    } else {
                        (0..sites).map(|i| (p, r, Some(i))).collect()
                    }
                })
                .collect();
            let mut results: Vec<CaseResult> = jobs.par_iter().map(|(p, r, s)| self.case(p, *r, *s)).collect();
            results.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            Ok(results)
        })
    }

    fn composed_case(&self, seed: &Prepared, sequence: &[&dyn Rule]) -> CaseResult {
        let mut steps = Vec::new();
        let mut current: Option<(Program, Analysis)> = Some((seed.program.clone(), seed.analysis.clone()));
        let mut t_prev = seed.t0.clone();
        let mut source = None;
        for rule in sequence {
            let Some((program, analysis)) = &current else {
                steps.push(StepResult {
                    rule: rule.id().to_string(),
                    applied: false,
                    t1: None,
                    verdict: Verdict::Inapplicable,
                });
                continue;
            };
            let cx = self.context(program, analysis);
            let (t1, next) = match self.apply(*rule, &cx, None) {
                Applied::Inapplicable => {
                    steps.push(StepResult {
                        rule: rule.id().to_string(),
                        applied: false,
                        t1: None,
                        verdict: Verdict::Inapplicable,
                    });
                    continue;
                }
                Applied::RuleBug(message) => {
                    steps.push(StepResult {
                        rule: rule.id().to_string(),
                        applied: true,
                        t1: None,
                        verdict: Verdict::RuleError { message },
                    });
                    current = None;
                    continue;
                }
                Applied::Program { program, source: s } => {
                    let t1 = self.pipeline.run(&program);
                    source = Some(s);
                    let analysis = analyze(&program);
                    (t1, Some((program, analysis)))
                }
                Applied::Rejected { outcome, source: s } => {
                    source = s;
                    (outcome, None)
                }
            };
            let verdict = check_expectation(&rule.expectations(), &t_prev, &t1);
            steps.push(StepResult {
                rule: rule.id().to_string(),
                applied: true,
                t1: Some(t1.clone()),
                verdict,
            });
            t_prev = t1;
            current = next;
        }
        let applied = steps.iter().any(|s| s.applied);
        let verdict = if let Some(e) = steps.iter().find(|s| s.verdict.is_rule_error()) {
            e.verdict.clone()
        } else if steps.iter().any(|s| s.verdict.is_fail()) {
            Verdict::Fail
        } else {
            steps
                .iter()
                .rev()
                .find(|s| s.verdict.is_pass())
                .map_or(Verdict::Inapplicable, |s| s.verdict.clone())
        };
        let t1 = steps.iter().rev().find_map(|s| s.t1.clone());
        CaseResult {
            seed: seed.id.clone(),
            rules: sequence.iter().map(|r| r.id().to_string()).collect(),
            site: None,
            applied,
            t0: seed.t0.clone(),
            t1,
            transformed: source,
            verdict,
            steps,
        }
    }

    /// Apply `sequence` rule by rule, checking each step's expectations
    /// against the outcome of its input. A step whose precondition fails is
    /// skipped and recorded.
    pub fn run_composed(&self, seeds: &[Seed], sequence: &[&dyn Rule]) -> Result<Vec<CaseResult>, EngineError> {
        if sequence.is_empty() {
            return Err(EngineError::EmptySequence);
        }
        self.pool()?.install(|| {
            let prepared = self.prepare(seeds)?;
            let mut results: Vec<CaseResult> = prepared.par_iter().map(|p| self.composed_case(p, sequence)).collect();
            results.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            Ok(results)
        })
    }
}
