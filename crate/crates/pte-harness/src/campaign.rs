//! One campaign: a seed source, a rule selection and a compiler configuration.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use minilang::defects::DefectSet;
use minilang::vm::Limits;
use minilang::Pipeline;
use pte::rules::UnknownRule;
use pte::{rules, Engine, EngineConfig, EngineError, Rule, RuleOptions, Seed};

use crate::corpus::{load_corpus, CorpusError};
use crate::generator::{generate_seeds, GenerationError};
use crate::report::{ConfigEcho, Report, Timing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSource {
    Corpus(PathBuf),
    Generated { count: usize, seed: u64 },
}

impl SeedSource {
    pub fn label(&self) -> String {
        match self {
            SeedSource::Corpus(p) => p.display().to_string(),
            SeedSource::Generated { count, seed } => format!("generated(count={count}, seed={seed})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub source: SeedSource,
    /// `all` or a comma-separated rule list, each applied on its own.
    pub rules: String,
    /// A rule sequence applied as one composition; overrides `rules`.
    pub compose: Option<String>,
    pub defects: DefectSet,
    pub per_site: bool,
    pub naive_lsp: bool,
    /// 0 picks the number of available cores.
    pub workers: usize,
    pub timeout_ms: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            source: SeedSource::Corpus(PathBuf::from("corpus")),
            rules: "all".to_string(),
            compose: None,
            defects: DefectSet::none(),
            per_site: false,
            naive_lsp: false,
            workers: 0,
            timeout_ms: Limits::default().timeout.as_millis() as u64,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rules(#[from] UnknownRule),
    #[error("no rules selected")]
    NoRules,
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub struct Campaign {
    pub report: Report,
    pub warnings: Vec<String>,
}

pub fn load_seeds(source: &SeedSource) -> Result<(Vec<Seed>, Vec<String>), CampaignError> {
    match source {
        SeedSource::Corpus(dir) => {
            let corpus = load_corpus(dir)?;
            Ok((corpus.seeds, corpus.warnings))
        }
        SeedSource::Generated { count, seed } => {
            let seeds = generate_seeds(*count, *seed)?
                .into_iter()
                .enumerate()
                .map(|(i, s)| Seed::new(format!("gen-{i:05}.mini"), s))
                .collect();
            Ok((seeds, Vec::new()))
        }
    }
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign, CampaignError> {
    let (seeds, warnings) = load_seeds(&cfg.source)?;
    let report = run_on_seeds(cfg, &seeds)?;
    Ok(Campaign { report, warnings })
}

pub fn run_on_seeds(cfg: &CampaignConfig, seeds: &[Seed]) -> Result<Report, CampaignError> {
    let opts = RuleOptions {
        naive_lsp: cfg.naive_lsp,
    };
    let selected = match &cfg.compose {
        Some(seq) => rules::resolve(&seq.replace('+', ","), opts)?,
        None => rules::resolve(&cfg.rules, opts)?,
    };
    if selected.is_empty() {
        return Err(CampaignError::NoRules);
    }
    let refs: Vec<&dyn Rule> = selected.iter().map(|r| r.as_ref()).collect();
    let limits = Limits {
        timeout: Duration::from_millis(cfg.timeout_ms),
        ..Limits::default()
    };
    let pipeline = Pipeline::new(cfg.defects.clone(), limits);
    let engine = Engine::new(
        &pipeline,
        EngineConfig {
            workers: cfg.workers,
            per_site: cfg.per_site,
        },
    );

    let start = Instant::now();
    let results = if cfg.compose.is_some() {
        engine.run_composed(seeds, &refs)?
    } else {
        engine.run(seeds, &refs)?
    };
    let timing = Timing {
        total: start.elapsed(),
        workers: effective_workers(cfg.workers),
    };

    let echo = ConfigEcho {
        source: cfg.source.label(),
        seeds: seeds.len(),
        rules: refs.iter().map(|r| r.id().to_string()).collect(),
        compose: cfg.compose.is_some(),
        defects: cfg.defects.to_string(),
        per_site: cfg.per_site,
        naive_lsp: cfg.naive_lsp,
        timeout_ms: cfg.timeout_ms,
    };
    Ok(Report::build(echo, &cfg.defects, &results, timing))
}

fn effective_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}
