//! Loading and validating seed corpora.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use minilang::defects::{self, DefectId, DefectSet};
use minilang::parser::parse_source;
use minilang::{checker, Outcome, Pipeline};
use pte::{rules, Engine, EngineConfig, Rule, RuleOptions, Seed};
use walkdir::WalkDir;

pub const MANIFEST_FILE: &str = "corpus-manifest.txt";

#[derive(Debug)]
pub struct Corpus {
    pub root: PathBuf,
    pub seeds: Vec<Seed>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedProblem {
    pub id: String,
    pub problem: String,
}

impl fmt::Display for SeedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, self.problem)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus directory {0} does not exist")]
    Missing(PathBuf),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid seeds:\n{}", list(.0))]
    Invalid(Vec<SeedProblem>),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

fn list(problems: &[SeedProblem]) -> String {
    problems.iter().map(|p| format!("  {p}")).collect::<Vec<_>>().join("\n")
}

/// Every `.mini` file under `dir`, in lexicographic order of its path
/// relative to `dir`. Seeds must parse, check clean and run to completion
/// under the fixed compiler.
pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusError> {
    if !dir.is_dir() {
        return Err(CorpusError::Missing(dir.to_path_buf()));
    }
    let mut seeds = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "mini") {
            continue;
        }
        let source = std::fs::read_to_string(path).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        seeds.push(Seed::new(seed_id(dir, path), source));
    }
    seeds.sort_by(|a, b| a.id.cmp(&b.id));

    let problems: Vec<SeedProblem> = seeds
        .iter()
        .filter_map(|s| {
            validate_seed(&s.source).err().map(|problem| SeedProblem {
                id: s.id.clone(),
                problem,
            })
        })
        .collect();
    if !problems.is_empty() {
        return Err(CorpusError::Invalid(problems));
    }
    let mut warnings = Vec::new();
    if seeds.is_empty() {
        warnings.push(format!("corpus {} contains no .mini files", dir.display()));
    }
    Ok(Corpus {
        root: dir.to_path_buf(),
        seeds,
        warnings,
    })
}

fn seed_id(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Ok when the program parses, checks clean and runs to normal termination.
pub fn validate_seed(source: &str) -> Result<(), String> {
    let program = parse_source(source).map_err(|d| format!("parse error: {}", d.render(source)))?;
    if let Err(diags) = checker::check(&program) {
        let codes: Vec<_> = diags.iter().map(|d| d.render(source)).collect();
        return Err(format!("check failed: {}", codes.join("; ")));
    }
    match Pipeline::clean().run(&program) {
        Outcome::Ran { .. } => Ok(()),
        other => Err(format!("does not run cleanly: {other}")),
    }
}

/// One manifest line: a seed, the rules whose precondition it satisfies and
/// the defects it exposes through their designated detectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub seed: String,
    pub rules: BTreeSet<String>,
    pub defects: BTreeSet<DefectId>,
}

impl fmt::Display for ManifestEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules = dash(self.rules.iter().cloned().collect());
        let defects = dash(self.defects.iter().map(|d| d.to_string()).collect());
        write!(f, "{} | {} | {}", self.seed, rules, defects)
    }
}

fn dash(items: Vec<String>) -> String {
    if items.is_empty() {
        "-".to_string()
    } else {
        items.join(",")
    }
}

/// Parse `seed | rules | defects` lines. `#` starts a comment and `-`
/// stands for an empty list.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CorpusError::Manifest { line: i + 1, message };
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        let [seed, rule_col, defect_col] = cols[..] else {
            return Err(err(format!("expected 3 columns, found {}", cols.len())));
        };
        let rules = split(rule_col)
            .map(|r| {
                pte::RULE_IDS
                    .iter()
                    .find(|id| id.eq_ignore_ascii_case(r))
                    .map(|id| id.to_string())
                    .ok_or_else(|| err(format!("unknown rule '{r}'")))
            })
            .collect::<Result<_, _>>()?;
        let defects = split(defect_col)
            .map(|d| d.parse::<DefectId>().map_err(|e| err(e.to_string())))
            .collect::<Result<_, _>>()?;
        entries.push(ManifestEntry {
            seed: seed.to_string(),
            rules,
            defects,
        });
    }
    Ok(entries)
}

fn split(col: &str) -> impl Iterator<Item = &str> {
    col.split(',').map(str::trim).filter(|s| !s.is_empty() && *s != "-")
}

/// Compute the manifest entry of every seed: applicable rules, and defects
/// whose designated detector reports a Fail on the seed when only that
/// defect is active.
pub fn compute_manifest(seeds: &[Seed], workers: usize) -> Result<Vec<ManifestEntry>, pte::EngineError> {
    let opts = RuleOptions::default();
    let all = rules::registry(opts);
    let refs: Vec<&dyn Rule> = all.iter().map(|r| r.as_ref()).collect();
    let config = EngineConfig {
        workers,
        per_site: false,
    };

    let clean = Pipeline::clean();
    let mut entries: Vec<ManifestEntry> = seeds
        .iter()
        .map(|s| ManifestEntry {
            seed: s.id.clone(),
            rules: BTreeSet::new(),
            defects: BTreeSet::new(),
        })
        .collect();
    let index = |id: &str| seeds.iter().position(|s| s.id == id).expect("seed in list");

    for case in Engine::new(&clean, config).run(seeds, &refs)? {
        if case.applied {
            entries[index(&case.seed)].rules.insert(case.rules[0].clone());
        }
    }
    for d in defects::catalog() {
        let pipeline = Pipeline::with_defects(DefectSet::only(d.id));
        let engine = Engine::new(&pipeline, config);
        for detector in d.designated_detector {
            let sequence = rules::resolve_sequence(detector, opts).expect("catalog names known rules");
            let refs: Vec<&dyn Rule> = sequence.iter().map(|r| r.as_ref()).collect();
            let cases = if refs.len() == 1 {
                engine.run(seeds, &refs)?
            } else {
                engine.run_composed(seeds, &refs)?
            };
            for case in cases.iter().filter(|c| c.verdict.is_fail()) {
                entries[index(&case.seed)].defects.insert(d.id);
            }
        }
    }
    Ok(entries)
}

/// Differences between a declared manifest and the computed one.
pub fn manifest_mismatches(declared: &[ManifestEntry], computed: &[ManifestEntry]) -> Vec<String> {
    let mut out = Vec::new();
    for c in computed {
        match declared.iter().find(|d| d.seed == c.seed) {
            None => out.push(format!("{}: missing from manifest (expected `{c}`)", c.seed)),
            Some(d) if d != c => out.push(format!("{}: manifest says `{d}`, observed `{c}`", c.seed)),
            Some(_) => {}
        }
    }
    for d in declared {
        if !computed.iter().any(|c| c.seed == d.seed) {
            out.push(format!("{}: listed in manifest but not in corpus", d.seed));
        }
    }
    out
}
