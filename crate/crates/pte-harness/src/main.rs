use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minilang::defects::{self, DefectId, DefectSet};
use pte::{registry, RuleOptions};
use pte_harness::corpus::{self, MANIFEST_FILE};
use pte_harness::generator::generate_seeds;
use pte_harness::{run_campaign, CampaignConfig, SeedSource};

#[derive(Parser)]
#[command(
    name = "pte",
    version,
    about = "Program-transformation testing for the MiniLang compiler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run rules over a seed corpus against a compiler configuration.
    Run(RunArgs),
    /// Generate random clean seed programs.
    Gen(GenArgs),
    /// List the available rules.
    ListRules,
    /// List the planted defects.
    ListDefects,
    /// Check that every corpus seed is valid and matches the manifest.
    ValidateCorpus(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "corpus")]
    corpus: PathBuf,
    /// Use N generated programs instead of the corpus.
    #[arg(long, value_name = "N")]
    generate: Option<usize>,
    /// Generator seed for --generate.
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    /// Comma-separated rule ids, or `all`.
    #[arg(long, default_value = "all")]
    rules: String,
    /// Apply the listed rules in order as one composition.
    #[arg(long, value_name = "LIST")]
    compose: Option<String>,
    /// Defects to activate: `D1,D3`, `none` or `all`.
    #[arg(long, default_value = "none")]
    defects: String,
    /// Use the original construction-cycle check (activates D5).
    #[arg(long)]
    d5_buggy: bool,
    #[arg(long, env = "PTE_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    /// One case per matching site instead of one per seed.
    #[arg(long)]
    per_site: bool,
    /// Give R-LSP the unrefined `[Equiv]` expectation.
    #[arg(long)]
    naive_lsp: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report: Format,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to write `gen-NNNNN.mini` files into; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "corpus")]
    corpus: PathBuf,
    #[arg(long, env = "PTE_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Rewrite the manifest from observed behavior.
    #[arg(long)]
    write_manifest: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Gen(a) => gen(a),
        Command::ListRules => list_rules(),
        Command::ListDefects => list_defects(),
        Command::ValidateCorpus(a) => validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(a: RunArgs) -> Result<bool> {
    let mut defects = DefectSet::parse_list(&a.defects)?;
    if a.d5_buggy {
        defects.insert(DefectId::D5);
    }
    let source = match a.generate {
        Some(count) => SeedSource::Generated {
            count,
            seed: a.gen_seed,
        },
        None => SeedSource::Corpus(a.corpus),
    };
    let cfg = CampaignConfig {
        source,
        rules: a.rules,
        compose: a.compose,
        defects,
        per_site: a.per_site,
        naive_lsp: a.naive_lsp,
        workers: a.workers,
        timeout_ms: a.timeout_ms,
    };
    let campaign = run_campaign(&cfg)?;
    for w in &campaign.warnings {
        eprintln!("warning: {w}");
    }
    let report = &campaign.report;
    let body = match a.report {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match &a.out {
        Some(path) => write(path, &body)?,
        None => print!("{body}"),
    }
    let t = &report.summary.total;
    eprintln!(
        "{} cases: {} pass, {} fail, {} inapplicable, {} rule errors in {:.3}s",
        t.cases,
        t.pass,
        t.fail,
        t.inapplicable,
        t.rule_error,
        report.timing.total.as_secs_f64()
    );
    Ok(report.is_clean())
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn gen(a: GenArgs) -> Result<bool> {
    let programs = generate_seeds(a.count, a.seed)?;
    for (i, src) in programs.iter().enumerate() {
        let name = format!("gen-{i:05}.mini");
        match &a.out {
            Some(dir) => write(&dir.join(&name), src)?,
            None => println!("// {name}\n{src}"),
        }
    }
    Ok(true)
}

fn list_rules() -> Result<bool> {
    for rule in registry(RuleOptions::default()) {
        let exp: Vec<_> = rule.expectations().iter().map(|e| e.to_string()).collect();
        println!("{:<12} {}", rule.id(), rule.summary());
        println!("{:<12} expects {}", "", exp.join(" | "));
    }
    Ok(true)
}

fn list_defects() -> Result<bool> {
    for d in defects::catalog() {
        let inv = if d.inverted { " (present = buggy check)" } else { "" };
        println!("{}  {}{}", d.id, d.category.as_str(), inv);
        println!("    site:     {}", d.site);
        println!("    trigger:  {}", d.trigger);
        println!("    detector: {}", d.designated_detector.join(", "));
    }
    Ok(true)
}

fn validate(a: ValidateArgs) -> Result<bool> {
    let corpus = corpus::load_corpus(&a.corpus)?;
    for w in &corpus.warnings {
        eprintln!("warning: {w}");
    }
    let computed = corpus::compute_manifest(&corpus.seeds, a.workers)?;
    let path = a.corpus.join(MANIFEST_FILE);
    if a.write_manifest {
        let mut text = String::from("# seed | applicable rules | defects exposed by their designated detector\n");
        for e in &computed {
            text.push_str(&e.to_string());
            text.push('\n');
        }
        write(&path, &text)?;
        println!("wrote {} entries to {}", computed.len(), path.display());
        return Ok(true);
    }
    if !path.exists() {
        bail!("{} not found (use --write-manifest to create it)", path.display());
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let declared = corpus::parse_manifest(&text)?;
    let problems = corpus::manifest_mismatches(&declared, &computed);
    for p in &problems {
        println!("{p}");
    }
    println!("{} seeds, {} manifest problems", corpus.seeds.len(), problems.len());
    Ok(problems.is_empty())
}
