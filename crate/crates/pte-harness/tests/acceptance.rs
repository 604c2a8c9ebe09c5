//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use minilang::defects::{self, DefectId, DefectSet};
use minilang::parser::parse_source;
use minilang::printer::to_source;
use minilang::{interp, Diagnostic, DiagnosticCode, Outcome, Pipeline, Span};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use pte::rules::{CondRule, InitCtorRule, LspRule};
use pte::{check_expectation, Engine, EngineConfig, Expectation, IdentityRule, Rule, Seed, Verdict};
use pte_harness::generator::generate_seeds;
use pte_harness::{load_corpus, run_on_seeds, CampaignConfig, SeedSource};

const BASELINE_BUDGET: Duration = Duration::from_secs(60);
const MATRIX_BUDGET: Duration = Duration::from_secs(120);
const PROPERTY_CASES: u32 = 10_000;
const GENERATED: usize = 1000;
const GEN_SEED: u64 = 20_241;
const MIN_CORPUS: usize = 30;
const POLYMORPHISM_SEED: &str = "animals_polymorphism.mini";

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Check + 'a>);

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus() -> Vec<Seed> {
    load_corpus(&root().join("corpus")).expect("corpus loads").seeds
}

fn generated() -> Vec<Seed> {
    generate_seeds(GENERATED, GEN_SEED)
        .expect("generator succeeds")
        .into_iter()
        .enumerate()
        .map(|(i, s)| Seed::new(format!("gen-{i:05}.mini"), s))
        .collect()
}

fn config(defects: DefectSet) -> CampaignConfig {
    CampaignConfig {
        source: SeedSource::Corpus(root().join("corpus")),
        defects,
        ..CampaignConfig::default()
    }
}

fn baseline(seeds: &[Seed]) -> Check {
    if seeds.len() < MIN_CORPUS {
        return Err(format!("corpus has {} seeds, need {MIN_CORPUS}", seeds.len()));
    }
    let start = Instant::now();
    let report = run_on_seeds(&config(DefectSet::none()), seeds).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let t = &report.summary.total;
    if t.fail > 0 || t.rule_error > 0 {
        return Err(format!("{} fail, {} rule errors", t.fail, t.rule_error));
    }
    if took > BASELINE_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!(
        "{} seeds x 7 rules, {} applied, 0 fail in {:.2}s",
        seeds.len(),
        t.applied,
        took.as_secs_f64()
    ))
}

fn detection_matrix(seeds: &[Seed]) -> Check {
    let start = Instant::now();
    let mut found = Vec::new();
    for id in [
        DefectId::D1,
        DefectId::D2,
        DefectId::D3,
        DefectId::D4,
        DefectId::D6,
        DefectId::D7,
    ] {
        let detector = defects::defect(id).designated_detector;
        let report = run_on_seeds(&config(DefectSet::only(id)), seeds).map_err(|e| e.to_string())?;
        if report.summary.total.rule_error > 0 {
            return Err(format!("{id}: {} rule errors", report.summary.total.rule_error));
        }
        let fails: Vec<_> = report.cases.iter().filter(|c| c.verdict == "fail").collect();
        if fails.is_empty() {
            return Err(format!("{id}: no failing case"));
        }
        if let Some(stray) = fails.iter().find(|c| !detector.contains(&c.rules.as_str())) {
            return Err(format!("{id}: {} failed on {}", stray.rules, stray.seed));
        }
        found.push(format!("{id}:{}", fails.len()));
    }
    let took = start.elapsed();
    if took > MATRIX_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} in {:.2}s", found.join(" "), took.as_secs_f64()))
}

fn composition() -> Check {
    let path = root().join("scenarios/composition/recursive_field_init.mini");
    let src = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let seed = [Seed::new("recursive_field_init.mini", src)];
    let lsp = LspRule::default();
    let sequence: [&dyn Rule; 2] = [&lsp, &InitCtorRule];

    let buggy = Pipeline::with_defects(DefectSet::only(DefectId::D5));
    let engine = Engine::new(&buggy, EngineConfig::default());
    let case = engine
        .run_composed(&seed, &sequence)
        .map_err(|e| e.to_string())?
        .remove(0);
    let overflow = Verdict::Pass {
        matched: Expectation::RuntimeError(Some(DiagnosticCode::StackOverflow)),
    };
    if case.steps.len() != 2 || case.steps[0].verdict != overflow || !case.steps[1].verdict.is_fail() {
        return Err(format!("unexpected steps {:?}", case.steps));
    }
    if !case.verdict.is_fail() || case.t1.as_ref().map(Outcome::codes) != Some([DiagnosticCode::CircularDep].into()) {
        return Err(format!("composed verdict {:?}, t1 {:?}", case.verdict, case.t1));
    }
    for rule in sequence {
        let alone = engine.run(&seed, &[rule]).map_err(|e| e.to_string())?;
        if !alone[0].verdict.is_pass() {
            return Err(format!("{} alone: {:?}", rule.id(), alone[0].verdict));
        }
    }
    let fixed = Pipeline::clean();
    let clean = Engine::new(&fixed, EngineConfig::default())
        .run_composed(&seed, &sequence)
        .map_err(|e| e.to_string())?;
    if !clean[0].verdict.is_pass() {
        return Err(format!("fixed checker: {:?}", clean[0].verdict));
    }
    Ok("buggy check: step 1 stack overflow, step 2 circular dependency; each rule alone passes".to_string())
}

fn outcome() -> impl Strategy<Value = Outcome> {
    let code = prop::sample::select(vec![
        DiagnosticCode::TypeMismatch,
        DiagnosticCode::CircularDep,
        DiagnosticCode::Overflow,
        DiagnosticCode::StackOverflow,
        DiagnosticCode::VmAbort,
    ]);
    let out = prop::sample::select(vec!["", "1\n"]).prop_map(String::from);
    prop_oneof![
        code.clone()
            .prop_map(|c| Outcome::compile_error(Diagnostic::new(c, "m", Span::default()))),
        Just(Outcome::CompilerCrash { message: "ice".into() }),
        (out.clone(), 0i64..2).prop_map(|(stdout, exit)| Outcome::Ran { stdout, exit }),
        (code, out.clone()).prop_map(|(code, stdout)| Outcome::RuntimeError { code, stdout }),
        out.prop_map(|stdout| Outcome::Timeout { stdout }),
    ]
}

fn expectation() -> impl Strategy<Value = Expectation> {
    let code = prop::option::of(prop::sample::select(vec![
        DiagnosticCode::TypeMismatch,
        DiagnosticCode::CircularDep,
        DiagnosticCode::Overflow,
        DiagnosticCode::StackOverflow,
    ]));
    prop_oneof![
        Just(Expectation::Compilable),
        code.clone().prop_map(Expectation::CompileError),
        Just(Expectation::Executable),
        code.prop_map(Expectation::RuntimeError),
        Just(Expectation::Equiv),
    ]
}

fn properties(generated: &[Seed]) -> Check {
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(PROPERTY_CASES)
    });
    let lists = (
        outcome(),
        outcome(),
        prop::collection::vec((expectation(), any::<bool>()), 1..6),
    );
    runner
        .run(&lists, |(t0, t1, list)| {
            let all: Vec<_> = list.iter().map(|(e, _)| *e).collect();
            let some: Vec<_> = list.iter().filter(|(_, k)| *k).map(|(e, _)| *e).collect();
            if check_expectation(&some, &t0, &t1).is_pass() {
                prop_assert!(check_expectation(&all, &t0, &t1).is_pass());
            }
            if t1.is_crash_like() {
                prop_assert_eq!(check_expectation(&all, &t0, &t1), Verdict::Fail);
            }
            Ok(())
        })
        .map_err(|e| format!("expectation property: {e}"))?;

    let pipeline = Pipeline::clean();
    let results = Engine::new(&pipeline, EngineConfig::default())
        .run(generated, &[&IdentityRule])
        .map_err(|e| e.to_string())?;
    if let Some(bad) = results.iter().find(|c| !c.verdict.is_pass()) {
        return Err(format!("identity on {}: {:?}", bad.seed, bad.verdict));
    }
    Ok(format!(
        "{PROPERTY_CASES} trials; identity passes on {} generated seeds",
        results.len()
    ))
}

fn roundtrip(seeds: &[Seed]) -> Check {
    let d3 = Pipeline::with_defects(DefectSet::only(DefectId::D3));
    let mut broken = 0;
    for s in seeds {
        let p = parse_source(&s.source).map_err(|d| format!("{}: {}", s.id, d.render(&s.source)))?;
        let once = to_source(&p.root);
        let again = parse_source(&once).map_err(|_| format!("{}: printed form does not parse", s.id))?;
        if to_source(&again.root) != once {
            return Err(format!("{}: print is not a fixpoint", s.id));
        }
        let faulty = d3.print(&p.root).source;
        if parse_source(&faulty).map_or(true, |q| to_source(&q.root) != once) {
            broken += 1;
        }
    }
    if broken == 0 {
        return Err("D3 leaves every program intact".to_string());
    }
    let report = run_on_seeds(
        &CampaignConfig {
            rules: "R-ROUNDTRIP".to_string(),
            ..config(DefectSet::only(DefectId::D3))
        },
        seeds,
    )
    .map_err(|e| e.to_string())?;
    if report.summary.total.fail == 0 {
        return Err("R-ROUNDTRIP does not fail under D3".to_string());
    }
    Ok(format!(
        "fixpoint on {} programs; D3 breaks {broken}, R-ROUNDTRIP fails {}",
        seeds.len(),
        report.summary.total.fail
    ))
}

fn differential(seeds: &[Seed]) -> Check {
    let clean = Pipeline::clean();
    for s in seeds {
        let p = parse_source(&s.source).map_err(|_| format!("{}: parse", s.id))?;
        let vm = clean.run(&p);
        let reference = interp::interpret(&p);
        if !vm.same_behavior(&reference) {
            return Err(format!("{}: vm {vm} vs interpreter {reference}", s.id));
        }
    }
    let d1 = Pipeline::with_defects(DefectSet::only(DefectId::D1));
    let engine = Engine::new(&d1, EngineConfig::default());
    let mut diverging = BTreeSet::new();
    for s in seeds {
        let p = parse_source(&s.source).expect("parsed above");
        let Some(Ok(out)) = engine.apply_rule(&CondRule, &p) else {
            continue;
        };
        let q = parse_source(&out).map_err(|_| format!("{}: R-COND output", s.id))?;
        if !d1.run(&q).same_behavior(&interp::interpret(&q)) {
            diverging.insert(s.id.clone());
        }
    }
    let results = engine.run(seeds, &[&CondRule]).map_err(|e| e.to_string())?;
    let failing: BTreeSet<_> = results
        .iter()
        .filter(|c| c.verdict.is_fail())
        .map(|c| c.seed.clone())
        .collect();
    if diverging.is_empty() || failing != diverging {
        return Err(format!("D1 diverges on {diverging:?}, R-COND fails on {failing:?}"));
    }
    Ok(format!(
        "agree on {} programs; D1 diverges on {} and R-COND fails exactly there",
        seeds.len(),
        diverging.len()
    ))
}

fn naive_lsp(seeds: &[Seed]) -> Check {
    let run = |naive| {
        run_on_seeds(
            &CampaignConfig {
                rules: "R-LSP".to_string(),
                naive_lsp: naive,
                ..config(DefectSet::none())
            },
            seeds,
        )
        .map_err(|e| e.to_string())
    };
    let refined = run(false)?;
    let naive = run(true)?;
    let flipped: Vec<_> = refined
        .cases
        .iter()
        .zip(&naive.cases)
        .filter(|(a, b)| (a.verdict == "fail") != (b.verdict == "fail"))
        .map(|(a, _)| a.seed.clone())
        .collect();
    if flipped != [POLYMORPHISM_SEED] {
        return Err(format!("flipped: {flipped:?}"));
    }
    Ok(format!("only {POLYMORPHISM_SEED} flips"))
}

fn determinism(seeds: &[Seed]) -> Check {
    let json = |workers, compose: Option<&str>| {
        run_on_seeds(
            &CampaignConfig {
                workers,
                compose: compose.map(String::from),
                per_site: compose.is_none(),
                ..config(DefectSet::all())
            },
            seeds,
        )
        .map(|r| r.to_json())
        .map_err(|e| e.to_string())
    };
    for compose in [None, Some("R-LSP,R-INIT-CTOR")] {
        let a = json(1, compose)?;
        let b = json(1, compose)?;
        let c = json(4, compose)?;
        if a != b || a != c {
            return Err(format!("report differs (compose {compose:?})"));
        }
    }
    Ok("identical JSON for two reruns and 1 vs 4 workers".to_string())
}

fn main() -> ExitCode {
    let corpus = corpus();
    let generated = generated();
    let mut both = corpus.clone();
    both.extend(generated.iter().cloned());

    let criteria: Vec<Criterion> = vec![
        ("baseline", Box::new(|| baseline(&corpus))),
        ("detection-matrix", Box::new(|| detection_matrix(&corpus))),
        ("composition", Box::new(composition)),
        ("expectation-properties", Box::new(|| properties(&generated))),
        ("roundtrip-fixpoint", Box::new(|| roundtrip(&both))),
        ("vm-vs-interpreter", Box::new(|| differential(&both))),
        ("naive-lsp", Box::new(|| naive_lsp(&corpus))),
        ("deterministic-report", Box::new(|| determinism(&corpus))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {}. {name}: {reason}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
