use minilang::defects::{DefectId, DefectSet};
use minilang::{DiagnosticCode, Outcome, Pipeline};
use pte::rules::*;
use pte::{Engine, EngineConfig, Expectation, Rule, Seed, Verdict};

const RECURSIVE_FIELD: &str = r#"
open class Super {
    public var s1: Int64 = 1;
}
class Base <: Super {
    public var b1: Int64 = 2;
    public var obj: Super = Super();
}
main() {
    var mm: Base = Base();
}
"#;

fn seeds() -> Vec<Seed> {
    vec![
        Seed::new("b.mini", "main() { var x = 3; let y = x * 2; println(y); }"),
        Seed::new(
            "a.mini",
            "let g = 4;\nfunc f(n: Int64): Int64 { n + g }\nmain() { var s = f(1); s = s + 1; println(s); }",
        ),
        Seed::new("c.mini", RECURSIVE_FIELD),
    ]
}

fn d5() -> Pipeline {
    Pipeline::with_defects(DefectSet::only(DefectId::D5))
}

#[test]
fn composition_reveals_recursive_construction() {
    let pipeline = d5();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let recursive = [Seed::new("recursive", RECURSIVE_FIELD)];
    let lsp = LspRule::default();
    let composed = engine.run_composed(&recursive, &[&lsp, &InitCtorRule]).unwrap();
    let case = &composed[0];
    assert_eq!(case.verdict, Verdict::Fail);
    assert_eq!(case.steps.len(), 2);
    assert_eq!(
        case.steps[0].verdict,
        Verdict::Pass {
            matched: Expectation::RuntimeError(Some(DiagnosticCode::StackOverflow))
        }
    );
    assert!(matches!(
        case.steps[0].t1,
        Some(Outcome::RuntimeError {
            code: DiagnosticCode::StackOverflow,
            ..
        })
    ));
    assert_eq!(case.steps[1].verdict, Verdict::Fail);
    assert_eq!(
        case.t1.as_ref().unwrap().codes(),
        [DiagnosticCode::CircularDep].into_iter().collect()
    );

    for rule in [&lsp as &dyn Rule, &InitCtorRule] {
        let alone = engine.run(&recursive, &[rule]).unwrap();
        assert!(
            alone[0].verdict.is_pass(),
            "{} alone: {:?}",
            rule.id(),
            alone[0].verdict
        );
    }
}

#[test]
fn fixed_checker_rejects_the_substituted_form() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let lsp = LspRule::default();
    let composed = engine
        .run_composed(&[Seed::new("recursive", RECURSIVE_FIELD)], &[&lsp, &InitCtorRule])
        .unwrap();
    assert_eq!(
        composed[0].steps[0].verdict,
        Verdict::Pass {
            matched: Expectation::CompileError(Some(DiagnosticCode::CircularDep))
        }
    );
    assert!(composed[0].verdict.is_pass(), "{:?}", composed[0]);
}

#[test]
fn singleton_composition_matches_single_rule_runs() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    for rule in registry(RuleOptions::default()) {
        let single = engine.run(&seeds(), &[rule.as_ref()]).unwrap();
        let composed = engine.run_composed(&seeds(), &[rule.as_ref()]).unwrap();
        let a: Vec<_> = single.iter().map(|c| (&c.seed, &c.verdict)).collect();
        let b: Vec<_> = composed.iter().map(|c| (&c.seed, &c.verdict)).collect();
        assert_eq!(a, b, "{}", rule.id());
    }
}

#[test]
fn double_cond_passes() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let r = engine.run_composed(&seeds(), &[&CondRule, &CondRule]).unwrap();
    for case in &r {
        assert!(case.steps.iter().all(|s| s.verdict.is_pass()), "{case:?}");
        assert!(case
            .transformed
            .as_ref()
            .unwrap()
            .contains("if (true) {\n        if (true)"));
    }
}

#[test]
fn inapplicable_rules_compile_nothing() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let plain = [
        Seed::new("p", "main() { println(1); }"),
        Seed::new("q", "main() { println(2); }"),
    ];
    let r = engine.run(&plain, &[&NarrowRule, &DupModRule]).unwrap();
    assert!(r.iter().all(|c| c.verdict == Verdict::Inapplicable && !c.applied));
    assert_eq!(pipeline.compile_count(), plain.len());
}

#[test]
fn results_are_sorted_and_independent_of_workers() {
    let pipeline = Pipeline::with_defects(DefectSet::all());
    let rules = registry(RuleOptions::default());
    let refs: Vec<&dyn Rule> = rules.iter().map(|r| r.as_ref()).collect();
    let one = Engine::new(
        &pipeline,
        EngineConfig {
            workers: 1,
            per_site: false,
        },
    )
    .run(&seeds(), &refs)
    .unwrap();
    let four = Engine::new(
        &pipeline,
        EngineConfig {
            workers: 4,
            per_site: false,
        },
    )
    .run(&seeds(), &refs)
    .unwrap();
    assert_eq!(one, four);
    assert_eq!(one.len(), 3 * 7);
    assert_eq!(one[0].seed, "a.mini");
    assert!(one
        .windows(2)
        .all(|w| (&w[0].seed, &w[0].rules) <= (&w[1].seed, &w[1].rules)));
}

#[test]
fn per_site_mode_enumerates_sites() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(
        &pipeline,
        EngineConfig {
            workers: 2,
            per_site: true,
        },
    );
    let r = engine
        .run(
            &[Seed::new("s", "main() { var a = 1; var b = 2; a = b; println(a); }")],
            &[&CondRule],
        )
        .unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(
        r.iter().map(|c| c.site).collect::<Vec<_>>(),
        [Some(0), Some(1), Some(2)]
    );
    for c in &r {
        assert_eq!(c.transformed.as_ref().unwrap().matches("if (true)").count(), 1);
        assert!(c.verdict.is_pass());
    }
}

#[test]
fn unparsable_seed_is_an_engine_error() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let err = engine.run(&[Seed::new("bad", "main( {")], &[&CondRule]).unwrap_err();
    assert!(err.to_string().contains("bad"));
}

#[test]
fn empty_sequence_is_rejected() {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    assert!(engine.run_composed(&seeds(), &[]).is_err());
}
