use std::collections::BTreeMap;

use minilang::{interp, parser::parse_source, Outcome, Pipeline};
use pte::{registry, Engine, EngineConfig, Rule, RuleOptions, Seed};
use pte_harness::generator::generate_seeds;

fn seeds(n: usize) -> Vec<Seed> {
    generate_seeds(n, 2024)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, s)| Seed::new(format!("gen-{i:04}"), s))
        .collect()
}

#[test]
fn every_rule_applies_to_a_twentieth_of_programs() {
    let seeds = seeds(1000);
    let pipeline = Pipeline::clean();
    let rules = registry(RuleOptions::default());
    let refs: Vec<&dyn Rule> = rules.iter().map(|r| r.as_ref()).collect();
    let results = Engine::new(&pipeline, EngineConfig::default())
        .run(&seeds, &refs)
        .unwrap();
    let mut applied: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &results {
        if c.applied {
            *applied.entry(c.rules[0].as_str()).or_default() += 1;
        }
        assert!(
            !c.verdict.is_fail() && !c.verdict.is_rule_error(),
            "{}: {c:?}\n{}",
            c.seed,
            seeds.iter().find(|s| s.id == c.seed).unwrap().source
        );
    }
    for id in pte::RULE_IDS {
        let n = applied.get(id).copied().unwrap_or(0);
        assert!(n >= 50, "{id} applied to {n} of 1000");
    }
}

#[test]
fn generated_programs_agree_with_the_interpreter() {
    let pipeline = Pipeline::clean();
    for seed in seeds(300) {
        let program = parse_source(&seed.source).unwrap();
        let vm = pipeline.run(&program);
        let reference = interp::interpret(&program);
        assert!(
            vm.same_behavior(&reference),
            "{}: {vm} vs {reference}\n{}",
            seed.id,
            seed.source
        );
        assert!(
            !matches!(vm, Outcome::Timeout { .. } | Outcome::CompileError { .. }),
            "{}: {vm}",
            seed.id
        );
    }
}
