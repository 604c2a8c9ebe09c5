use std::fs;

use pte_harness::corpus::{compute_manifest, load_corpus, manifest_mismatches, parse_manifest, CorpusError};

#[test]
fn seeds_load_in_path_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("b")).unwrap();
    fs::write(dir.path().join("b/z.mini"), "main() { println(1); }").unwrap();
    fs::write(dir.path().join("c.mini"), "main() { println(2); }").unwrap();
    fs::write(dir.path().join("a.mini"), "main() { println(3); }").unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    let ids: Vec<_> = corpus.seeds.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["a.mini", "b/z.mini", "c.mini"]);
    assert!(corpus.warnings.is_empty());
}

#[test]
fn empty_corpus_warns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = load_corpus(dir.path()).unwrap();
    assert!(corpus.seeds.is_empty());
    assert_eq!(corpus.warnings.len(), 1);
}

#[test]
fn invalid_seeds_are_named() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ok.mini"), "main() { }").unwrap();
    fs::write(dir.path().join("crash.mini"), "main() { println(1 / 0); }").unwrap();
    fs::write(dir.path().join("typo.mini"), "main( {").unwrap();
    let err = load_corpus(dir.path()).unwrap_err();
    let CorpusError::Invalid(problems) = &err else {
        panic!("{err}")
    };
    let ids: Vec<_> = problems.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids, ["crash.mini", "typo.mini"]);
    assert!(err.to_string().contains("R_DIV_ZERO"));
}

#[test]
fn shipped_manifest_matches_observed_behavior() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let corpus = load_corpus(&root).unwrap();
    assert!(corpus.seeds.len() >= 30);
    let declared = parse_manifest(&fs::read_to_string(root.join("corpus-manifest.txt")).unwrap()).unwrap();
    let computed = compute_manifest(&corpus.seeds, 0).unwrap();
    assert_eq!(manifest_mismatches(&declared, &computed), Vec::<String>::new());
    for id in pte::RULE_IDS {
        assert!(computed.iter().any(|e| e.rules.contains(id)), "no seed for {id}");
    }
}

#[test]
fn mismatches_are_reported_both_ways() {
    let declared = parse_manifest("a.mini | R-COND | -\nghost.mini | - | -").unwrap();
    let computed = parse_manifest("a.mini | R-COND | D1\nb.mini | - | -").unwrap();
    let m = manifest_mismatches(&declared, &computed);
    assert_eq!(m.len(), 3, "{m:?}");
}

#[test]
fn narrow_scenario_reports_a_type_mismatch_only_when_fixed() {
    use minilang::defects::{DefectId, DefectSet};
    use minilang::{DiagnosticCode, Pipeline};
    let path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/diagnostics/narrow_mismatch.mini");
    let src = fs::read_to_string(path).unwrap();
    let clean = Pipeline::clean().execute(&src);
    assert_eq!(clean.codes(), [DiagnosticCode::TypeMismatch].into());
    let faulty = Pipeline::with_defects(DefectSet::only(DefectId::D4)).execute(&src);
    assert!(!faulty.same_behavior(&clean), "{faulty}");
}
