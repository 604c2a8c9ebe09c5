use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pte(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pte"))
        .args(args)
        .current_dir(root())
        .env_remove("PTE_WORKERS")
        .output()
        .expect("pte runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn clean_run_exits_zero() {
    let o = pte(&["run", "--corpus", "corpus", "--rules", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("total"));
}

#[test]
fn defects_make_the_run_fail() {
    let o = pte(&["run", "--rules", "R-COND", "--defects", "D1", "--report", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["defects"], "D1");
    let fail = v["cases"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["verdict"] == "fail")
        .unwrap();
    assert!(fail["transformed"].as_str().unwrap().contains("if (true)"));
    assert_eq!(fail["attributed_to"][0]["defect"], "D1");
    assert_eq!(fail["attributed_to"][0]["category"], "miscompilation");
}

#[test]
fn composition_with_buggy_cycle_check() {
    let o = pte(&[
        "run",
        "--corpus",
        "scenarios/composition",
        "--compose",
        "R-LSP,R-INIT-CTOR",
        "--d5-buggy",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[D5]"), "{}", stdout(&o));
    let o = pte(&[
        "run",
        "--corpus",
        "scenarios/composition",
        "--compose",
        "R-LSP,R-INIT-CTOR",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn workers_from_environment_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub/report.json");
    let o = Command::new(env!("CARGO_BIN_EXE_pte"))
        .args(["run", "--report", "json", "--per-site", "--out"])
        .arg(&out)
        .current_dir(root())
        .env("PTE_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"per_site\": true"));
    assert!(!text.contains("workers"));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(pte(&["run", "--rules", "R-NOPE"]).status.code(), Some(2));
    assert_eq!(pte(&["run", "--defects", "D9"]).status.code(), Some(2));
    assert_eq!(pte(&["run", "--corpus", "no/such/dir"]).status.code(), Some(2));
    assert_eq!(
        pte(&["run", "--corpus", "scenarios/diagnostics"]).status.code(),
        Some(2)
    );
}

#[test]
fn listings() {
    let rules = stdout(&pte(&["list-rules"]));
    for id in pte::RULE_IDS {
        assert!(rules.contains(id), "{id}");
    }
    let defects = stdout(&pte(&["list-defects"]));
    assert!(defects.contains("D5  inconsistent error detection (present = buggy check)"));
    assert!(defects.contains("R-LSP+R-INIT-CTOR"));
}

#[test]
fn gen_is_deterministic_and_runnable() {
    let a = stdout(&pte(&["gen", "--count", "5", "--seed", "9"]));
    let b = stdout(&pte(&["gen", "--count", "5", "--seed", "9"]));
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let o = pte(&[
        "gen",
        "--count",
        "12",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(dir.path().join("gen-00011.mini").exists());
    let o = pte(&["run", "--generate", "40", "--gen-seed", "9", "--rules", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn validate_corpus_checks_the_manifest() {
    let o = pte(&["validate-corpus", "--corpus", "corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 manifest problems"));
}
