use minilang::defects::DefectSet;
use pte::Seed;
use pte_harness::{run_on_seeds, CampaignConfig};

fn seeds() -> Vec<Seed> {
    vec![
        Seed::new("g.mini", "let g: Int64 = 5;\nmain() { var x = g * 2; println(x); }"),
        Seed::new(
            "c.mini",
            "class C { var v: Int64; init() { v = 300; } }\nmain() { let c = C(); println(c.v); }",
        ),
    ]
}

#[test]
fn json_is_stable_and_ordered() {
    let cfg = CampaignConfig {
        defects: DefectSet::all(),
        ..CampaignConfig::default()
    };
    let a = run_on_seeds(&cfg, &seeds()).unwrap();
    let b = run_on_seeds(&CampaignConfig { workers: 3, ..cfg }, &seeds()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    assert_eq!(keys, ["cases", "config", "schema_version", "summary", "tool"]);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 14);
    assert_eq!(cases[0]["seed"], "c.mini");
    assert!(!a.is_clean());
}

#[test]
fn summary_counts_add_up() {
    let r = run_on_seeds(&CampaignConfig::default(), &seeds()).unwrap();
    let t = &r.summary.total;
    assert_eq!(t.cases, t.pass + t.fail + t.inapplicable + t.rule_error);
    assert_eq!(r.summary.per_rule.values().map(|c| c.cases).sum::<usize>(), t.cases);
    assert!(r.is_clean());
    assert!(r.summary.fail_categories.is_empty());
    let text = r.to_text();
    assert!(text.contains("R-NARROW") && text.contains("wall time"));
}

#[test]
fn failures_are_categorized() {
    let cfg = CampaignConfig {
        rules: "R-COND,R-ROUNDTRIP".into(),
        defects: DefectSet::parse_list("D1,D3").unwrap(),
        ..CampaignConfig::default()
    };
    let r = run_on_seeds(&cfg, &seeds()).unwrap();
    let fails: Vec<_> = r.cases.iter().filter(|c| c.verdict == "fail").collect();
    assert_eq!(fails.len(), 2, "{:#?}", r.cases);
    for c in fails {
        assert_eq!(c.attributed_to.len(), 1);
        assert!(c.transformed.is_some());
    }
    assert_eq!(r.to_json().matches("\"miscompilation\"").count(), 3);
}
