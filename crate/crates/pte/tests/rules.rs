use minilang::defects::{DefectId, DefectSet};
use minilang::interp;
use minilang::parser::parse_source;
use minilang::{DiagnosticCode, Outcome, Pipeline};
use pte::rules::*;
use pte::{Engine, EngineConfig, Expectation, Rule, Seed, Verdict};

fn transform(rule: &dyn Rule, src: &str) -> Option<String> {
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    engine
        .apply_rule(rule, &parse_source(src).unwrap())
        .map(|r| r.expect("rule output parses"))
}

fn verdict(rule: &dyn Rule, src: &str, defects: DefectSet) -> Verdict {
    let pipeline = Pipeline::with_defects(defects);
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let results = engine.run(&[Seed::new("s", src)], &[rule]).unwrap();
    assert_eq!(results.len(), 1);
    results[0].verdict.clone()
}

fn pass(e: Expectation) -> Verdict {
    Verdict::Pass { matched: e }
}

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn cond_wraps_initializers() {
    let out = transform(&CondRule, "let num = 8;\nmain() { println(num); }").unwrap();
    assert!(squash(&out).contains("let num = if (true) { 8 } else { 8 };"), "{out}");
    let out = transform(&CondRule, "func f(): Int64 { 1 }\nmain() { var b = f(); println(b); }").unwrap();
    assert!(
        squash(&out).contains("var b = if (true) { f() } else { f() };"),
        "{out}"
    );
    assert_eq!(transform(&CondRule, "main() { var x: Int64; println(x); }"), None);
}

#[test]
fn cond_rewrites_every_site_and_preserves_behavior() {
    let src = "main() { let a = 2; var b = a * 3; b = b + a; println(b); }";
    let out = transform(&CondRule, src).unwrap();
    assert_eq!(squash(&out).matches("if (true)").count(), 3);
    let before = interp::interpret(&parse_source(src).unwrap());
    let after = interp::interpret(&parse_source(&out).unwrap());
    assert!(before.same_behavior(&after));
    assert_eq!(verdict(&CondRule, src, DefectSet::none()), pass(Expectation::Equiv));
}

#[test]
fn cond_catches_d1_and_d2() {
    let global = "let g: Int64 = 7;\nmain() { println(g); }";
    assert_eq!(verdict(&CondRule, global, DefectSet::only(DefectId::D1)), Verdict::Fail);
    let ctor = "class C { var v: Int64 = 1; }\nmain() { let c = C(); println(c.v); }";
    assert_eq!(verdict(&CondRule, ctor, DefectSet::none()), pass(Expectation::Equiv));
    assert_eq!(verdict(&CondRule, ctor, DefectSet::only(DefectId::D2)), Verdict::Fail);
}

const FIELDS: &str =
    "class P {\n    var x: Int64;\n    var y: Int64 = 2;\n}\nmain() {\n    let p = P();\n    println(p.x + p.y);\n}\n";

#[test]
fn roundtrip_is_equiv_and_catches_d3() {
    assert_eq!(
        verdict(&RoundTripRule, FIELDS, DefectSet::none()),
        pass(Expectation::Equiv)
    );
    assert_eq!(
        verdict(&RoundTripRule, FIELDS, DefectSet::only(DefectId::D3)),
        Verdict::Fail
    );
    let branches = "main() { var x = 1; if (x > 0) { x = x + 1; println(x); } else { println(0); } }";
    assert_eq!(
        verdict(&RoundTripRule, branches, DefectSet::all()),
        pass(Expectation::Equiv)
    );
}

const SHAPES: &str = r#"
open class C1 {
    func f1(): Int64 { 1 }
}
class C2 <: C1 {
    override func f1(): Int64 { 2 }
}
main() {
    var v1 = C1().f1();
    println(v1);
}
"#;

#[test]
fn lsp_substitutes_the_smallest_subclass() {
    let out = transform(&LspRule::default(), SHAPES).unwrap();
    assert!(squash(&out).contains("var v1 = C2().f1();"), "{out}");
    assert_eq!(
        verdict(&LspRule::default(), SHAPES, DefectSet::none()),
        pass(Expectation::Executable)
    );
    assert_eq!(
        verdict(&LspRule { naive: true }, SHAPES, DefectSet::none()),
        Verdict::Fail
    );
    let no_sub = "class A { }\nmain() { let a = A(); }";
    assert_eq!(transform(&LspRule::default(), no_sub), None);
}

#[test]
fn lsp_skips_subclasses_with_other_constructors() {
    let src =
        "open class A { }\nclass B <: A { var v: Int64; init(v: Int64) { this.v = v; } }\nmain() { let a = A(); }";
    assert_eq!(transform(&LspRule::default(), src), None);
}

#[test]
fn lsp_catches_d6() {
    let src = r#"
open class Shape {
    func area(): Int64 { 1 }
}
class Square <: Shape { }
class Holder {
    var item: Shape = Shape();
}
main() {
    let h = Holder();
    println(h.item.area());
}
"#;
    assert_eq!(
        verdict(&LspRule::default(), src, DefectSet::none()),
        pass(Expectation::Executable)
    );
    assert_eq!(
        verdict(&LspRule::default(), src, DefectSet::only(DefectId::D6)),
        Verdict::Fail
    );
}

#[test]
fn init_ctor_moves_field_initializers() {
    let src = "open class Super {\n    public var s1: Int64 = 1;\n}\nmain() { let s = Super(); println(s.s1); }";
    let out = transform(&InitCtorRule, src).unwrap();
    let flat = squash(&out);
    assert!(flat.contains("public var s1: Int64;"), "{out}");
    assert!(flat.contains("init() { this.s1 = 1; }"), "{out}");
    assert_eq!(verdict(&InitCtorRule, src, DefectSet::none()), pass(Expectation::Equiv));
    assert_eq!(transform(&InitCtorRule, "class A { var x: Int64; }\nmain() { }"), None);
}

#[test]
fn init_ctor_prepends_to_an_existing_init() {
    let src = "class A {\n    var x: Int64 = 3;\n    var y: Int64;\n    init(k: Int64) { y = x * k; }\n}\nmain() { println(A(2).y); }";
    let out = transform(&InitCtorRule, src).unwrap();
    assert!(
        squash(&out).contains("init(k: Int64) { this.x = 3; y = x * k; }"),
        "{out}"
    );
    assert_eq!(verdict(&InitCtorRule, src, DefectSet::none()), pass(Expectation::Equiv));
}

#[test]
fn init_ctor_keeps_inherited_signatures() {
    let src = "open class A { var x: Int64; init(v: Int64) { x = v; } }\nclass B <: A { var y: Int64 = 1; }\nmain() { println(B(4).x); }";
    assert_eq!(transform(&InitCtorRule, src), None);
}

#[test]
fn decinc_inserts_after_var() {
    let out = transform(&DecIncRule, "main() { var x = 5; println(x); }").unwrap();
    assert!(squash(&out).contains("var x = 5; x = x - 1; x = x + 1;"), "{out}");
    assert_eq!(transform(&DecIncRule, "main() { let x = 5; println(x); }"), None);
    let min = "main() { var x = -9223372036854775808; println(x); }";
    assert_eq!(
        verdict(&DecIncRule, min, DefectSet::none()),
        pass(Expectation::RuntimeError(Some(DiagnosticCode::Overflow)))
    );
    assert_eq!(
        verdict(&DecIncRule, "main() { var x = 5; println(x); }", DefectSet::none()),
        pass(Expectation::Equiv)
    );
}

#[test]
fn narrow_changes_annotation() {
    let src = "main() { var m: Int64 = 255; println(m); }";
    let out = transform(&NarrowRule, src).unwrap();
    assert!(squash(&out).contains("var m: Int8 = 255;"), "{out}");
    let tm = pass(Expectation::CompileError(Some(DiagnosticCode::TypeMismatch)));
    assert_eq!(verdict(&NarrowRule, src, DefectSet::none()), tm);
    assert_eq!(verdict(&NarrowRule, src, DefectSet::only(DefectId::D4)), Verdict::Fail);
    assert_eq!(transform(&NarrowRule, "main() { var m = 12; }"), None);
    assert_eq!(verdict(&NarrowRule, "let g = -300;\nmain() { }", DefectSet::none()), tm);
}

#[test]
fn dupmod_repeats_modifiers() {
    let src = "open class C { func f(): Int64 { 1 } }\nclass D <: C { override func f(): Int64 { 2 } }\nmain() { }";
    let out = transform(&DupModRule, src).unwrap();
    let flat = squash(&out);
    assert!(flat.contains("open open class C"), "{out}");
    assert!(flat.contains("override override func f"), "{out}");
    let dup = pass(Expectation::CompileError(Some(DiagnosticCode::DupModifier)));
    assert_eq!(verdict(&DupModRule, src, DefectSet::none()), dup);
    assert_eq!(verdict(&DupModRule, src, DefectSet::only(DefectId::D7)), Verdict::Fail);
    assert_eq!(transform(&DupModRule, "class C { }\nmain() { }"), None);
}

#[test]
fn identity_passes() {
    assert_eq!(
        verdict(&IdentityRule, FIELDS, DefectSet::none()),
        pass(Expectation::Equiv)
    );
}

#[test]
fn timeouts_are_recorded_not_fatal() {
    let src = "main() { var i = 0; while (i >= 0) { i = i + 0; } }";
    let pipeline = Pipeline::clean();
    let engine = Engine::new(&pipeline, EngineConfig::default());
    let r = engine.run(&[Seed::new("loop", src)], &[&DecIncRule]).unwrap();
    assert!(matches!(r[0].t0, Outcome::Timeout { .. }));
    assert_eq!(r[0].verdict, Verdict::Fail);
}
