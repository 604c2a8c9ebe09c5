use minilang::defects::{DefectId, DefectSet};
use minilang::diag::DiagnosticCode;
use minilang::pipeline::{self, Pipeline};
use minilang::Outcome;

fn ran(stdout: &str, exit: i64) -> Outcome {
    Outcome::Ran {
        stdout: stdout.into(),
        exit,
    }
}

/// Run on the VM and the interpreter; they must agree.
fn both(src: &str) -> Outcome {
    let vm = pipeline::run(src);
    let it = pipeline::interpret(src);
    assert!(vm.same_behavior(&it), "vm {vm:?} vs interpreter {it:?}\n{src}");
    vm
}

fn runtime_code(o: &Outcome) -> Option<DiagnosticCode> {
    match o {
        Outcome::RuntimeError { code, .. } => Some(*code),
        _ => None,
    }
}

#[test]
fn prints_and_exits() {
    assert_eq!(both("main() { println(8); 0 }"), ran("8\n", 0));
    assert_eq!(both("main(): Int64 { println(\"a\" + \"b\"); 3 }"), ran("ab\n", 3));
}

#[test]
fn division_by_zero_traps() {
    let o = both("main() { println(1 / 0); }");
    assert_eq!(runtime_code(&o), Some(DiagnosticCode::DivZero));
}

#[test]
fn overflow_traps() {
    let o = both("main() { let m: Int64 = -9223372036854775807 - 1; println(m); println(m - 1); }");
    assert_eq!(runtime_code(&o), Some(DiagnosticCode::Overflow));
    assert_eq!(o.stdout(), "-9223372036854775808\n");
    let o = both("main() { var x: Int8 = 127; x = x + 1; }");
    assert_eq!(runtime_code(&o), Some(DiagnosticCode::Overflow));
    let o = both("main() { let m: Int64 = -9223372036854775807 - 1; println(m % -1); println(m / -1); }");
    assert_eq!(o.stdout(), "0\n");
    assert_eq!(runtime_code(&o), Some(DiagnosticCode::Overflow));
}

#[test]
fn deep_recursion_overflows_the_stack() {
    let src = "func f(n: Int64): Int64 { f(n + 1) } main() { println(f(0)); }";
    assert_eq!(runtime_code(&both(src)), Some(DiagnosticCode::StackOverflow));
    let ok = "func f(n: Int64): Int64 { if (n == 0) { 0 } else { f(n - 1) + 1 } } main() { println(f(4000)); }";
    assert_eq!(both(ok), ran("4000\n", 0));
}

#[test]
fn stack_limit_is_exact() {
    // main is depth 1, so f(n) reaches depth n + 1.
    let at = |n: i64| {
        format!("func f(n: Int64): Int64 {{ if (n == 0) {{ 0 }} else {{ f(n - 1) }} }} main() {{ println(f({n})); }}")
    };
    assert_eq!(both(&at(4094)), ran("0\n", 0));
    assert_eq!(runtime_code(&both(&at(4095))), Some(DiagnosticCode::StackOverflow));
}

#[test]
fn infinite_loop_times_out() {
    let o = both("main() { var i = 0; while (true) { i = i + 0; } }");
    assert!(matches!(o, Outcome::Timeout { .. }), "{o:?}");
}

#[test]
fn classes_dispatch_virtually() {
    let src = r#"
open class Animal {
    var legs: Int64 = 4;
    func noise(): String { "..." }
    func describe(): String { noise() + "!" }
}
class Bird <: Animal {
    init() { legs = 2; }
    override func noise(): String { "tweet" }
}
main() {
    let a: Animal = Bird();
    println(a.describe());
    println(a.legs);
    let b: Animal = Animal();
    println(b.describe());
}
"#;
    assert_eq!(both(src), ran("tweet!\n2\n...!\n", 0));
}

#[test]
fn constructors_chain_with_arguments() {
    let src = r#"
open class P {
    var x: Int64;
    init(v: Int64) { x = v * 10; }
}
class Q <: P {
    var y: Int64 = 7;
}
main() {
    let q = Q(3);
    println(q.x + q.y);
}
"#;
    assert_eq!(both(src), ran("37\n", 0));
}

#[test]
fn null_field_dereference_aborts() {
    let src = r#"
class Node {
    var next: Node;
    var v: Int64 = 1;
}
main() {
    let n = Node();
    println(n.next.v);
}
"#;
    assert_eq!(runtime_code(&both(src)), Some(DiagnosticCode::VmAbort));
}

const FIELD_FORM: &str = r#"
open class Super {
    public var s1: Int64 = 1;
}
class Base <: Super {
    public var b1: Int64 = 2;
    public var obj: Super = Base();
}
main() {
    var mm: Base = Base();
}
"#;

#[test]
fn recursive_field_construction() {
    let fixed = Pipeline::clean().execute(FIELD_FORM);
    assert_eq!(fixed.codes(), [DiagnosticCode::CircularDep].into_iter().collect());
    let buggy = Pipeline::with_defects(DefectSet::only(DefectId::D5)).execute(FIELD_FORM);
    assert_eq!(runtime_code(&buggy), Some(DiagnosticCode::StackOverflow));
}

#[test]
fn d1_drops_global_if_initializers() {
    let src = "let g: Int64 = if (true) { 5 } else { 6 }; main() { println(g); }";
    assert_eq!(both(src), ran("5\n", 0));
    assert_eq!(pipeline::run_with(src, &DefectSet::only(DefectId::D1)), ran("0\n", 0));
}

#[test]
fn d2_crashes_on_ctor_in_if() {
    let src = "class C { var v: Int64 = 1; } main() { let c = if (true) { C() } else { C() }; println(c.v); }";
    assert_eq!(both(src), ran("1\n", 0));
    let o = pipeline::run_with(src, &DefectSet::only(DefectId::D2));
    assert!(matches!(o, Outcome::CompilerCrash { .. }), "{o:?}");
}

#[test]
fn d6_breaks_subclass_dispatch() {
    let src = r#"
open class Shape {
    func area(): Int64 { 1 }
}
class Square <: Shape { }
class Holder {
    var item: Shape = Square();
}
main() {
    let h = Holder();
    println(h.item.area());
}
"#;
    assert_eq!(both(src), ran("1\n", 0));
    let o = pipeline::run_with(src, &DefectSet::only(DefectId::D6));
    assert_eq!(runtime_code(&o), Some(DiagnosticCode::VmAbort));
}

#[test]
fn compiled_modules_validate() {
    let chain = FIELD_FORM.replace("obj: Super = Base()", "obj: Super = Super()");
    for src in [
        chain.as_str(),
        "main() { var i = 0; while (i < 3) { i = i + 1; } println(i); }",
    ] {
        let m = Pipeline::clean().compile_source(src).expect("compiles");
        m.validate().unwrap();
        assert!(m.vtables_complete());
    }
}

#[test]
fn short_circuit_and_globals() {
    let src = r#"
var hits: Int64 = 0;
func touch(): Bool { hits = hits + 1; true }
main() {
    if (false && touch()) { println(1); }
    if (true || touch()) { println(2); }
    if (true && touch()) { println(hits); }
}
"#;
    assert_eq!(both(src), ran("2\n1\n", 0));
}
