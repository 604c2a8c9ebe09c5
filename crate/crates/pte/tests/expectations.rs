use minilang::{Diagnostic, DiagnosticCode, Outcome, Span};
use proptest::prelude::*;
use pte::{check_expectation, Expectation, Verdict};

const CODES: [DiagnosticCode; 5] = [
    DiagnosticCode::TypeMismatch,
    DiagnosticCode::CircularDep,
    DiagnosticCode::Overflow,
    DiagnosticCode::StackOverflow,
    DiagnosticCode::VmAbort,
];

fn code() -> impl Strategy<Value = DiagnosticCode> {
    prop::sample::select(CODES.to_vec())
}

fn outcome() -> impl Strategy<Value = Outcome> {
    let out = prop::sample::select(vec!["", "1\n", "2\n"]).prop_map(String::from);
    prop_oneof![
        code().prop_map(|c| Outcome::compile_error(Diagnostic::new(c, "m", Span::default()))),
        Just(Outcome::CompilerCrash { message: "ice".into() }),
        (out.clone(), 0i64..2).prop_map(|(stdout, exit)| Outcome::Ran { stdout, exit }),
        (code(), out.clone()).prop_map(|(code, stdout)| Outcome::RuntimeError { code, stdout }),
        out.prop_map(|stdout| Outcome::Timeout { stdout }),
    ]
}

fn expectation() -> impl Strategy<Value = Expectation> {
    prop_oneof![
        Just(Expectation::Compilable),
        prop::option::of(code()).prop_map(Expectation::CompileError),
        Just(Expectation::Executable),
        prop::option::of(code()).prop_map(Expectation::RuntimeError),
        Just(Expectation::Equiv),
    ]
}

fn crash() -> impl Strategy<Value = Outcome> {
    let out = prop::sample::select(vec!["", "1\n"]).prop_map(String::from);
    prop_oneof![
        Just(Outcome::CompilerCrash { message: "ice".into() }),
        out.clone().prop_map(|stdout| Outcome::RuntimeError {
            code: DiagnosticCode::VmAbort,
            stdout
        }),
        out.prop_map(|stdout| Outcome::Timeout { stdout }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn or_monotonicity(
        t0 in outcome(),
        t1 in outcome(),
        b in prop::collection::vec(expectation(), 1..6),
        mask in prop::collection::vec(any::<bool>(), 6),
    ) {
        let a: Vec<_> = b.iter().zip(&mask).filter(|(_, k)| **k).map(|(e, _)| *e).collect();
        if check_expectation(&a, &t0, &t1).is_pass() {
            prop_assert!(check_expectation(&b, &t0, &t1).is_pass());
        }
    }

    #[test]
    fn crashes_fail_every_list(
        t0 in outcome(),
        t1 in crash(),
        list in prop::collection::vec(expectation(), 0..6),
    ) {
        prop_assert_eq!(check_expectation(&list, &t0, &t1), Verdict::Fail);
        prop_assert_eq!(check_expectation(&list, &t1, &t1), Verdict::Fail);
    }

    #[test]
    fn pass_records_the_first_match(t0 in outcome(), t1 in outcome(), list in prop::collection::vec(expectation(), 1..6)) {
        match check_expectation(&list, &t0, &t1) {
            Verdict::Pass { matched } => {
                let first = list.iter().position(|e| e.matches(&t0, &t1)).unwrap();
                prop_assert_eq!(list[first], matched);
            }
            _ => prop_assert!(list.iter().all(|e| !e.matches(&t0, &t1))),
        }
    }
}

#[test]
fn crash_fails_each_single_expectation() {
    let all = [
        Expectation::Compilable,
        Expectation::CompileError(None),
        Expectation::Executable,
        Expectation::RuntimeError(None),
        Expectation::RuntimeError(Some(DiagnosticCode::VmAbort)),
        Expectation::Equiv,
    ];
    let crash = Outcome::CompilerCrash { message: "x".into() };
    for e in all {
        assert_eq!(check_expectation(&[e], &crash, &crash), Verdict::Fail, "{e}");
    }
}
