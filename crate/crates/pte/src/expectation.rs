//! Expectations and verdicts.

use std::fmt;

use minilang::{DiagnosticCode, Outcome};
use serde::Serialize;

/// A contract on the outcome of a transformed program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// Compiles; running may still fail.
    Compilable,
    /// Rejected by the compiler, with the given code when present.
    CompileError(Option<DiagnosticCode>),
    /// Runs to completion.
    Executable,
    RuntimeError(Option<DiagnosticCode>),
    /// Same observable behavior as the original program.
    Equiv,
}

impl Expectation {
    /// Whether `t1` meets this expectation, given the original outcome `t0`.
    /// Compiler crashes, VM aborts and timeouts meet nothing.
    pub fn matches(&self, t0: &Outcome, t1: &Outcome) -> bool {
        if t1.is_crash_like() {
            return false;
        }
        match *self {
            Expectation::Compilable => !matches!(t1, Outcome::CompileError { .. }),
            Expectation::CompileError(code) => {
                matches!(t1, Outcome::CompileError { .. }) && code.is_none_or(|c| t1.codes().contains(&c))
            }
            Expectation::Executable => matches!(t1, Outcome::Ran { .. }),
            Expectation::RuntimeError(code) => match t1 {
                Outcome::RuntimeError { code: got, .. } => code.is_none_or(|c| c == *got),
                _ => false,
            },
            Expectation::Equiv => t0.same_behavior(t1),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Compilable => f.write_str("compilable"),
            Expectation::CompileError(None) => f.write_str("compile_error"),
            Expectation::CompileError(Some(c)) => write!(f, "compile_error({c})"),
            Expectation::Executable => f.write_str("executable"),
            Expectation::RuntimeError(None) => f.write_str("runtime_error"),
            Expectation::RuntimeError(Some(c)) => write!(f, "runtime_error({c})"),
            Expectation::Equiv => f.write_str("equiv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass {
        matched: Expectation,
    },
    Fail,
    Inapplicable,
    /// The rule produced an unusable program. An engine error, not a
    /// compiler failure.
    RuleError {
        message: String,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail)
    }

    pub fn is_rule_error(&self) -> bool {
        matches!(self, Verdict::RuleError { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass { .. } => "pass",
            Verdict::Fail => "fail",
            Verdict::Inapplicable => "inapplicable",
            Verdict::RuleError { .. } => "rule_error",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass { matched } => write!(f, "pass({matched})"),
            Verdict::RuleError { message } => write!(f, "rule_error: {message}"),
            other => f.write_str(other.label()),
        }
    }
}

/// Pass with the first expectation in declared order that `t1` meets,
/// otherwise Fail.
pub fn check_expectation(expectations: &[Expectation], t0: &Outcome, t1: &Outcome) -> Verdict {
    expectations
        .iter()
        .find(|e| e.matches(t0, t1))
        .map_or(Verdict::Fail, |&matched| Verdict::Pass { matched })
}
