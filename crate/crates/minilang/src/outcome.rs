//! The observable result of compiling and running one program.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, DiagnosticCode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    CompileError {
        diagnostics: Vec<Diagnostic>,
    },
    /// The compiler itself failed. Distinct from a compile error.
    CompilerCrash {
        message: String,
    },
    Ran {
        stdout: String,
        exit: i64,
    },
    RuntimeError {
        code: DiagnosticCode,
        stdout: String,
    },
    Timeout {
        stdout: String,
    },
}

/// The part of an outcome that two runs are compared on: the variant, the
/// captured stdout, and the exit value or diagnostic codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observation {
    CompileError(BTreeSet<DiagnosticCode>),
    CompilerCrash,
    Ran(String, i64),
    RuntimeError(DiagnosticCode, String),
    Timeout(String),
}

impl Outcome {
    pub fn compile_error(d: Diagnostic) -> Self {
        Outcome::CompileError { diagnostics: vec![d] }
    }

    pub fn observation(&self) -> Observation {
        match self {
            Outcome::CompileError { diagnostics } => {
                Observation::CompileError(diagnostics.iter().map(|d| d.code).collect())
            }
            Outcome::CompilerCrash { .. } => Observation::CompilerCrash,
            Outcome::Ran { stdout, exit } => Observation::Ran(stdout.clone(), *exit),
            Outcome::RuntimeError { code, stdout } => Observation::RuntimeError(*code, stdout.clone()),
            Outcome::Timeout { stdout } => Observation::Timeout(stdout.clone()),
        }
    }

    /// Same variant, stdout and exit value or codes.
    pub fn same_behavior(&self, other: &Outcome) -> bool {
        self.observation() == other.observation()
    }

    pub fn codes(&self) -> BTreeSet<DiagnosticCode> {
        match self {
            Outcome::CompileError { diagnostics } => diagnostics.iter().map(|d| d.code).collect(),
            Outcome::RuntimeError { code, .. } => [*code].into_iter().collect(),
            _ => BTreeSet::new(),
        }
    }

    pub fn stdout(&self) -> &str {
        match self {
            Outcome::Ran { stdout, .. } | Outcome::RuntimeError { stdout, .. } | Outcome::Timeout { stdout } => stdout,
            _ => "",
        }
    }

    /// Crashes of the compiler or the VM, and timeouts.
    pub fn is_crash_like(&self) -> bool {
        matches!(
            self,
            Outcome::CompilerCrash { .. }
                | Outcome::Timeout { .. }
                | Outcome::RuntimeError {
                    code: DiagnosticCode::VmAbort,
                    ..
                }
        )
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            Outcome::CompileError { .. } => "compile_error",
            Outcome::CompilerCrash { .. } => "compiler_crash",
            Outcome::Ran { .. } => "ran",
            Outcome::RuntimeError { .. } => "runtime_error",
            Outcome::Timeout { .. } => "timeout",
        }
    }

    /// One-line summary, e.g. `ran(exit=0)` or `compile_error(E_PARSE)`.
    pub fn summary(&self) -> String {
        match self {
            Outcome::CompileError { .. } => {
                let codes: Vec<_> = self.codes().iter().map(|c| c.as_str()).collect();
                format!("compile_error({})", codes.join(","))
            }
            Outcome::CompilerCrash { message } => format!("compiler_crash({message})"),
            Outcome::Ran { exit, .. } => format!("ran(exit={exit})"),
            Outcome::RuntimeError { code, .. } => format!("runtime_error({code})"),
            Outcome::Timeout { .. } => "timeout".to_string(),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}
