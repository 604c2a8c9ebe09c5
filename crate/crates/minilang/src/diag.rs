//! Coded diagnostics shared by every phase of the pipeline.
//!
//! Codes are stable and carry the phase they belong to; expectation matching
//! is always done on the code, never on the message text.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Lex,
    Parse,
    Check,
    Codegen,
    Runtime,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Lex => "lex",
            Phase::Parse => "parse",
            Phase::Check => "check",
            Phase::Codegen => "codegen",
            Phase::Runtime => "runtime",
        }
    }

    pub fn is_compile_time(self) -> bool {
        !matches!(self, Phase::Runtime)
    }
}

/// The closed catalog of diagnostic codes.
///
/// Correspondence with the error names used in compiler test literature:
/// `TypeMismatch` is an incompatible-type error, `CircularDep` a circular
/// dependency error, `Overflow` an arithmetic overflow error, `DivZero` a
/// division-by-zero error and `StackOverflow` a stack overflow error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticCode {
    #[serde(rename = "E_LEX")]
    Lex,
    #[serde(rename = "E_PARSE")]
    Parse,
    #[serde(rename = "E_TYPE_MISMATCH")]
    TypeMismatch,
    #[serde(rename = "E_CIRCULAR_DEP")]
    CircularDep,
    #[serde(rename = "E_DUP_MODIFIER")]
    DupModifier,
    #[serde(rename = "E_UNDEFINED_NAME")]
    UndefinedName,
    #[serde(rename = "E_INVALID_SUBSCRIPT")]
    InvalidSubscript,
    #[serde(rename = "ICE")]
    Ice,
    #[serde(rename = "R_DIV_ZERO")]
    DivZero,
    #[serde(rename = "R_OVERFLOW")]
    Overflow,
    #[serde(rename = "R_STACK_OVERFLOW")]
    StackOverflow,
    #[serde(rename = "R_VM_ABORT")]
    VmAbort,
}

impl DiagnosticCode {
    pub const ALL: [DiagnosticCode; 12] = [
        DiagnosticCode::Lex,
        DiagnosticCode::Parse,
        DiagnosticCode::TypeMismatch,
        DiagnosticCode::CircularDep,
        DiagnosticCode::DupModifier,
        DiagnosticCode::UndefinedName,
        DiagnosticCode::InvalidSubscript,
        DiagnosticCode::Ice,
        DiagnosticCode::DivZero,
        DiagnosticCode::Overflow,
        DiagnosticCode::StackOverflow,
        DiagnosticCode::VmAbort,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Lex => "E_LEX",
            DiagnosticCode::Parse => "E_PARSE",
            DiagnosticCode::TypeMismatch => "E_TYPE_MISMATCH",
            DiagnosticCode::CircularDep => "E_CIRCULAR_DEP",
            DiagnosticCode::DupModifier => "E_DUP_MODIFIER",
            DiagnosticCode::UndefinedName => "E_UNDEFINED_NAME",
            DiagnosticCode::InvalidSubscript => "E_INVALID_SUBSCRIPT",
            DiagnosticCode::Ice => "ICE",
            DiagnosticCode::DivZero => "R_DIV_ZERO",
            DiagnosticCode::Overflow => "R_OVERFLOW",
            DiagnosticCode::StackOverflow => "R_STACK_OVERFLOW",
            DiagnosticCode::VmAbort => "R_VM_ABORT",
        }
    }

    pub fn parse(s: &str) -> Option<DiagnosticCode> {
        DiagnosticCode::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Each code belongs to exactly one phase.
    pub fn phase(self) -> Phase {
        match self {
            DiagnosticCode::Lex => Phase::Lex,
            DiagnosticCode::Parse => Phase::Parse,
            DiagnosticCode::TypeMismatch
            | DiagnosticCode::CircularDep
            | DiagnosticCode::DupModifier
            | DiagnosticCode::UndefinedName
            | DiagnosticCode::InvalidSubscript => Phase::Check,
            DiagnosticCode::Ice => Phase::Codegen,
            DiagnosticCode::DivZero
            | DiagnosticCode::Overflow
            | DiagnosticCode::StackOverflow
            | DiagnosticCode::VmAbort => Phase::Runtime,
        }
    }

    pub fn is_compile_time(self) -> bool {
        self.phase().is_compile_time()
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>, span: Span) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Diagnostic { code, message, span }
    }

    pub fn phase(&self) -> Phase {
        self.code.phase()
    }

    /// `<phase>:<code>:<line>:<col>: <message>`, with 1-based line and column.
    pub fn render(&self, source: &str) -> String {
        let (line, col) = line_col(source, self.span.start);
        format!(
            "{}:{}:{}:{}: {}",
            self.phase().as_str(),
            self.code,
            line,
            col,
            self.message
        )
    }
}

/// 1-based line and column (in characters) of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let col = source[line_start..offset].chars().count() + 1;
    (line, col)
}
