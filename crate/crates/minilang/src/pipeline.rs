//! Source to [`Outcome`]: lex, parse, check, compile and run under a
//! configurable set of planted defects.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::ast::{AstNode, Program};
use crate::bytecode::Module;
use crate::checker;
use crate::compiler;
use crate::defects::{ConfigError, DefectId, DefectSet};
use crate::diag::{Diagnostic, DiagnosticCode, Span};
use crate::lexer::{self, TokenStream};
use crate::outcome::Outcome;
use crate::parser;
use crate::printer::{self, PrintOptions};
use crate::vm::{self, Limits};

#[derive(Debug, Default)]
pub struct Pipeline {
    pub defects: DefectSet,
    pub limits: Limits,
    compiles: AtomicUsize,
}

impl Clone for Pipeline {
    fn clone(&self) -> Self {
        Pipeline {
            defects: self.defects.clone(),
            limits: self.limits,
            compiles: AtomicUsize::new(self.compile_count()),
        }
    }
}

impl Pipeline {
    pub fn new(defects: DefectSet, limits: Limits) -> Self {
        Pipeline {
            defects,
            limits,
            compiles: AtomicUsize::new(0),
        }
    }

    /// The fixed compiler.
    pub fn clean() -> Self {
        Self::with_defects(DefectSet::none())
    }

    pub fn with_defects(defects: DefectSet) -> Self {
        Self::new(defects, Limits::default())
    }

    /// Parse a defect list such as `D1,D3`, `all` or `none`.
    pub fn from_defect_list(list: &str) -> Result<Self, ConfigError> {
        DefectSet::parse_list(list).map(Self::with_defects)
    }

    /// Number of programs compiled so far.
    pub fn compile_count(&self) -> usize {
        self.compiles.load(Ordering::Relaxed)
    }

    /// Check and compile. Errors are compile errors or a compiler crash.
    pub fn compile(&self, program: &Program) -> Result<Module, Outcome> {
        self.compiles.fetch_add(1, Ordering::Relaxed);
        let (analysis, diags) = checker::analyze(program, &self.defects);
        if !diags.is_empty() {
            return Err(Outcome::CompileError { diagnostics: diags });
        }
        compiler::compile(program, &analysis, &self.defects)
    }

    pub fn compile_source(&self, source: &str) -> Result<Module, Outcome> {
        let program = parse(source)?;
        self.compile(&program)
    }

    pub fn run(&self, program: &Program) -> Outcome {
        match self.compile(program) {
            Ok(module) => vm::run(&module, &self.limits),
            Err(outcome) => outcome,
        }
    }

    pub fn execute(&self, source: &str) -> Outcome {
        match parse(source) {
            Ok(program) => self.run(&program),
            Err(outcome) => outcome,
        }
    }

    /// Pretty-print a node with this compiler's printer.
    pub fn print(&self, node: &AstNode) -> TokenStream {
        printer::print_with(
            node,
            PrintOptions {
                spurious_field_braces: self.defects.has(DefectId::D3),
            },
        )
    }
}

fn parse(source: &str) -> Result<Program, Outcome> {
    let tokens = lexer::lex(source).map_err(Outcome::compile_error)?;
    parser::parse(&tokens).map_err(Outcome::compile_error)
}

/// Compile and run with the fixed compiler.
pub fn run(source: &str) -> Outcome {
    Pipeline::clean().execute(source)
}

/// Compile and run with the given defects.
pub fn run_with(source: &str, defects: &DefectSet) -> Outcome {
    Pipeline::with_defects(defects.clone()).execute(source)
}

/// Run the reference interpreter on source text.
pub fn interpret(source: &str) -> Outcome {
    match parse(source) {
        Ok(program) => crate::interp::interpret(&program),
        Err(outcome) => outcome,
    }
}

/// Diagnostic for an internal failure reported as a compile error.
pub fn internal_error(message: impl Into<String>) -> Diagnostic {
    Diagnostic::new(DiagnosticCode::Ice, message, Span::default())
}
