//! A small class-based language with a checker, a bytecode compiler and VM,
//! and a reference interpreter.
//!
//! The compiler carries seven optional planted defects (see [`defects`]).

pub mod ast;
pub mod bytecode;
pub mod checker;
pub mod compiler;
pub mod defects;
pub mod diag;
pub mod interp;
pub mod lexer;
pub mod outcome;
pub mod parser;
pub mod pipeline;
pub mod printer;
pub mod types;
pub mod vm;

pub use ast::{AstNode, NodeId, NodeKind, Program};
pub use defects::{DefectId, DefectSet};
pub use diag::{Diagnostic, DiagnosticCode, Span};
pub use outcome::Outcome;
pub use pipeline::Pipeline;
pub use vm::Limits;
