//! Canonical pretty-printer: AST back to tokens.
//!
//! Layout is fixed: four-space indentation, a newline after `;`, `{` and `}`,
//! single spaces elsewhere except inside calls, member accesses, type
//! annotations and around unary operators.

use crate::ast::{AstNode, BinOp, Lit, NodeKind};
use crate::diag::Span;
use crate::lexer::{self, Token, TokenKind, TokenStream, KEYWORDS};

/// Printer behavior switches. The default prints correctly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrintOptions {
    /// Emit a spurious `{}` after a field declaration without initializer.
    pub spurious_field_braces: bool,
}

pub fn print(node: &AstNode) -> TokenStream {
    print_with(node, PrintOptions::default())
}

pub fn print_with(node: &AstNode, opts: PrintOptions) -> TokenStream {
    let mut p = Printer {
        e: Emitter::default(),
        opts,
    };
    p.top(node);
    p.e.finish()
}

/// Print to text.
pub fn to_source(node: &AstNode) -> String {
    print(node).source
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sep {
    None,
    Space,
    Newline,
}

struct Emitter {
    out: String,
    tokens: Vec<Token>,
    indent: usize,
    pending: Sep,
}

impl Default for Emitter {
    fn default() -> Self {
        Emitter {
            out: String::new(),
            tokens: Vec::new(),
            indent: 0,
            pending: Sep::None,
        }
    }
}

impl Emitter {
    fn tok(&mut self, text: &str) {
        if !self.out.is_empty() {
            match self.pending {
                Sep::None => {}
                Sep::Space => self.out.push(' '),
                Sep::Newline => {
                    self.out.push('\n');
                    for _ in 0..self.indent {
                        self.out.push_str("    ");
                    }
                }
            }
        }
        let start = self.out.len();
        self.out.push_str(text);
        self.tokens.push(Token {
            kind: classify(text),
            text: text.to_string(),
            span: Span::new(start, self.out.len()),
        });
        self.pending = Sep::Space;
    }

    fn glue(&mut self) {
        self.pending = Sep::None;
    }

    fn newline(&mut self) {
        self.pending = Sep::Newline;
    }

    fn open(&mut self) {
        self.tok("{");
        self.indent += 1;
        self.newline();
    }

    fn close(&mut self) {
        self.indent = self.indent.saturating_sub(1);
        self.newline();
        self.tok("}");
        self.newline();
    }

    fn semi(&mut self) {
        self.glue();
        self.tok(";");
        self.newline();
    }

    fn finish(mut self) -> TokenStream {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        let end = self.out.len();
        self.tokens.push(Token {
            kind: TokenKind::Eof,
            text: String::new(),
            span: Span::new(end, end),
        });
        TokenStream {
            tokens: self.tokens,
            source: self.out,
        }
    }
}

fn classify(text: &str) -> TokenKind {
    let first = text.as_bytes()[0];
    if first == b'"' {
        TokenKind::StringLiteral
    } else if first.is_ascii_digit() {
        TokenKind::IntLiteral
    } else if first.is_ascii_alphabetic() || first == b'_' {
        if KEYWORDS.contains(&text) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        }
    } else if matches!(text, "(" | ")" | "{" | "}" | "," | ";" | ":" | ".") {
        TokenKind::Punctuation
    } else {
        TokenKind::Operator
    }
}

struct Printer {
    e: Emitter,
    opts: PrintOptions,
}

impl Printer {
    /// Print a standalone node; statement kinds carry their `;`.
    fn top(&mut self, n: &AstNode) {
        match n.kind {
            NodeKind::Program => {
                for item in &n.children {
                    self.item(item);
                }
            }
            NodeKind::ClassDecl | NodeKind::FuncDecl => self.item(n),
            NodeKind::FieldDecl | NodeKind::CtorDecl | NodeKind::MethodDecl => self.member(n),
            NodeKind::VarDecl
            | NodeKind::AssignExpr
            | NodeKind::WhileStmt
            | NodeKind::ReturnStmt
            | NodeKind::PrintStmt => self.stmt(n),
            NodeKind::Block => self.block(n),
            NodeKind::Param => self.param(n),
            NodeKind::ModifierList => self.modifiers(n),
            NodeKind::TypeRef => self.e.tok(n.name().unwrap_or("")),
            _ => self.expr(n),
        }
    }

    fn item(&mut self, n: &AstNode) {
        match n.kind {
            NodeKind::ClassDecl => {
                self.modifiers(&n.children[0]);
                self.e.tok("class");
                self.e.tok(n.name().unwrap_or(""));
                if let Some(sup) = n.superclass() {
                    self.e.tok("<:");
                    self.e.tok(sup);
                }
                self.e.open();
                for m in n.members() {
                    self.member(m);
                }
                self.e.close();
            }
            NodeKind::FuncDecl => {
                let name = n.name().unwrap_or("");
                if name != "main" {
                    self.e.tok("func");
                }
                self.e.tok(name);
                self.signature(n);
            }
            NodeKind::VarDecl => self.stmt(n),
            _ => self.top(n),
        }
    }

    fn member(&mut self, n: &AstNode) {
        match n.kind {
            NodeKind::FieldDecl => {
                self.modifiers(&n.children[0]);
                self.binding(n);
                if self.opts.spurious_field_braces && n.initializer().is_none() {
                    self.e.tok("{");
                    self.e.glue();
                    self.e.tok("}");
                }
                self.e.semi();
            }
            NodeKind::CtorDecl => {
                self.modifiers(&n.children[0]);
                self.e.tok("init");
                self.signature(n);
            }
            NodeKind::MethodDecl => {
                self.modifiers(&n.children[0]);
                self.e.tok("func");
                self.e.tok(n.name().unwrap_or(""));
                self.signature(n);
            }
            _ => self.top(n),
        }
    }

    /// `(params) [: T] block` for functions, methods and constructors.
    fn signature(&mut self, n: &AstNode) {
        self.e.glue();
        self.e.tok("(");
        self.e.glue();
        for (i, p) in n.params().enumerate() {
            if i > 0 {
                self.e.glue();
                self.e.tok(",");
            }
            self.param(p);
        }
        self.e.glue();
        self.e.tok(")");
        if n.kind != NodeKind::CtorDecl {
            if let Some(t) = n.type_ann() {
                self.e.glue();
                self.e.tok(":");
                self.e.tok(t.name().unwrap_or(""));
            }
        }
        if let Some(b) = n.body() {
            self.block(b);
        }
    }

    fn param(&mut self, p: &AstNode) {
        self.e.tok(p.name().unwrap_or(""));
        self.e.glue();
        self.e.tok(":");
        self.e.tok(p.type_ann().and_then(|t| t.name()).unwrap_or(""));
    }

    fn modifiers(&mut self, n: &AstNode) {
        for m in n.modifier_list() {
            self.e.tok(m.as_str());
        }
    }

    /// `let|var name [: T] [= e]` shared by fields and variables.
    fn binding(&mut self, n: &AstNode) {
        self.e.tok(if n.is_mutable() { "var" } else { "let" });
        self.e.tok(n.name().unwrap_or(""));
        if let Some(t) = n.type_ann() {
            self.e.glue();
            self.e.tok(":");
            self.e.tok(t.name().unwrap_or(""));
        }
        if let Some(init) = n.initializer() {
            self.e.tok("=");
            self.expr(init);
        }
    }

    fn block(&mut self, b: &AstNode) {
        self.e.open();
        for s in b.stmts() {
            self.stmt(s);
        }
        if let Some(t) = b.tail() {
            self.expr(t);
        }
        self.e.close();
    }

    fn stmt(&mut self, s: &AstNode) {
        match s.kind {
            NodeKind::VarDecl => {
                self.binding(s);
                self.e.semi();
            }
            NodeKind::AssignExpr => {
                self.expr(&s.children[0]);
                self.e.tok("=");
                self.expr(&s.children[1]);
                self.e.semi();
            }
            NodeKind::WhileStmt => {
                self.e.tok("while");
                self.e.tok("(");
                self.e.glue();
                self.expr(&s.children[0]);
                self.e.glue();
                self.e.tok(")");
                self.block(&s.children[1]);
            }
            NodeKind::ReturnStmt => {
                self.e.tok("return");
                if let Some(v) = s.children.first() {
                    self.expr(v);
                }
                self.e.semi();
            }
            NodeKind::PrintStmt => {
                self.e.tok("println");
                self.e.glue();
                self.e.tok("(");
                self.e.glue();
                self.expr(&s.children[0]);
                self.e.glue();
                self.e.tok(")");
                self.e.semi();
            }
            _ => {
                self.expr(s);
                self.e.semi();
            }
        }
    }

    fn expr(&mut self, n: &AstNode) {
        match n.kind {
            NodeKind::Literal => match n.literal() {
                Some(Lit::Int(v)) => {
                    if *v < 0 {
                        self.e.tok("-");
                        self.e.glue();
                    }
                    self.e.tok(&v.unsigned_abs().to_string());
                }
                Some(Lit::Bool(b)) => self.e.tok(if *b { "true" } else { "false" }),
                Some(Lit::Str(s)) => self.e.tok(&lexer::escape(s)),
                None => {}
            },
            NodeKind::NameRef => self.e.tok(n.name().unwrap_or("")),
            NodeKind::ThisExpr => self.e.tok("this"),
            NodeKind::CallExpr => {
                self.e.tok(n.name().unwrap_or(""));
                self.args(n.args());
            }
            NodeKind::MethodCallExpr => {
                self.receiver(&n.children[0]);
                self.e.glue();
                self.e.tok(".");
                self.e.glue();
                self.e.tok(n.name().unwrap_or(""));
                self.args(n.args());
            }
            NodeKind::MemberExpr => {
                self.receiver(&n.children[0]);
                self.e.glue();
                self.e.tok(".");
                self.e.glue();
                self.e.tok(n.name().unwrap_or(""));
            }
            NodeKind::UnaryExpr => {
                self.e.tok(n.un_op().map_or("", |o| o.as_str()));
                self.e.glue();
                let operand = &n.children[0];
                self.maybe_paren(operand, matches!(operand.kind, NodeKind::BinaryExpr | NodeKind::IfExpr));
            }
            NodeKind::BinaryExpr => {
                let op = n.bin_op().unwrap_or(BinOp::Add);
                let (l, r) = (&n.children[0], &n.children[1]);
                self.maybe_paren(l, needs_paren(l, op, false));
                self.e.tok(op.as_str());
                self.maybe_paren(r, needs_paren(r, op, true));
            }
            NodeKind::IfExpr => {
                self.e.tok("if");
                self.e.tok("(");
                self.e.glue();
                self.expr(&n.children[0]);
                self.e.glue();
                self.e.tok(")");
                self.block(&n.children[1]);
                if let Some(alt) = n.children.get(2) {
                    self.e.pending = Sep::Space;
                    self.e.tok("else");
                    if alt.kind == NodeKind::IfExpr {
                        self.expr(alt);
                    } else {
                        self.block(alt);
                    }
                }
            }
            _ => self.top(n),
        }
        if n.kind == NodeKind::IfExpr {
            // A following `;`, `)` or `,` stays on the closing-brace line.
            self.e.pending = Sep::Space;
        }
    }

    fn receiver(&mut self, r: &AstNode) {
        self.maybe_paren(
            r,
            matches!(r.kind, NodeKind::BinaryExpr | NodeKind::UnaryExpr | NodeKind::IfExpr)
                || r.int_literal().is_some_and(|v| v < 0),
        );
    }

    fn maybe_paren(&mut self, n: &AstNode, paren: bool) {
        if paren {
            self.e.tok("(");
            self.e.glue();
            self.expr(n);
            self.e.glue();
            self.e.tok(")");
        } else {
            self.expr(n);
        }
    }

    fn args(&mut self, args: &[AstNode]) {
        self.e.glue();
        self.e.tok("(");
        self.e.glue();
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.e.glue();
                self.e.tok(",");
            }
            self.expr(a);
        }
        self.e.glue();
        self.e.tok(")");
    }
}

fn needs_paren(child: &AstNode, parent: BinOp, right: bool) -> bool {
    match child.kind {
        NodeKind::IfExpr => true,
        NodeKind::BinaryExpr => {
            let p = child.bin_op().map_or(0, BinOp::precedence);
            p < parent.precedence() || (right && p == parent.precedence())
        }
        _ => false,
    }
}
