//! Recursive-descent parser. The grammar is documented in
//! `docs/minilang-grammar`.

use crate::ast::{AstNode, Attr, BinOp, Lit, Modifier, NodeId, NodeKind, Program, UnOp};
use crate::diag::{Diagnostic, DiagnosticCode, Span};
use crate::lexer::{self, Token, TokenKind, TokenStream};

/// Syntactic category accepted by [`parse_fragment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentKind {
    Expr,
    Stmt,
    /// A top-level item: class, function or global variable.
    Decl,
    /// A class member: field, constructor or method.
    Member,
}

/// The fragment parser responsible for each node kind.
pub fn fragment_kind_of(kind: NodeKind) -> Option<FragmentKind> {
    use NodeKind::*;
    match kind {
        IfExpr | CallExpr | MethodCallExpr | MemberExpr | BinaryExpr | UnaryExpr | Literal | NameRef | ThisExpr => {
            Some(FragmentKind::Expr)
        }
        VarDecl | AssignExpr | WhileStmt | ReturnStmt | PrintStmt => Some(FragmentKind::Stmt),
        ClassDecl | FuncDecl => Some(FragmentKind::Decl),
        FieldDecl | MethodDecl | CtorDecl => Some(FragmentKind::Member),
        Program | Param | Block | ModifierList | TypeRef => None,
    }
}

pub fn parse(tokens: &TokenStream) -> Result<Program, Diagnostic> {
    let mut p = Parser::new(&tokens.tokens);
    let mut items = Vec::new();
    while !p.at_eof() {
        items.push(p.item()?);
    }
    let mut root = AstNode::new(NodeKind::Program, Attr::None, items);
    root.span = Span::new(0, tokens.source.len());
    number(&mut root);
    Ok(Program {
        root,
        source: tokens.source.clone(),
    })
}

/// Lex and parse in one step.
pub fn parse_source(source: &str) -> Result<Program, Diagnostic> {
    parse(&lexer::lex(source)?)
}

/// Parse exactly one node of the given category, consuming every token. A
/// trailing `;` may be omitted.
pub fn parse_fragment(tokens: &TokenStream, kind: FragmentKind) -> Result<AstNode, Diagnostic> {
    let mut p = Parser::new(&tokens.tokens);
    let mut node = match kind {
        FragmentKind::Expr => p.expr()?,
        FragmentKind::Stmt => p.stmt_fragment()?,
        FragmentKind::Decl => p.item()?,
        FragmentKind::Member => p.member()?,
    };
    if !p.at_eof() {
        return Err(p.unexpected());
    }
    number(&mut node);
    Ok(node)
}

/// Parse a fragment that must produce a node of exactly `kind`.
pub fn parse_node(tokens: &TokenStream, kind: NodeKind) -> Result<AstNode, Diagnostic> {
    let Some(fk) = fragment_kind_of(kind) else {
        return Err(Diagnostic::new(
            DiagnosticCode::Parse,
            format!("{kind} is not fragment-parsable"),
            Span::default(),
        ));
    };
    let node = parse_fragment(tokens, fk)?;
    if node.kind != kind {
        return Err(Diagnostic::new(
            DiagnosticCode::Parse,
            format!("expected {kind}, found {}", node.kind),
            node.span,
        ));
    }
    Ok(node)
}

/// Assign preorder ids starting at 1.
fn number(root: &mut AstNode) {
    fn go(n: &mut AstNode, next: &mut u32) {
        n.id = NodeId(*next);
        *next += 1;
        for c in &mut n.children {
            go(c, next);
        }
    }
    let mut next = 1;
    go(root, &mut next);
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

type PResult = Result<AstNode, Diagnostic>;

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token]) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> &Token {
        let i = self.pos.min(self.tokens.len() - 1);
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        &self.tokens[i]
    }

    fn start(&self) -> usize {
        self.peek().span.start
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.tokens[self.pos - 1].span.end
        }
    }

    fn finish(&self, mut node: AstNode, start: usize) -> AstNode {
        node.span = Span::new(start, self.prev_end().max(start));
        node
    }

    fn unexpected(&self) -> Diagnostic {
        let t = self.peek();
        let what = if t.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("'{}'", t.text)
        };
        Diagnostic::new(DiagnosticCode::Parse, format!("unexpected {what}"), t.span)
    }

    fn is_punct(&self, p: &str) -> bool {
        self.peek().is_punct(p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.peek().is_keyword(kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), Diagnostic> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), Diagnostic> {
        if self.is_kw(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn ident(&mut self) -> Result<String, Diagnostic> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.bump().text.clone())
        } else {
            Err(self.unexpected())
        }
    }

    fn modifiers(&mut self) -> AstNode {
        let start = self.start();
        let mut mods = Vec::new();
        while self.peek().kind == TokenKind::Keyword {
            match Modifier::parse(&self.peek().text) {
                Some(m) => {
                    mods.push(m);
                    self.pos += 1;
                }
                None => break,
            }
        }
        let node = AstNode::modifiers(mods);
        if self.pos > 0 && self.start() > start {
            self.finish(node, start)
        } else {
            let mut node = node;
            node.span = Span::new(start, start);
            node
        }
    }

    fn item(&mut self) -> PResult {
        let start = self.start();
        if self.is_kw("func") || self.is_main() {
            return self.func_decl();
        }
        if self.is_kw("let") || self.is_kw("var") {
            let node = self.var_decl()?;
            self.expect_or_end(";")?;
            return Ok(self.finish(node, start));
        }
        let mods = self.modifiers();
        if self.is_kw("class") {
            return self.class_decl(mods, start);
        }
        Err(self.unexpected())
    }

    fn is_main(&self) -> bool {
        self.peek().is(TokenKind::Identifier, "main") && self.peek_at(1).is_punct("(")
    }

    /// Expect `p`, but tolerate its absence at end of input (fragments).
    fn expect_or_end(&mut self, p: &str) -> Result<(), Diagnostic> {
        if self.at_eof() {
            return Ok(());
        }
        self.expect_punct(p)
    }

    fn class_decl(&mut self, mods: AstNode, start: usize) -> PResult {
        self.expect_kw("class")?;
        let name = self.ident()?;
        let superclass = if self.eat_punct("<:") {
            Some(self.ident()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut children = vec![mods];
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.unexpected());
            }
            children.push(self.member()?);
        }
        self.expect_punct("}")?;
        let node = AstNode::new(NodeKind::ClassDecl, Attr::Class { name, superclass }, children);
        Ok(self.finish(node, start))
    }

    fn member(&mut self) -> PResult {
        let start = self.start();
        let mods = self.modifiers();
        if self.is_kw("let") || self.is_kw("var") {
            let mutable = self.bump().text == "var";
            let name = self.ident()?;
            let mut children = vec![mods];
            if self.eat_punct(":") {
                children.push(self.type_ref()?);
            }
            if self.eat_punct("=") {
                children.push(self.expr()?);
            }
            self.expect_or_end(";")?;
            let node = AstNode::new(NodeKind::FieldDecl, Attr::Binding { name, mutable }, children);
            return Ok(self.finish(node, start));
        }
        if self.is_kw("init") {
            self.pos += 1;
            let mut children = vec![mods];
            children.extend(self.params()?);
            children.push(self.block()?);
            let node = AstNode::new(NodeKind::CtorDecl, Attr::None, children);
            return Ok(self.finish(node, start));
        }
        if self.is_kw("func") {
            self.pos += 1;
            let name = self.ident()?;
            let mut children = vec![mods];
            children.extend(self.params()?);
            if self.eat_punct(":") {
                children.push(self.type_ref()?);
            }
            children.push(self.block()?);
            let node = AstNode::new(NodeKind::MethodDecl, Attr::Name(name), children);
            return Ok(self.finish(node, start));
        }
        Err(self.unexpected())
    }

    fn func_decl(&mut self) -> PResult {
        let start = self.start();
        if self.is_kw("func") {
            self.pos += 1;
        }
        let name = self.ident()?;
        let mut children = self.params()?;
        if self.eat_punct(":") {
            children.push(self.type_ref()?);
        }
        children.push(self.block()?);
        let node = AstNode::new(NodeKind::FuncDecl, Attr::Name(name), children);
        Ok(self.finish(node, start))
    }

    fn params(&mut self) -> Result<Vec<AstNode>, Diagnostic> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if !self.is_punct(")") {
            loop {
                let start = self.start();
                let name = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.type_ref()?;
                let node = AstNode::new(NodeKind::Param, Attr::Name(name), vec![ty]);
                out.push(self.finish(node, start));
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(out)
    }

    fn type_ref(&mut self) -> PResult {
        let start = self.start();
        let name = self.ident()?;
        Ok(self.finish(AstNode::type_ref(&name), start))
    }

    /// `let|var name [: T] [= e]` without the terminating `;`.
    fn var_decl(&mut self) -> PResult {
        let start = self.start();
        let mutable = self.bump().text == "var";
        let name = self.ident()?;
        let mut children = Vec::new();
        if self.eat_punct(":") {
            children.push(self.type_ref()?);
        }
        if self.eat_punct("=") {
            children.push(self.expr()?);
        }
        let node = AstNode::new(NodeKind::VarDecl, Attr::Binding { name, mutable }, children);
        Ok(self.finish(node, start))
    }

    fn block(&mut self) -> PResult {
        let start = self.start();
        self.expect_punct("{")?;
        let mut children = Vec::new();
        let mut has_tail = false;
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.unexpected());
            }
            let (node, is_tail) = self.stmt(false)?;
            children.push(node);
            if is_tail {
                has_tail = true;
                break;
            }
        }
        self.expect_punct("}")?;
        let node = AstNode::block(children, has_tail);
        Ok(self.finish(node, start))
    }

    /// Parse one statement. Returns the node and whether it is a block tail
    /// (an expression directly followed by `}`).
    fn stmt(&mut self, fragment: bool) -> Result<(AstNode, bool), Diagnostic> {
        let start = self.start();
        let terminate = |p: &mut Self| -> Result<(), Diagnostic> {
            if fragment {
                p.expect_or_end(";")
            } else {
                p.expect_punct(";")
            }
        };
        if self.is_kw("let") || self.is_kw("var") {
            let node = self.var_decl()?;
            terminate(self)?;
            return Ok((self.finish(node, start), false));
        }
        if self.is_kw("while") {
            self.pos += 1;
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            self.eat_punct(";");
            let node = AstNode::new(NodeKind::WhileStmt, Attr::None, vec![cond, body]);
            return Ok((self.finish(node, start), false));
        }
        if self.is_kw("return") {
            self.pos += 1;
            let mut children = Vec::new();
            if !self.is_punct(";") && !self.is_punct("}") && !self.at_eof() {
                children.push(self.expr()?);
            }
            terminate(self)?;
            let node = AstNode::new(NodeKind::ReturnStmt, Attr::None, children);
            return Ok((self.finish(node, start), false));
        }
        if self.is_kw("println") {
            self.pos += 1;
            self.expect_punct("(")?;
            let value = self.expr()?;
            self.expect_punct(")")?;
            terminate(self)?;
            let node = AstNode::new(NodeKind::PrintStmt, Attr::None, vec![value]);
            return Ok((self.finish(node, start), false));
        }
        if self.is_kw("if") {
            let node = self.if_expr()?;
            if self.is_punct("}") {
                return Ok((node, true));
            }
            self.eat_punct(";");
            return Ok((node, false));
        }
        let e = self.expr()?;
        if self.is_punct("=") {
            if !matches!(e.kind, NodeKind::NameRef | NodeKind::MemberExpr) {
                return Err(self.unexpected());
            }
            self.pos += 1;
            let value = self.expr()?;
            terminate(self)?;
            let node = AstNode::assign(e, value);
            return Ok((self.finish(node, start), false));
        }
        if !fragment && self.is_punct("}") {
            return Ok((e, true));
        }
        terminate(self)?;
        Ok((e, false))
    }

    fn stmt_fragment(&mut self) -> PResult {
        Ok(self.stmt(true)?.0)
    }

    fn expr(&mut self) -> PResult {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult {
        let start = self.start();
        let mut lhs = self.unary()?;
        loop {
            let tok = self.peek();
            if tok.kind != TokenKind::Operator {
                break;
            }
            let Some(op) = BinOp::from_symbol(&tok.text) else {
                break;
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = self.finish(AstNode::binary(op, lhs, rhs), start);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult {
        let start = self.start();
        let op = if self.is_punct("-") {
            Some(UnOp::Neg)
        } else if self.is_punct("!") {
            Some(UnOp::Not)
        } else {
            None
        };
        let Some(op) = op else {
            return self.postfix();
        };
        self.pos += 1;
        let operand = self.unary()?;
        if op == UnOp::Neg {
            if let Some(v) = operand.int_literal() {
                return Ok(self.finish(AstNode::int(-v), start));
            }
        }
        let node = AstNode::new(NodeKind::UnaryExpr, Attr::Unary(op), vec![operand]);
        Ok(self.finish(node, start))
    }

    fn postfix(&mut self) -> PResult {
        let start = self.start();
        let mut e = self.primary()?;
        while self.eat_punct(".") {
            let name = self.ident()?;
            if self.is_punct("(") {
                let mut children = vec![e];
                children.extend(self.args()?);
                e = self.finish(
                    AstNode::new(NodeKind::MethodCallExpr, Attr::Name(name), children),
                    start,
                );
            } else {
                e = self.finish(AstNode::new(NodeKind::MemberExpr, Attr::Name(name), vec![e]), start);
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> Result<Vec<AstNode>, Diagnostic> {
        self.expect_punct("(")?;
        let mut out = Vec::new();
        if !self.is_punct(")") {
            loop {
                out.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(out)
    }

    fn primary(&mut self) -> PResult {
        let start = self.start();
        let tok = self.peek().clone();
        match tok.kind {
            TokenKind::IntLiteral => {
                self.pos += 1;
                let v: i128 = tok
                    .text
                    .parse()
                    .map_err(|_| Diagnostic::new(DiagnosticCode::Parse, "integer literal too large", tok.span))?;
                Ok(self.finish(AstNode::int(v), start))
            }
            TokenKind::StringLiteral => {
                self.pos += 1;
                let lit = AstNode::leaf(NodeKind::Literal, Attr::Lit(Lit::Str(lexer::unescape(&tok.text))));
                Ok(self.finish(lit, start))
            }
            TokenKind::Keyword if tok.text == "true" || tok.text == "false" => {
                self.pos += 1;
                let lit = AstNode::leaf(NodeKind::Literal, Attr::Lit(Lit::Bool(tok.text == "true")));
                Ok(self.finish(lit, start))
            }
            TokenKind::Keyword if tok.text == "this" => {
                self.pos += 1;
                Ok(self.finish(AstNode::leaf(NodeKind::ThisExpr, Attr::None), start))
            }
            TokenKind::Keyword if tok.text == "if" => self.if_expr(),
            TokenKind::Identifier => {
                self.pos += 1;
                if self.is_punct("(") {
                    let args = self.args()?;
                    let node = AstNode::new(NodeKind::CallExpr, Attr::Name(tok.text), args);
                    Ok(self.finish(node, start))
                } else {
                    Ok(self.finish(AstNode::name_ref(&tok.text), start))
                }
            }
            TokenKind::Punctuation if tok.text == "(" => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn if_expr(&mut self) -> PResult {
        let start = self.start();
        self.expect_kw("if")?;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then = self.block()?;
        let mut children = vec![cond, then];
        if self.is_kw("else") {
            self.pos += 1;
            if self.is_kw("if") {
                children.push(self.if_expr()?);
            } else {
                children.push(self.block()?);
            }
        }
        let node = AstNode::new(NodeKind::IfExpr, Attr::None, children);
        Ok(self.finish(node, start))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::visit;

    fn p(src: &str) -> Program {
        parse_source(src).unwrap_or_else(|d| panic!("{}", d.render(src)))
    }

    #[test]
    fn var_with_if_initializer() {
        let prog = p("let r = if (num > 0) { 1 } else { 0 };");
        let decl = &prog.items()[0];
        assert_eq!(decl.kind, NodeKind::VarDecl);
        assert_eq!(decl.initializer().unwrap().kind, NodeKind::IfExpr);
    }

    #[test]
    fn duplicate_classes_parse() {
        let prog = p("class C {}\nclass C {}");
        assert_eq!(prog.classes().count(), 2);
    }

    #[test]
    fn missing_name_is_parse_error_at_equals() {
        let src = "let = 5;";
        let err = parse_source(src).unwrap_err();
        assert_eq!(err.code, DiagnosticCode::Parse);
        assert_eq!(err.span, Span::new(4, 5));
    }

    #[test]
    fn count_nodes_of_single_declaration() {
        let prog = p("let x = 1;");
        let mut n = 0;
        visit(&prog.root, &mut |_| n += 1);
        assert_eq!(n, 3);
    }

    #[test]
    fn fragments() {
        let ts = lexer::lex("if (true) { 1 } else { 1 }").unwrap();
        assert_eq!(parse_fragment(&ts, FragmentKind::Expr).unwrap().kind, NodeKind::IfExpr);
        let ts = lexer::lex("8").unwrap();
        assert_eq!(parse_fragment(&ts, FragmentKind::Expr).unwrap().kind, NodeKind::Literal);
        let ts = lexer::lex("let x").unwrap();
        let err = parse_fragment(&ts, FragmentKind::Expr).unwrap_err();
        assert_eq!(err.code, DiagnosticCode::Parse);
        let ts = lexer::lex("var a: Int64").unwrap();
        assert_eq!(parse_node(&ts, NodeKind::FieldDecl).unwrap().kind, NodeKind::FieldDecl);
        assert_eq!(parse_node(&ts, NodeKind::VarDecl).unwrap().kind, NodeKind::VarDecl);
    }

    #[test]
    fn block_tail_and_statements() {
        let prog = p("main(): Int64 { var x = 1; x = x + 2; if (x > 2) { println(x); } x }");
        let main = prog.main().unwrap();
        let body = main.body().unwrap();
        assert!(body.has_tail());
        assert_eq!(body.stmts().len(), 3);
        assert_eq!(body.tail().unwrap().kind, NodeKind::NameRef);
    }

    #[test]
    fn precedence_and_negative_literals() {
        let ts = lexer::lex("1 + 2 * -3 == 4 || !b").unwrap();
        let e = parse_fragment(&ts, FragmentKind::Expr).unwrap();
        assert_eq!(e.bin_op(), Some(BinOp::Or));
        let eq = &e.children[0];
        assert_eq!(eq.bin_op(), Some(BinOp::Eq));
        let add = &eq.children[0];
        assert_eq!(add.children[1].children[1].int_literal(), Some(-3));
    }

    #[test]
    fn class_members() {
        let prog = p(
            "open class A { public var x: Int64 = 1; init(v: Int64) { x = v; } func get(): Int64 { x } }\n\
             class B <: A { override func get(): Int64 { 2 } }",
        );
        let a = prog.classes().next().unwrap();
        let kinds: Vec<_> = a.members().iter().map(|m| m.kind).collect();
        assert_eq!(kinds, [NodeKind::FieldDecl, NodeKind::CtorDecl, NodeKind::MethodDecl]);
        let b = prog.classes().nth(1).unwrap();
        assert_eq!(b.superclass(), Some("A"));
        assert!(b.members()[0].has_modifier(Modifier::Override));
    }

    #[test]
    fn child_spans_are_contained() {
        let src = "open class A { var x: Int64 = 1 + 2; }\nmain(): Int64 { let a = A(); a.x }";
        let prog = p(src);
        visit(&prog.root, &mut |n| {
            for c in &n.children {
                assert!(n.span.contains(&c.span), "{:?} not in {:?}", c.kind, n.kind);
            }
        });
    }
}
