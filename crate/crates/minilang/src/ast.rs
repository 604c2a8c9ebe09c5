//! Uniform AST: every node is a kind, kind-specific attributes and an ordered
//! list of children.
//!
//! Child layout per kind (`?` marks an optional child, distinguished by kind):
//!
//! | kind           | attrs                      | children                                   |
//! |----------------|----------------------------|--------------------------------------------|
//! | Program        | -                          | items (ClassDecl, FuncDecl, VarDecl)       |
//! | ClassDecl      | `Class{name, superclass}`  | ModifierList, members                      |
//! | FieldDecl      | `Binding{name, mutable}`   | ModifierList, TypeRef?, initializer?       |
//! | CtorDecl       | -                          | ModifierList, Param*, Block                |
//! | MethodDecl     | `Name`                     | ModifierList, Param*, TypeRef?, Block      |
//! | FuncDecl       | `Name`                     | Param*, TypeRef?, Block                    |
//! | Param          | `Name`                     | TypeRef                                    |
//! | VarDecl        | `Binding{name, mutable}`   | TypeRef?, initializer?                     |
//! | Block          | `Block{has_tail}`          | statements, then the tail expression       |
//! | AssignExpr     | -                          | target (NameRef or MemberExpr), value      |
//! | IfExpr         | -                          | condition, Block, (Block or IfExpr)?       |
//! | WhileStmt      | -                          | condition, Block                           |
//! | ReturnStmt     | -                          | value?                                     |
//! | PrintStmt      | -                          | value                                      |
//! | CallExpr       | `Name`                     | arguments                                  |
//! | MethodCallExpr | `Name`                     | receiver, arguments                        |
//! | MemberExpr     | `Name`                     | receiver                                   |
//! | BinaryExpr     | `Binary(op)`               | lhs, rhs                                   |
//! | UnaryExpr      | `Unary(op)`                | operand                                    |
//! | Literal        | `Lit(value)`               | -                                          |
//! | NameRef        | `Name`                     | -                                          |
//! | ThisExpr       | -                          | -                                          |
//! | ModifierList   | `Modifiers`                | -                                          |
//! | TypeRef        | `Name`                     | -                                          |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Program,
    ClassDecl,
    FieldDecl,
    MethodDecl,
    CtorDecl,
    FuncDecl,
    Param,
    VarDecl,
    AssignExpr,
    IfExpr,
    CallExpr,
    MethodCallExpr,
    MemberExpr,
    BinaryExpr,
    UnaryExpr,
    Literal,
    NameRef,
    ThisExpr,
    Block,
    WhileStmt,
    ReturnStmt,
    PrintStmt,
    ModifierList,
    TypeRef,
}

impl NodeKind {
    pub fn is_expr(self) -> bool {
        matches!(
            self,
            NodeKind::IfExpr
                | NodeKind::CallExpr
                | NodeKind::MethodCallExpr
                | NodeKind::MemberExpr
                | NodeKind::BinaryExpr
                | NodeKind::UnaryExpr
                | NodeKind::Literal
                | NodeKind::NameRef
                | NodeKind::ThisExpr
        )
    }

    /// Kinds that only occur in statement position.
    pub fn is_stmt_only(self) -> bool {
        matches!(
            self,
            NodeKind::VarDecl | NodeKind::AssignExpr | NodeKind::WhileStmt | NodeKind::ReturnStmt | NodeKind::PrintStmt
        )
    }

    pub fn is_decl(self) -> bool {
        matches!(
            self,
            NodeKind::ClassDecl | NodeKind::FieldDecl | NodeKind::MethodDecl | NodeKind::CtorDecl | NodeKind::FuncDecl
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modifier {
    Open,
    Override,
    Public,
    Private,
}

impl Modifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Modifier::Open => "open",
            Modifier::Override => "override",
            Modifier::Public => "public",
            Modifier::Private => "private",
        }
    }

    pub fn parse(s: &str) -> Option<Modifier> {
        match s {
            "open" => Some(Modifier::Open),
            "override" => Some(Modifier::Override),
            "public" => Some(Modifier::Public),
            "private" => Some(Modifier::Private),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lit {
    /// Integer literals are kept wide until the checker assigns them a type.
    Int(i128),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Attr {
    None,
    Name(String),
    Class { name: String, superclass: Option<String> },
    Binding { name: String, mutable: bool },
    Binary(BinOp),
    Unary(UnOp),
    Lit(Lit),
    Modifiers(Vec<Modifier>),
    Block { has_tail: bool },
}

/// Parser-assigned identity, unique within one parse. Synthesized nodes carry
/// [`NodeId::SYNTHETIC`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const SYNTHETIC: NodeId = NodeId(0);
}

#[derive(Debug, Clone)]
pub struct AstNode {
    pub kind: NodeKind,
    pub attrs: Attr,
    pub children: Vec<AstNode>,
    pub span: Span,
    pub id: NodeId,
}

/// Structural equality: kind, attributes and children. Spans and ids are
/// ignored.
impl PartialEq for AstNode {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.attrs == other.attrs && self.children == other.children
    }
}

impl Eq for AstNode {}

impl AstNode {
    pub fn new(kind: NodeKind, attrs: Attr, children: Vec<AstNode>) -> Self {
        AstNode {
            kind,
            attrs,
            children,
            span: Span::default(),
            id: NodeId::SYNTHETIC,
        }
    }

    pub fn leaf(kind: NodeKind, attrs: Attr) -> Self {
        AstNode::new(kind, attrs, Vec::new())
    }

    pub fn int(value: i128) -> Self {
        AstNode::leaf(NodeKind::Literal, Attr::Lit(Lit::Int(value)))
    }

    pub fn name_ref(name: &str) -> Self {
        AstNode::leaf(NodeKind::NameRef, Attr::Name(name.to_string()))
    }

    pub fn type_ref(name: &str) -> Self {
        AstNode::leaf(NodeKind::TypeRef, Attr::Name(name.to_string()))
    }

    pub fn block(children: Vec<AstNode>, has_tail: bool) -> Self {
        AstNode::new(NodeKind::Block, Attr::Block { has_tail }, children)
    }

    pub fn modifiers(mods: Vec<Modifier>) -> Self {
        AstNode::leaf(NodeKind::ModifierList, Attr::Modifiers(mods))
    }

    pub fn binary(op: BinOp, lhs: AstNode, rhs: AstNode) -> Self {
        AstNode::new(NodeKind::BinaryExpr, Attr::Binary(op), vec![lhs, rhs])
    }

    pub fn assign(target: AstNode, value: AstNode) -> Self {
        AstNode::new(NodeKind::AssignExpr, Attr::None, vec![target, value])
    }

    pub fn is(&self, kind: NodeKind) -> bool {
        self.kind == kind
    }

    /// Name carried by `Name`, `Class` or `Binding` attributes.
    pub fn name(&self) -> Option<&str> {
        match &self.attrs {
            Attr::Name(n) => Some(n),
            Attr::Class { name, .. } | Attr::Binding { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn superclass(&self) -> Option<&str> {
        match &self.attrs {
            Attr::Class { superclass, .. } => superclass.as_deref(),
            _ => None,
        }
    }

    pub fn is_mutable(&self) -> bool {
        matches!(self.attrs, Attr::Binding { mutable: true, .. })
    }

    pub fn literal(&self) -> Option<&Lit> {
        match &self.attrs {
            Attr::Lit(l) => Some(l),
            _ => None,
        }
    }

    pub fn int_literal(&self) -> Option<i128> {
        match &self.attrs {
            Attr::Lit(Lit::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn bin_op(&self) -> Option<BinOp> {
        match self.attrs {
            Attr::Binary(op) => Some(op),
            _ => None,
        }
    }

    pub fn un_op(&self) -> Option<UnOp> {
        match self.attrs {
            Attr::Unary(op) => Some(op),
            _ => None,
        }
    }

    pub fn modifier_list(&self) -> &[Modifier] {
        match &self.attrs {
            Attr::Modifiers(m) => m,
            _ => self
                .children
                .first()
                .filter(|c| c.kind == NodeKind::ModifierList)
                .map(|c| c.modifier_list())
                .unwrap_or(&[]),
        }
    }

    pub fn has_modifier(&self, m: Modifier) -> bool {
        self.modifier_list().contains(&m)
    }

    pub fn has_tail(&self) -> bool {
        matches!(self.attrs, Attr::Block { has_tail: true })
    }

    /// For a Block: statement children, excluding the tail expression.
    pub fn stmts(&self) -> &[AstNode] {
        if self.has_tail() {
            &self.children[..self.children.len() - 1]
        } else {
            &self.children
        }
    }

    /// For a Block: the tail expression, if any.
    pub fn tail(&self) -> Option<&AstNode> {
        if self.has_tail() {
            self.children.last()
        } else {
            None
        }
    }

    /// Declared type of a VarDecl, FieldDecl or Param; return type of a
    /// FuncDecl or MethodDecl.
    pub fn type_ann(&self) -> Option<&AstNode> {
        self.children.iter().find(|c| c.kind == NodeKind::TypeRef)
    }

    /// Initializer of a VarDecl or FieldDecl.
    pub fn initializer(&self) -> Option<&AstNode> {
        match self.kind {
            NodeKind::VarDecl | NodeKind::FieldDecl => self
                .children
                .iter()
                .find(|c| !matches!(c.kind, NodeKind::TypeRef | NodeKind::ModifierList)),
            _ => None,
        }
    }

    pub fn initializer_mut(&mut self) -> Option<&mut AstNode> {
        match self.kind {
            NodeKind::VarDecl | NodeKind::FieldDecl => self
                .children
                .iter_mut()
                .find(|c| !matches!(c.kind, NodeKind::TypeRef | NodeKind::ModifierList)),
            _ => None,
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &AstNode> {
        self.children.iter().filter(|c| c.kind == NodeKind::Param)
    }

    /// Body block of a function, method or constructor.
    pub fn body(&self) -> Option<&AstNode> {
        match self.kind {
            NodeKind::FuncDecl | NodeKind::MethodDecl | NodeKind::CtorDecl => {
                self.children.last().filter(|c| c.kind == NodeKind::Block)
            }
            _ => None,
        }
    }

    pub fn body_mut(&mut self) -> Option<&mut AstNode> {
        match self.kind {
            NodeKind::FuncDecl | NodeKind::MethodDecl | NodeKind::CtorDecl => {
                self.children.last_mut().filter(|c| c.kind == NodeKind::Block)
            }
            _ => None,
        }
    }

    /// Class members (children after the ModifierList).
    pub fn members(&self) -> &[AstNode] {
        match self.kind {
            NodeKind::ClassDecl => &self.children[1..],
            _ => &[],
        }
    }

    /// Arguments of a CallExpr or MethodCallExpr.
    pub fn args(&self) -> &[AstNode] {
        match self.kind {
            NodeKind::CallExpr => &self.children,
            NodeKind::MethodCallExpr => &self.children[1..],
            _ => &[],
        }
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn subtree_size(&self) -> usize {
        1 + self.children.iter().map(AstNode::subtree_size).sum::<usize>()
    }

    /// Preorder listing of this subtree.
    pub fn preorder(&self) -> Vec<&AstNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn find(&self, id: NodeId) -> Option<&AstNode> {
        self.preorder().into_iter().find(|n| n.id == id)
    }

    /// Reset all spans and ids in the subtree; used for nodes grafted into a
    /// different tree.
    pub fn synthesized(mut self) -> Self {
        fn clear(n: &mut AstNode) {
            n.span = Span::default();
            n.id = NodeId::SYNTHETIC;
            n.children.iter_mut().for_each(clear);
        }
        clear(&mut self);
        self
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A parsed compilation unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub root: AstNode,
    pub source: String,
}

impl Program {
    pub fn items(&self) -> &[AstNode] {
        &self.root.children
    }

    pub fn classes(&self) -> impl Iterator<Item = &AstNode> {
        self.root.children.iter().filter(|n| n.kind == NodeKind::ClassDecl)
    }

    pub fn main(&self) -> Option<&AstNode> {
        self.root
            .children
            .iter()
            .find(|n| n.kind == NodeKind::FuncDecl && n.name() == Some("main"))
    }
}

/// Preorder rewriting traversal.
///
/// `visitor` sees every node before its children. Returning `Some(node)`
/// replaces the visited node; the replacement's subtree is not visited.
/// Returns the possibly rewritten root.
pub fn walk<F>(root: &AstNode, visitor: &mut F) -> AstNode
where
    F: FnMut(&AstNode) -> Option<AstNode>,
{
    if let Some(replacement) = visitor(root) {
        return replacement;
    }
    let children = root.children.iter().map(|c| walk(c, visitor)).collect();
    AstNode {
        kind: root.kind,
        attrs: root.attrs.clone(),
        children,
        span: root.span,
        id: root.id,
    }
}

/// Postorder rewriting traversal: children are rewritten first, then
/// `visitor` may replace the rebuilt parent.
pub fn walk_post<F>(root: &AstNode, visitor: &mut F) -> AstNode
where
    F: FnMut(AstNode) -> AstNode,
{
    let children = root.children.iter().map(|c| walk_post(c, visitor)).collect();
    visitor(AstNode {
        kind: root.kind,
        attrs: root.attrs.clone(),
        children,
        span: root.span,
        id: root.id,
    })
}

/// Read-only preorder visit.
pub fn visit<F>(root: &AstNode, visitor: &mut F)
where
    F: FnMut(&AstNode),
{
    visitor(root);
    for c in &root.children {
        visit(c, visitor);
    }
}
