//! Name resolution, type checking and static semantic checks.
//!
//! All diagnostics of a program are collected in one pass. The catalog of
//! codes is closed, so several distinct static errors (duplicate
//! definitions, assignment to immutable bindings, invalid overrides, missing
//! return values) share `E_TYPE_MISMATCH`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::ast::{visit, AstNode, BinOp, Lit, Modifier, NodeId, NodeKind, Program, UnOp};
use crate::defects::{DefectId, DefectSet};
use crate::diag::{Diagnostic, DiagnosticCode, Span};
use crate::types::{ClassInfo, ClassTable, FieldInfo, MethodInfo, Type};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CallKind {
    Function(String),
    Constructor(String),
    /// A bare call to a method of the enclosing class, dispatched on `this`.
    ThisMethod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NameKind {
    Local,
    /// A field of `this`.
    Field,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FnSig {
    pub params: Vec<Type>,
    pub ret: Type,
}

/// Everything later phases need to know about a checked program, keyed by
/// node id.
#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub table: ClassTable,
    pub functions: BTreeMap<String, FnSig>,
    /// Globals in declaration order.
    pub globals: Vec<(String, Type)>,
    pub expr_types: HashMap<NodeId, Type>,
    pub calls: HashMap<NodeId, CallKind>,
    pub names: HashMap<NodeId, NameKind>,
    /// Declared or inferred type of each VarDecl and Param.
    pub var_types: HashMap<NodeId, Type>,
    pub field_decl_types: HashMap<NodeId, Type>,
    /// Assignment targets (NameRef or MemberExpr) that denote fields.
    pub field_targets: HashSet<NodeId>,
}

impl Analysis {
    pub fn type_of(&self, node: &AstNode) -> Option<&Type> {
        self.expr_types.get(&node.id)
    }
}

/// Check with every defect disabled (the fixed compiler).
pub fn check(program: &Program) -> Result<ClassTable, Vec<Diagnostic>> {
    check_with(program, &DefectSet::none())
}

pub fn check_with(program: &Program, defects: &DefectSet) -> Result<ClassTable, Vec<Diagnostic>> {
    let (analysis, diags) = analyze(program, defects);
    if diags.is_empty() {
        Ok(analysis.table)
    } else {
        Err(diags)
    }
}

/// Run every check and return the analysis together with all diagnostics.
/// The analysis is best-effort when diagnostics are present.
pub fn analyze(program: &Program, defects: &DefectSet) -> (Analysis, Vec<Diagnostic>) {
    let mut c = Checker::new(defects);
    c.program(program);
    let mut diags = c.diags;
    diags.sort_by_key(|d| (d.span.start, d.span.end));
    (c.a, diags)
}

/// One `E_DUP_MODIFIER` per repeated occurrence of a modifier in the
/// node's modifier list.
pub fn check_modifiers(node: &AstNode) -> Vec<Diagnostic> {
    let list = if node.kind == NodeKind::ModifierList {
        Some(node)
    } else {
        node.children.first().filter(|c| c.kind == NodeKind::ModifierList)
    };
    let Some(list) = list else {
        return Vec::new();
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for m in list.modifier_list() {
        if !seen.insert(*m) {
            out.push(Diagnostic::new(
                DiagnosticCode::DupModifier,
                format!("duplicate modifier '{}'", m.as_str()),
                list.span,
            ));
        }
    }
    out
}

/// Scope bindings for [`infer_expr_type`].
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub table: ClassTable,
    pub functions: BTreeMap<String, FnSig>,
    pub bindings: BTreeMap<String, Type>,
    pub this_class: Option<String>,
}

/// Static type of a standalone expression under `env`. The first
/// diagnostic is returned on failure.
pub fn infer_expr_type(expr: &AstNode, env: &Env) -> Result<Type, Diagnostic> {
    let defects = DefectSet::none();
    let mut c = Checker::new(&defects);
    c.a.table = env.table.clone();
    c.a.functions = env.functions.clone();
    c.class_names = env.table.classes.keys().cloned().collect();
    c.ctx.class = env.this_class.clone();
    c.scopes.push(
        env.bindings
            .iter()
            .map(|(k, t)| {
                (
                    k.clone(),
                    Local {
                        ty: t.clone(),
                        mutable: true,
                    },
                )
            })
            .collect(),
    );
    let ty = c.expr(expr, None);
    match c.diags.into_iter().next() {
        Some(d) => Err(d),
        None => Ok(ty),
    }
}

#[derive(Debug, Clone)]
struct Local {
    ty: Type,
    mutable: bool,
}

#[derive(Debug, Clone, Default)]
struct Ctx {
    class: Option<String>,
    in_ctor: bool,
    /// Return type of the enclosing function; `None` where `return` is not
    /// allowed.
    ret: Option<Type>,
}

struct Checker<'a> {
    defects: &'a DefectSet,
    diags: Vec<Diagnostic>,
    a: Analysis,
    class_names: BTreeSet<String>,
    globals: HashMap<String, Local>,
    scopes: Vec<HashMap<String, Local>>,
    ctx: Ctx,
}

fn is_int_literal(n: &AstNode) -> bool {
    n.int_literal().is_some()
}

impl<'a> Checker<'a> {
    fn new(defects: &'a DefectSet) -> Self {
        Checker {
            defects,
            diags: Vec::new(),
            a: Analysis::default(),
            class_names: BTreeSet::new(),
            globals: HashMap::new(),
            scopes: Vec::new(),
            ctx: Ctx::default(),
        }
    }

    fn err(&mut self, code: DiagnosticCode, msg: impl Into<String>, span: Span) {
        self.diags.push(Diagnostic::new(code, msg, span));
    }

    fn mismatch(&mut self, expected: &Type, found: &Type, span: Span) {
        if *expected == Type::Error || *found == Type::Error {
            return;
        }
        self.mismatch_msg(
            expected,
            found,
            format!("mismatched types: expected {expected}, found {found}"),
            span,
        );
    }

    /// Report a type mismatch. Under D4 a mismatch involving Int8 is
    /// misreported as an invalid subscript.
    fn mismatch_msg(&mut self, expected: &Type, found: &Type, msg: String, span: Span) {
        if self.defects.has(DefectId::D4) && (*expected == Type::Int8 || *found == Type::Int8) {
            self.err(
                DiagnosticCode::InvalidSubscript,
                format!("invalid subscript operator [] on value of type {found}"),
                span,
            );
        } else {
            self.err(DiagnosticCode::TypeMismatch, msg, span);
        }
    }

    fn resolve_type(&mut self, t: &AstNode) -> Type {
        let name = t.name().unwrap_or("");
        let ty = Type::from_name(name);
        if let Type::Class(c) = &ty {
            if !self.class_names.contains(c) {
                self.err(DiagnosticCode::UndefinedName, format!("unknown type '{c}'"), t.span);
                return Type::Error;
            }
        }
        ty
    }

    fn program(&mut self, p: &Program) {
        let items = p.items();
        let mut seen: BTreeMap<&str, &'static str> = BTreeMap::new();
        for item in items {
            let (name, what) = match item.kind {
                NodeKind::ClassDecl => (item.name().unwrap_or(""), "class"),
                NodeKind::FuncDecl => (item.name().unwrap_or(""), "function"),
                NodeKind::VarDecl => (item.name().unwrap_or(""), "global variable"),
                _ => continue,
            };
            if let Some(prev) = seen.insert(name, what) {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("duplicate definition of '{name}' (already a {prev})"),
                    item.span,
                );
            }
        }
        self.class_names = p.classes().filter_map(|c| c.name()).map(String::from).collect();

        if !self.defects.has(DefectId::D7) {
            let mut found = Vec::new();
            visit(&p.root, &mut |n| {
                if n.kind == NodeKind::ModifierList {
                    found.extend(check_modifiers(n));
                }
            });
            self.diags.extend(found);
        }

        self.build_classes(p);
        self.signatures(p);

        for item in items.iter().filter(|i| i.kind == NodeKind::VarDecl) {
            self.global(item);
        }
        for class in p.classes() {
            self.class_bodies(class);
        }
        for f in items.iter().filter(|i| i.kind == NodeKind::FuncDecl) {
            let sig = self.a.functions.get(f.name().unwrap_or("")).cloned();
            if let Some(sig) = sig {
                self.ctx = Ctx {
                    class: None,
                    in_ctor: false,
                    ret: Some(sig.ret.clone()),
                };
                self.function_body(f, &sig.ret);
            }
        }
        self.ctx = Ctx::default();
        self.construction_cycles(p);
    }

    fn build_classes(&mut self, p: &Program) {
        let nodes: BTreeMap<&str, &AstNode> = p.classes().map(|c| (c.name().unwrap_or(""), c)).collect();

        // Resolve superclasses, breaking unknown or cyclic links after
        // reporting them.
        let mut supers: BTreeMap<&str, Option<&str>> = BTreeMap::new();
        for (&name, node) in &nodes {
            let sup = match node.superclass() {
                Some(s) if !nodes.contains_key(s) => {
                    self.err(
                        DiagnosticCode::UndefinedName,
                        format!("unknown superclass '{s}'"),
                        node.span,
                    );
                    None
                }
                Some(s) => {
                    if !nodes[s].has_modifier(Modifier::Open) {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("class '{s}' is not open and cannot be inherited"),
                            node.span,
                        );
                    }
                    Some(s)
                }
                None => None,
            };
            supers.insert(name, sup);
        }
        let mut cyclic = BTreeSet::new();
        for &start in nodes.keys() {
            let mut cur = supers[start];
            let mut steps = 0;
            while let Some(c) = cur {
                if c == start {
                    cyclic.insert(start);
                    break;
                }
                steps += 1;
                if steps > nodes.len() {
                    break;
                }
                cur = supers.get(c).copied().flatten();
            }
        }
        for &c in &cyclic {
            self.err(
                DiagnosticCode::CircularDep,
                format!("class '{c}' inherits from itself"),
                nodes[c].span,
            );
            supers.insert(c, None);
        }

        for (&name, node) in &nodes {
            let info = self.class_info(node, supers[name]);
            self.a.table.classes.insert(name.to_string(), info);
        }

        for (&name, node) in &nodes {
            self.class_consistency(name, node);
        }
    }

    fn class_info(&mut self, node: &AstNode, sup: Option<&str>) -> ClassInfo {
        let mut info = ClassInfo {
            name: node.name().unwrap_or("").to_string(),
            superclass: sup.map(String::from),
            is_open: node.has_modifier(Modifier::Open),
            ctor: None,
            fields: Vec::new(),
            methods: Vec::new(),
            decl: node.id,
        };
        let mut member_names = BTreeSet::new();
        for m in node.members() {
            match m.kind {
                NodeKind::FieldDecl => {
                    let name = m.name().unwrap_or("").to_string();
                    if !member_names.insert(name.clone()) {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("duplicate member '{name}'"),
                            m.span,
                        );
                    }
                    let ty = match m.type_ann() {
                        Some(t) => self.resolve_type(t),
                        None => {
                            self.err(
                                DiagnosticCode::TypeMismatch,
                                format!("field '{name}' needs a type annotation"),
                                m.span,
                            );
                            Type::Error
                        }
                    };
                    self.a.field_decl_types.insert(m.id, ty.clone());
                    info.fields.push(FieldInfo {
                        name,
                        ty,
                        mutable: m.is_mutable(),
                        has_init: m.initializer().is_some(),
                        decl: m.id,
                    });
                }
                NodeKind::MethodDecl => {
                    let name = m.name().unwrap_or("").to_string();
                    if !member_names.insert(name.clone()) {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("duplicate member '{name}'"),
                            m.span,
                        );
                    }
                    let params = self.param_types(m);
                    let ret = m.type_ann().map_or(Type::Unit, |t| self.resolve_type(t));
                    info.methods.push(MethodInfo {
                        name,
                        params,
                        ret,
                        is_override: m.has_modifier(Modifier::Override),
                        decl: m.id,
                    });
                }
                NodeKind::CtorDecl => {
                    let params = self.param_types(m);
                    if info.ctor.is_some() {
                        self.err(DiagnosticCode::TypeMismatch, "duplicate constructor", m.span);
                    } else {
                        info.ctor = Some(params);
                    }
                }
                _ => {}
            }
        }
        info
    }

    fn param_types(&mut self, f: &AstNode) -> Vec<Type> {
        let params: Vec<&AstNode> = f.params().collect();
        params
            .into_iter()
            .map(|p| {
                let ty = p.type_ann().map_or(Type::Error, |t| self.resolve_type(t));
                self.a.var_types.insert(p.id, ty.clone());
                ty
            })
            .collect()
    }

    fn class_consistency(&mut self, name: &str, node: &AstNode) {
        let Some(info) = self.a.table.get(name).cloned() else {
            return;
        };
        let sup = info.superclass.clone();
        for f in &info.fields {
            if let Some(s) = &sup {
                if self.a.table.field(s, &f.name).is_some() {
                    let span = node.find(f.decl).map_or(node.span, |n| n.span);
                    self.err(
                        DiagnosticCode::TypeMismatch,
                        format!("field '{}' is already declared in a superclass", f.name),
                        span,
                    );
                }
            }
        }
        for m in &info.methods {
            let span = node.find(m.decl).map_or(node.span, |n| n.span);
            let inherited = sup
                .as_deref()
                .and_then(|s| self.a.table.method(s, &m.name))
                .map(|(_, mi)| mi.clone());
            match inherited {
                Some(sm) => {
                    if !m.is_override {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!(
                                "method '{}' hides an inherited method and must be marked override",
                                m.name
                            ),
                            span,
                        );
                    } else if sm.params != m.params || sm.ret != m.ret {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("override of '{}' changes its signature", m.name),
                            span,
                        );
                    }
                }
                None if m.is_override => {
                    self.err(
                        DiagnosticCode::TypeMismatch,
                        format!("method '{}' overrides nothing", m.name),
                        span,
                    );
                }
                None => {}
            }
        }
        if let (Some(_), Some(s)) = (&info.ctor, &sup) {
            if !self.a.table.effective_ctor(s).is_empty() {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("constructor of '{name}' cannot implicitly call the constructor of '{s}', which takes arguments"),
                    node.span,
                );
            }
        }
    }

    fn signatures(&mut self, p: &Program) {
        let mut main_seen = false;
        for f in p.items().iter().filter(|i| i.kind == NodeKind::FuncDecl) {
            let name = f.name().unwrap_or("").to_string();
            let params = self.param_types(f);
            let ret = f.type_ann().map_or(Type::Unit, |t| self.resolve_type(t));
            if name == "main" {
                main_seen = true;
                if !params.is_empty() {
                    self.err(DiagnosticCode::TypeMismatch, "main takes no parameters", f.span);
                }
                if !matches!(ret, Type::Int64 | Type::Unit | Type::Error) {
                    self.err(
                        DiagnosticCode::TypeMismatch,
                        format!("main must return Int64, not {ret}"),
                        f.span,
                    );
                }
            }
            self.a.functions.entry(name).or_insert(FnSig { params, ret });
        }
        if !main_seen {
            self.err(
                DiagnosticCode::UndefinedName,
                "missing entry function 'main'",
                Span::new(0, 0),
            );
        }
    }

    fn global(&mut self, decl: &AstNode) {
        self.ctx = Ctx::default();
        let ty = self.binding_type(decl);
        let name = decl.name().unwrap_or("").to_string();
        self.a.var_types.insert(decl.id, ty.clone());
        self.a.globals.push((name.clone(), ty.clone()));
        self.globals.insert(
            name,
            Local {
                ty,
                mutable: decl.is_mutable(),
            },
        );
    }

    /// Type of a VarDecl from its annotation and initializer, checking the
    /// initializer against the annotation.
    fn binding_type(&mut self, decl: &AstNode) -> Type {
        let ann = decl.type_ann().map(|t| self.resolve_type(t));
        let init = decl.initializer();
        let init_ty = init.map(|i| self.expr(i, ann.as_ref()));
        match (ann, init_ty) {
            (Some(a), Some(i)) => {
                if !self.a.table.assignable(&a, &i) {
                    self.mismatch(&a, &i, init.map_or(decl.span, |n| n.span));
                }
                a
            }
            (Some(a), None) => a,
            (None, Some(i)) => i,
            (None, None) => {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("cannot infer a type for '{}'", decl.name().unwrap_or("")),
                    decl.span,
                );
                Type::Error
            }
        }
    }

    fn class_bodies(&mut self, class: &AstNode) {
        let name = class.name().unwrap_or("").to_string();
        for m in class.members() {
            match m.kind {
                NodeKind::FieldDecl => {
                    self.ctx = Ctx {
                        class: Some(name.clone()),
                        in_ctor: false,
                        ret: None,
                    };
                    if let Some(init) = m.initializer() {
                        let ty = self.a.field_decl_types.get(&m.id).cloned().unwrap_or(Type::Error);
                        let it = self.expr(init, Some(&ty));
                        if !self.a.table.assignable(&ty, &it) {
                            self.mismatch(&ty, &it, init.span);
                        }
                    }
                }
                NodeKind::CtorDecl => {
                    self.ctx = Ctx {
                        class: Some(name.clone()),
                        in_ctor: true,
                        ret: Some(Type::Unit),
                    };
                    self.function_body(m, &Type::Unit);
                }
                NodeKind::MethodDecl => {
                    let ret = self
                        .a
                        .table
                        .get(&name)
                        .and_then(|c| c.methods.iter().find(|mi| mi.decl == m.id))
                        .map_or(Type::Error, |mi| mi.ret.clone());
                    self.ctx = Ctx {
                        class: Some(name.clone()),
                        in_ctor: false,
                        ret: Some(ret.clone()),
                    };
                    self.function_body(m, &ret);
                }
                _ => {}
            }
        }
        self.ctx = Ctx::default();
    }

    fn function_body(&mut self, f: &AstNode, ret: &Type) {
        let mut scope = HashMap::new();
        for p in f.params() {
            let name = p.name().unwrap_or("").to_string();
            let ty = self.a.var_types.get(&p.id).cloned().unwrap_or(Type::Error);
            if scope.insert(name.clone(), Local { ty, mutable: false }).is_some() {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("duplicate parameter '{name}'"),
                    p.span,
                );
            }
        }
        self.scopes.push(scope);
        let Some(body) = f.body() else {
            self.scopes.pop();
            return;
        };
        let expected = if *ret == Type::Unit { None } else { Some(ret) };
        let ty = self.block(body, expected);
        if *ret != Type::Unit {
            if body.has_tail() {
                if !self.a.table.assignable(ret, &ty) {
                    let span = body.tail().map_or(body.span, |t| t.span);
                    self.mismatch(ret, &ty, span);
                }
            } else if !body.stmts().last().is_some_and(|s| s.kind == NodeKind::ReturnStmt) {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("missing return value of type {ret}"),
                    body.span,
                );
            }
        }
        self.scopes.pop();
    }

    fn lookup_local(&self, name: &str) -> Option<&Local> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn declare(&mut self, name: &str, local: Local, span: Span) {
        let scope = self.scopes.last_mut().expect("inside a scope");
        if scope.contains_key(name) {
            self.err(
                DiagnosticCode::TypeMismatch,
                format!("'{name}' is already declared in this scope"),
                span,
            );
        }
        self.scopes
            .last_mut()
            .expect("inside a scope")
            .insert(name.to_string(), local);
    }

    fn block(&mut self, b: &AstNode, expected: Option<&Type>) -> Type {
        self.scopes.push(HashMap::new());
        for s in b.stmts() {
            self.stmt(s);
        }
        let ty = match b.tail() {
            Some(t) => self.expr(t, expected),
            None => Type::Unit,
        };
        self.scopes.pop();
        self.a.expr_types.insert(b.id, ty.clone());
        ty
    }

    fn stmt(&mut self, s: &AstNode) {
        match s.kind {
            NodeKind::VarDecl => {
                let ty = self.binding_type(s);
                self.a.var_types.insert(s.id, ty.clone());
                let name = s.name().unwrap_or("").to_string();
                self.declare(
                    &name,
                    Local {
                        ty,
                        mutable: s.is_mutable(),
                    },
                    s.span,
                );
            }
            NodeKind::AssignExpr => self.assign(s),
            NodeKind::WhileStmt => {
                self.condition(&s.children[0]);
                self.block(&s.children[1], None);
            }
            NodeKind::ReturnStmt => {
                let Some(ret) = self.ctx.ret.clone() else {
                    self.err(
                        DiagnosticCode::TypeMismatch,
                        "return outside of a function body",
                        s.span,
                    );
                    return;
                };
                match s.children.first() {
                    Some(v) => {
                        let expected = if ret == Type::Unit { None } else { Some(&ret) };
                        let t = self.expr(v, expected);
                        if !self.a.table.assignable(&ret, &t) {
                            self.mismatch(&ret, &t, v.span);
                        }
                    }
                    None => {
                        if !matches!(ret, Type::Unit | Type::Error) {
                            self.err(
                                DiagnosticCode::TypeMismatch,
                                format!("missing return value of type {ret}"),
                                s.span,
                            );
                        }
                    }
                }
            }
            NodeKind::PrintStmt => {
                let v = &s.children[0];
                let t = self.expr(v, None);
                if !matches!(t, Type::Int64 | Type::Int8 | Type::Bool | Type::String | Type::Error) {
                    self.err(
                        DiagnosticCode::TypeMismatch,
                        format!("cannot print a value of type {t}"),
                        v.span,
                    );
                }
            }
            _ => {
                self.expr(s, None);
            }
        }
    }

    fn condition(&mut self, c: &AstNode) {
        let t = self.expr(c, Some(&Type::Bool));
        if t != Type::Bool {
            self.mismatch(&Type::Bool, &t, c.span);
        }
    }

    fn assign(&mut self, s: &AstNode) {
        let (target, value) = (&s.children[0], &s.children[1]);
        let (ty, mutable) = match target.kind {
            NodeKind::NameRef => {
                let name = target.name().unwrap_or("");
                match self.resolve_name(target) {
                    Some((ty, NameKind::Field, owner_mutable)) => {
                        self.a.field_targets.insert(target.id);
                        let owner = self
                            .ctx
                            .class
                            .clone()
                            .and_then(|c| self.a.table.field(&c, name).map(|(_, o, _)| o.to_string()));
                        let allowed = owner_mutable || (self.ctx.in_ctor && owner == self.ctx.class);
                        (ty, allowed)
                    }
                    Some((ty, _, m)) => (ty, m),
                    None => (Type::Error, true),
                }
            }
            NodeKind::MemberExpr => {
                let ty = self.expr(target, None);
                self.a.field_targets.insert(target.id);
                let recv = &target.children[0];
                let field = self
                    .a
                    .type_of(recv)
                    .and_then(|t| t.class_name().map(String::from))
                    .and_then(|c| {
                        self.a
                            .table
                            .field(&c, target.name().unwrap_or(""))
                            .map(|(_, o, f)| (o.to_string(), f.mutable))
                    });
                let allowed = match field {
                    Some((owner, m)) => {
                        m || (self.ctx.in_ctor && recv.kind == NodeKind::ThisExpr && Some(owner) == self.ctx.class)
                    }
                    None => true,
                };
                (ty, allowed)
            }
            _ => (Type::Error, true),
        };
        if !mutable {
            self.err(
                DiagnosticCode::TypeMismatch,
                format!("cannot assign to immutable '{}'", target.name().unwrap_or("")),
                target.span,
            );
        }
        let vt = self.expr(value, Some(&ty));
        if !self.a.table.assignable(&ty, &vt) {
            self.mismatch(&ty, &vt, value.span);
        }
    }

    /// Resolve a bare name: local, then field of `this`, then global.
    /// Records the resolution and type; returns `(type, kind, mutable)`.
    fn resolve_name(&mut self, n: &AstNode) -> Option<(Type, NameKind, bool)> {
        let name = n.name().unwrap_or("");
        let found = if let Some(l) = self.lookup_local(name) {
            Some((l.ty.clone(), NameKind::Local, l.mutable))
        } else if let Some((_, _, f)) = self.ctx.class.as_deref().and_then(|c| self.a.table.field(c, name)) {
            Some((f.ty.clone(), NameKind::Field, f.mutable))
        } else {
            self.globals
                .get(name)
                .map(|g| (g.ty.clone(), NameKind::Global, g.mutable))
        };
        match &found {
            Some((ty, kind, _)) => {
                self.a.names.insert(n.id, *kind);
                self.a.expr_types.insert(n.id, ty.clone());
            }
            None => {
                self.err(
                    DiagnosticCode::UndefinedName,
                    format!("undefined name '{name}'"),
                    n.span,
                );
                self.a.expr_types.insert(n.id, Type::Error);
            }
        }
        found
    }

    fn expr(&mut self, e: &AstNode, expected: Option<&Type>) -> Type {
        let ty = self.expr_inner(e, expected);
        self.a.expr_types.insert(e.id, ty.clone());
        ty
    }

    fn expr_inner(&mut self, e: &AstNode, expected: Option<&Type>) -> Type {
        match e.kind {
            NodeKind::Literal => match e.literal() {
                Some(Lit::Int(v)) => {
                    let ty = match expected {
                        Some(Type::Int8) => Type::Int8,
                        _ => Type::Int64,
                    };
                    let (lo, hi) = ty.int_range().expect("integer type");
                    if *v < lo || *v > hi {
                        self.mismatch_msg(&ty, &ty, format!("literal {v} exceeds the value range of {ty}"), e.span);
                    }
                    ty
                }
                Some(Lit::Bool(_)) => Type::Bool,
                Some(Lit::Str(_)) => Type::String,
                None => Type::Error,
            },
            NodeKind::NameRef => self.resolve_name(e).map_or(Type::Error, |(t, _, _)| t),
            NodeKind::ThisExpr => match &self.ctx.class {
                Some(c) => Type::Class(c.clone()),
                None => {
                    self.err(DiagnosticCode::UndefinedName, "'this' outside of a class", e.span);
                    Type::Error
                }
            },
            NodeKind::UnaryExpr => {
                let operand = &e.children[0];
                match e.un_op() {
                    Some(UnOp::Neg) => {
                        let exp = expected.filter(|t| t.is_int());
                        let t = self.expr(operand, exp);
                        if !t.is_int() && t != Type::Error {
                            self.mismatch(&Type::Int64, &t, operand.span);
                            return Type::Error;
                        }
                        t
                    }
                    _ => {
                        let t = self.expr(operand, Some(&Type::Bool));
                        if t != Type::Bool {
                            self.mismatch(&Type::Bool, &t, operand.span);
                        }
                        Type::Bool
                    }
                }
            }
            NodeKind::BinaryExpr => self.binary(e, expected),
            NodeKind::IfExpr => {
                self.condition(&e.children[0]);
                let then_ty = self.block(&e.children[1], expected);
                match e.children.get(2) {
                    Some(alt) => {
                        let hint = expected
                            .cloned()
                            .or_else(|| Some(then_ty.clone()).filter(|t| t.is_int()));
                        let alt_ty = if alt.kind == NodeKind::IfExpr {
                            self.expr(alt, hint.as_ref())
                        } else {
                            self.block(alt, hint.as_ref())
                        };
                        if then_ty == Type::Error || alt_ty == Type::Error {
                            return Type::Error;
                        }
                        if then_ty != alt_ty {
                            self.mismatch(&then_ty, &alt_ty, alt.span);
                            return Type::Error;
                        }
                        then_ty
                    }
                    None => Type::Unit,
                }
            }
            NodeKind::CallExpr => self.call(e),
            NodeKind::MethodCallExpr => {
                let recv = self.expr(&e.children[0], None);
                let name = e.name().unwrap_or("");
                match &recv {
                    Type::Class(c) => match self.a.table.method(c, name).map(|(_, m)| m.clone()) {
                        Some(m) => {
                            self.args(e, e.args(), &m.params);
                            m.ret
                        }
                        None => {
                            self.err(
                                DiagnosticCode::UndefinedName,
                                format!("class '{c}' has no method '{name}'"),
                                e.span,
                            );
                            self.args_unchecked(e.args());
                            Type::Error
                        }
                    },
                    Type::Error => {
                        self.args_unchecked(e.args());
                        Type::Error
                    }
                    other => {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("type {other} has no methods"),
                            e.span,
                        );
                        self.args_unchecked(e.args());
                        Type::Error
                    }
                }
            }
            NodeKind::MemberExpr => {
                let recv = self.expr(&e.children[0], None);
                let name = e.name().unwrap_or("");
                match &recv {
                    Type::Class(c) => match self.a.table.field(c, name) {
                        Some((_, _, f)) => f.ty.clone(),
                        None => {
                            self.err(
                                DiagnosticCode::UndefinedName,
                                format!("class '{c}' has no field '{name}'"),
                                e.span,
                            );
                            Type::Error
                        }
                    },
                    Type::Error => Type::Error,
                    other => {
                        self.err(
                            DiagnosticCode::TypeMismatch,
                            format!("type {other} has no fields"),
                            e.span,
                        );
                        Type::Error
                    }
                }
            }
            NodeKind::Block => self.block(e, expected),
            _ => {
                self.err(
                    DiagnosticCode::TypeMismatch,
                    format!("{} is not an expression", e.kind),
                    e.span,
                );
                Type::Error
            }
        }
    }

    fn binary(&mut self, e: &AstNode, expected: Option<&Type>) -> Type {
        let op = e.bin_op().unwrap_or(BinOp::Add);
        let (l, r) = (&e.children[0], &e.children[1]);
        if matches!(op, BinOp::And | BinOp::Or) {
            for side in [l, r] {
                let t = self.expr(side, Some(&Type::Bool));
                if t != Type::Bool {
                    self.mismatch(&Type::Bool, &t, side.span);
                }
            }
            return Type::Bool;
        }
        let hint = if op.is_arithmetic() {
            expected.filter(|t| t.is_int())
        } else {
            None
        };
        let (lt, rt) = if is_int_literal(l) && !is_int_literal(r) {
            let rt = self.expr(r, hint);
            let lh = if rt.is_int() { Some(&rt) } else { hint };
            let lt = self.expr(l, lh);
            (lt, rt)
        } else {
            let lt = self.expr(l, hint);
            let rh = if lt.is_int() { Some(&lt) } else { hint };
            let rt = self.expr(r, rh);
            (lt, rt)
        };
        if lt == Type::Error || rt == Type::Error {
            return if op.is_arithmetic() { Type::Error } else { Type::Bool };
        }
        if op.is_arithmetic() {
            if op == BinOp::Add && lt == Type::String && rt == Type::String {
                return Type::String;
            }
            if lt.is_int() && lt == rt {
                return lt;
            }
            if lt.is_int() || lt == Type::String && op == BinOp::Add {
                self.mismatch(&lt, &rt, r.span);
            } else {
                self.mismatch(&Type::Int64, &lt, l.span);
            }
            return Type::Error;
        }
        if op.is_ordering() {
            if !(lt.is_int() && lt == rt) {
                if lt.is_int() {
                    self.mismatch(&lt, &rt, r.span);
                } else {
                    self.mismatch(&Type::Int64, &lt, l.span);
                }
            }
            return Type::Bool;
        }
        let comparable = lt == rt && lt != Type::Unit || lt.is_class() && rt.is_class();
        if !comparable {
            self.mismatch(&lt, &rt, r.span);
        }
        Type::Bool
    }

    fn call(&mut self, e: &AstNode) -> Type {
        let name = e.name().unwrap_or("").to_string();
        if self.class_names.contains(&name) {
            self.a.calls.insert(e.id, CallKind::Constructor(name.clone()));
            let params = self.a.table.effective_ctor(&name);
            self.args(e, e.args(), &params);
            return Type::Class(name);
        }
        let this_method = self
            .ctx
            .class
            .as_deref()
            .and_then(|c| self.a.table.method(c, &name))
            .map(|(_, m)| FnSig {
                params: m.params.clone(),
                ret: m.ret.clone(),
            });
        if let Some(sig) = this_method {
            self.a.calls.insert(e.id, CallKind::ThisMethod(name));
            self.args(e, e.args(), &sig.params);
            return sig.ret;
        }
        if let Some(sig) = self.a.functions.get(&name).cloned() {
            self.a.calls.insert(e.id, CallKind::Function(name));
            self.args(e, e.args(), &sig.params);
            return sig.ret;
        }
        self.err(
            DiagnosticCode::UndefinedName,
            format!("undefined function '{name}'"),
            e.span,
        );
        self.args_unchecked(e.args());
        Type::Error
    }

    fn args(&mut self, call: &AstNode, args: &[AstNode], params: &[Type]) {
        if args.len() != params.len() {
            self.err(
                DiagnosticCode::TypeMismatch,
                format!("expected {} argument(s), found {}", params.len(), args.len()),
                call.span,
            );
            self.args_unchecked(args);
            return;
        }
        for (a, p) in args.iter().zip(params) {
            let t = self.expr(a, Some(p));
            if !self.a.table.assignable(p, &t) {
                self.mismatch(p, &t, a.span);
            }
        }
    }

    fn args_unchecked(&mut self, args: &[AstNode]) {
        for a in args {
            self.expr(a, None);
        }
    }

    /// A class whose construction transitively constructs itself. Edges are
    /// the superclass, constructor calls in `init` bodies and, unless the
    /// original asymmetric check (D5) is selected, constructor calls in
    /// field initializers.
    fn construction_cycles(&mut self, p: &Program) {
        let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let field_positions = !self.defects.has(DefectId::D5);
        for class in p.classes() {
            let name = class.name().unwrap_or("").to_string();
            let mut out = BTreeSet::new();
            if let Some(s) = self.a.table.get(&name).and_then(|c| c.superclass.clone()) {
                out.insert(s);
            }
            for m in class.members() {
                let scan = match m.kind {
                    NodeKind::CtorDecl => m.body(),
                    NodeKind::FieldDecl if field_positions => m.initializer(),
                    _ => None,
                };
                if let Some(root) = scan {
                    visit(root, &mut |n| {
                        if let Some(CallKind::Constructor(c)) = self.a.calls.get(&n.id) {
                            out.insert(c.clone());
                        }
                    });
                }
            }
            edges.insert(name, out);
        }
        for class in p.classes() {
            let name = class.name().unwrap_or("");
            let mut stack: Vec<&str> = edges.get(name).into_iter().flatten().map(String::as_str).collect();
            let mut seen = BTreeSet::new();
            let mut cyclic = false;
            while let Some(c) = stack.pop() {
                if c == name {
                    cyclic = true;
                    break;
                }
                if seen.insert(c) {
                    stack.extend(edges.get(c).into_iter().flatten().map(String::as_str));
                }
            }
            if cyclic {
                self.err(
                    DiagnosticCode::CircularDep,
                    format!("circular dependency: constructing '{name}' requires constructing '{name}'"),
                    class.span,
                );
            }
        }
    }
}
