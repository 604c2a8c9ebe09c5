//! Reference tree-walking interpreter.
//!
//! Shares nothing with the compiler and VM beyond the front end: it resolves
//! names and dispatches methods on its own, computes in `i128` and range
//! checks every result. It always implements the fixed language.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;
use std::time::Instant;

use crate::ast::{AstNode, BinOp, Lit, NodeKind, Program, UnOp};
use crate::checker::{self, Analysis};
use crate::defects::DefectSet;
use crate::diag::DiagnosticCode;
use crate::outcome::Outcome;
use crate::types::Type;
use crate::vm::Limits;

const INTERP_STACK: usize = 256 << 20;

pub fn interpret(program: &Program) -> Outcome {
    interpret_with(program, &Limits::default())
}

pub fn interpret_with(program: &Program, limits: &Limits) -> Outcome {
    let (analysis, diags) = checker::analyze(program, &DefectSet::none());
    if !diags.is_empty() {
        return Outcome::CompileError { diagnostics: diags };
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("interp".into())
            .stack_size(INTERP_STACK)
            .spawn_scoped(s, || Interp::new(program, &analysis, *limits).run())
            .expect("spawn interpreter thread")
            .join()
            .expect("interpreter panicked")
    })
}

#[derive(Debug, Clone)]
enum V {
    Int(i128, bool),
    Bool(bool),
    Str(Rc<String>),
    Unit,
    Null,
    Obj(Rc<RefCell<Obj>>),
}

#[derive(Debug)]
struct Obj {
    class: String,
    fields: BTreeMap<String, V>,
}

enum Stop {
    Return(V),
    Trap(DiagnosticCode),
    Timeout,
}

type R<T = V> = Result<T, Stop>;

struct Scope {
    vars: Vec<HashMap<String, V>>,
    this: Option<Rc<RefCell<Obj>>>,
    class: Option<String>,
}

impl Scope {
    fn new(this: Option<Rc<RefCell<Obj>>>, class: Option<String>) -> Self {
        Scope {
            vars: vec![HashMap::new()],
            this,
            class,
        }
    }

    fn lookup(&mut self, name: &str) -> Option<&mut V> {
        self.vars.iter_mut().rev().find_map(|s| s.get_mut(name))
    }

    fn declare(&mut self, name: &str, v: V) {
        self.vars.last_mut().expect("scope").insert(name.to_string(), v);
    }
}

struct Interp<'p> {
    a: &'p Analysis,
    classes: HashMap<&'p str, &'p AstNode>,
    funcs: HashMap<&'p str, &'p AstNode>,
    global_decls: Vec<&'p AstNode>,
    globals: HashMap<String, V>,
    out: String,
    depth: usize,
    steps: u64,
    limits: Limits,
    deadline: Instant,
}

fn zero(t: &Type) -> V {
    match t {
        Type::Int64 => V::Int(0, false),
        Type::Int8 => V::Int(0, true),
        Type::Bool => V::Bool(false),
        Type::String => V::Str(Rc::new(String::new())),
        Type::Class(_) => V::Null,
        Type::Unit | Type::Error => V::Unit,
    }
}

fn int(v: i128, narrow: bool) -> R {
    let (lo, hi) = if narrow {
        (-128, 127)
    } else {
        (i64::MIN as i128, i64::MAX as i128)
    };
    if v < lo || v > hi {
        Err(Stop::Trap(DiagnosticCode::Overflow))
    } else {
        Ok(V::Int(v, narrow))
    }
}

fn values_equal(a: &V, b: &V) -> bool {
    match (a, b) {
        (V::Int(x, _), V::Int(y, _)) => x == y,
        (V::Bool(x), V::Bool(y)) => x == y,
        (V::Str(x), V::Str(y)) => x == y,
        (V::Unit, V::Unit) | (V::Null, V::Null) => true,
        (V::Obj(x), V::Obj(y)) => Rc::ptr_eq(x, y),
        _ => false,
    }
}

impl<'p> Interp<'p> {
    fn new(program: &'p Program, a: &'p Analysis, limits: Limits) -> Self {
        let mut classes = HashMap::new();
        let mut funcs = HashMap::new();
        let mut global_decls = Vec::new();
        for item in program.items() {
            match item.kind {
                NodeKind::ClassDecl => {
                    classes.insert(item.name().unwrap_or(""), item);
                }
                NodeKind::FuncDecl => {
                    funcs.insert(item.name().unwrap_or(""), item);
                }
                NodeKind::VarDecl => global_decls.push(item),
                _ => {}
            }
        }
        Interp {
            a,
            classes,
            funcs,
            global_decls,
            globals: HashMap::new(),
            out: String::new(),
            depth: 0,
            steps: 0,
            limits,
            deadline: Instant::now() + limits.timeout,
        }
    }

    fn run(mut self) -> Outcome {
        let result = self.globals_then_main();
        let stdout = self.out;
        match result {
            Ok(V::Int(exit, _)) => Outcome::Ran {
                stdout,
                exit: exit as i64,
            },
            Ok(_) => Outcome::Ran { stdout, exit: 0 },
            Err(Stop::Trap(code)) => Outcome::RuntimeError { code, stdout },
            Err(Stop::Timeout) => Outcome::Timeout { stdout },
            Err(Stop::Return(_)) => unreachable!("return escaped a function"),
        }
    }

    fn globals_then_main(&mut self) -> R {
        for g in &self.global_decls {
            let t = self.a.var_types.get(&g.id).cloned().unwrap_or(Type::Error);
            self.globals.insert(g.name().unwrap_or("").to_string(), zero(&t));
        }
        self.enter()?;
        let mut scope = Scope::new(None, None);
        for g in self.global_decls.clone() {
            if let Some(init) = g.initializer() {
                let v = self.eval(init, &mut scope)?;
                self.globals.insert(g.name().unwrap_or("").to_string(), v);
            }
        }
        self.depth -= 1;
        let main = *self.funcs.get("main").expect("checked program has main");
        self.invoke(main, None, None, Vec::new())
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.limits.step_limit || (self.steps.is_multiple_of(1024) && Instant::now() >= self.deadline) {
            return Err(Stop::Timeout);
        }
        Ok(())
    }

    fn enter(&mut self) -> R<()> {
        self.depth += 1;
        if self.depth > self.limits.max_depth {
            return Err(Stop::Trap(DiagnosticCode::StackOverflow));
        }
        Ok(())
    }

    /// Call a function or method body with `args` bound to its parameters.
    fn invoke(&mut self, f: &'p AstNode, this: Option<Rc<RefCell<Obj>>>, class: Option<String>, args: Vec<V>) -> R {
        self.enter()?;
        let mut scope = Scope::new(this, class);
        for (p, v) in f.params().zip(args) {
            scope.declare(p.name().unwrap_or(""), v);
        }
        let body = f.body().expect("function body");
        let result = match self.block(body, &mut scope) {
            Ok(v) => Ok(v),
            Err(Stop::Return(v)) => Ok(v),
            Err(e) => Err(e),
        };
        self.depth -= 1;
        let unit = f.type_ann().is_none_or(|t| t.name() == Some("Unit"));
        result.map(|v| if unit { V::Unit } else { v })
    }

    fn construct(&mut self, class: &str, args: Vec<V>) -> R {
        let fields = self
            .a
            .table
            .all_fields(class)
            .into_iter()
            .map(|(_, f)| (f.name.clone(), zero(&f.ty)))
            .collect();
        let obj = Rc::new(RefCell::new(Obj {
            class: class.to_string(),
            fields,
        }));
        self.run_ctor(class, &obj, args)?;
        Ok(V::Obj(obj))
    }

    fn run_ctor(&mut self, class: &str, obj: &Rc<RefCell<Obj>>, args: Vec<V>) -> R<()> {
        self.enter()?;
        let decl = self.classes[class];
        let sup = decl.superclass();
        let init = decl.members().iter().find(|m| m.kind == NodeKind::CtorDecl);
        let mut scope = Scope::new(Some(obj.clone()), Some(class.to_string()));
        let args = match (sup, init) {
            (Some(s), Some(_)) => {
                self.run_ctor(s, obj, Vec::new())?;
                args
            }
            (Some(s), None) => {
                self.run_ctor(s, obj, args)?;
                Vec::new()
            }
            (None, _) => args,
        };
        for f in decl.members().iter().filter(|m| m.kind == NodeKind::FieldDecl) {
            if let Some(e) = f.initializer() {
                let v = self.eval(e, &mut scope)?;
                obj.borrow_mut().fields.insert(f.name().unwrap_or("").to_string(), v);
            }
        }
        if let Some(init) = init {
            let mut scope = Scope::new(Some(obj.clone()), Some(class.to_string()));
            for (p, v) in init.params().zip(args) {
                scope.declare(p.name().unwrap_or(""), v);
            }
            match self.block(init.body().expect("init body"), &mut scope) {
                Ok(_) | Err(Stop::Return(_)) => {}
                Err(e) => return Err(e),
            }
        }
        self.depth -= 1;
        Ok(())
    }

    fn block(&mut self, b: &'p AstNode, scope: &mut Scope) -> R {
        scope.vars.push(HashMap::new());
        let r = self.block_inner(b, scope);
        scope.vars.pop();
        r
    }

    fn block_inner(&mut self, b: &'p AstNode, scope: &mut Scope) -> R {
        for s in b.stmts() {
            self.stmt(s, scope)?;
        }
        match b.tail() {
            Some(t) => self.eval(t, scope),
            None => Ok(V::Unit),
        }
    }

    fn is_field(&self, scope: &Scope, name: &str) -> bool {
        scope
            .class
            .as_deref()
            .is_some_and(|c| self.a.table.field(c, name).is_some())
    }

    fn stmt(&mut self, s: &'p AstNode, scope: &mut Scope) -> R<()> {
        self.tick()?;
        match s.kind {
            NodeKind::VarDecl => {
                let v = match s.initializer() {
                    Some(e) => self.eval(e, scope)?,
                    None => zero(self.a.var_types.get(&s.id).unwrap_or(&Type::Error)),
                };
                scope.declare(s.name().unwrap_or(""), v);
            }
            NodeKind::AssignExpr => {
                let target = &s.children[0];
                if target.kind == NodeKind::MemberExpr {
                    let recv = self.eval(&target.children[0], scope)?;
                    let v = self.eval(&s.children[1], scope)?;
                    let V::Obj(o) = recv else {
                        return Err(Stop::Trap(DiagnosticCode::VmAbort));
                    };
                    o.borrow_mut().fields.insert(target.name().unwrap_or("").to_string(), v);
                    return Ok(());
                }
                let name = target.name().unwrap_or("");
                let v = self.eval(&s.children[1], scope)?;
                if let Some(slot) = scope.lookup(name) {
                    *slot = v;
                } else if self.is_field(scope, name) {
                    let this = scope.this.as_ref().expect("field access has this");
                    this.borrow_mut().fields.insert(name.to_string(), v);
                } else {
                    self.globals.insert(name.to_string(), v);
                }
            }
            NodeKind::WhileStmt => loop {
                self.tick()?;
                match self.eval(&s.children[0], scope)? {
                    V::Bool(true) => {
                        self.block(&s.children[1], scope)?;
                    }
                    _ => break,
                }
            },
            NodeKind::ReturnStmt => {
                let v = match s.children.first() {
                    Some(e) => self.eval(e, scope)?,
                    None => V::Unit,
                };
                return Err(Stop::Return(v));
            }
            NodeKind::PrintStmt => {
                let v = self.eval(&s.children[0], scope)?;
                match v {
                    V::Int(i, _) => self.out.push_str(&i.to_string()),
                    V::Bool(b) => self.out.push_str(&b.to_string()),
                    V::Str(s) => self.out.push_str(&s),
                    V::Unit => self.out.push_str("()"),
                    V::Null | V::Obj(_) => return Err(Stop::Trap(DiagnosticCode::VmAbort)),
                }
                self.out.push('\n');
            }
            _ => {
                self.eval(s, scope)?;
            }
        }
        Ok(())
    }

    fn args(&mut self, e: &'p AstNode, scope: &mut Scope) -> R<Vec<V>> {
        e.args().iter().map(|a| self.eval(a, scope)).collect()
    }

    fn call_method(&mut self, recv: V, method: &str, args: Vec<V>) -> R {
        let V::Obj(o) = recv else {
            return Err(Stop::Trap(DiagnosticCode::VmAbort));
        };
        let class = o.borrow().class.clone();
        let (owner, _) = self.a.table.method(&class, method).expect("checked method");
        let owner = owner.to_string();
        let decl = self.classes[owner.as_str()]
            .members()
            .iter()
            .find(|m| m.kind == NodeKind::MethodDecl && m.name() == Some(method))
            .expect("method declaration");
        self.invoke(decl, Some(o), Some(owner), args)
    }

    fn eval(&mut self, e: &'p AstNode, scope: &mut Scope) -> R {
        self.tick()?;
        match e.kind {
            NodeKind::Literal => Ok(match e.literal().expect("literal") {
                Lit::Int(v) => V::Int(*v, self.a.type_of(e) == Some(&Type::Int8)),
                Lit::Bool(b) => V::Bool(*b),
                Lit::Str(s) => V::Str(Rc::new(s.clone())),
            }),
            NodeKind::NameRef => {
                let name = e.name().unwrap_or("");
                if let Some(v) = scope.lookup(name) {
                    return Ok(v.clone());
                }
                if self.is_field(scope, name) {
                    let this = scope.this.as_ref().expect("field access has this");
                    return Ok(this.borrow().fields[name].clone());
                }
                Ok(self.globals[name].clone())
            }
            NodeKind::ThisExpr => Ok(V::Obj(scope.this.clone().expect("this inside a class"))),
            NodeKind::UnaryExpr => {
                let v = self.eval(&e.children[0], scope)?;
                match (e.un_op(), v) {
                    (Some(UnOp::Neg), V::Int(i, n)) => int(-i, n),
                    (_, V::Bool(b)) => Ok(V::Bool(!b)),
                    _ => Err(Stop::Trap(DiagnosticCode::VmAbort)),
                }
            }
            NodeKind::BinaryExpr => self.binary(e, scope),
            NodeKind::IfExpr => match self.eval(&e.children[0], scope)? {
                V::Bool(true) => self.eval(&e.children[1], scope),
                _ => match e.children.get(2) {
                    Some(alt) => self.eval(alt, scope),
                    None => Ok(V::Unit),
                },
            },
            NodeKind::Block => self.block(e, scope),
            NodeKind::CallExpr => {
                let name = e.name().unwrap_or("");
                let args = self.args(e, scope)?;
                if self.classes.contains_key(name) {
                    return self.construct(name, args);
                }
                let own_method = scope
                    .class
                    .as_deref()
                    .is_some_and(|c| self.a.table.method(c, name).is_some());
                if own_method {
                    let this = V::Obj(scope.this.clone().expect("method call has this"));
                    return self.call_method(this, name, args);
                }
                let f = *self.funcs.get(name).expect("checked function");
                self.invoke(f, None, None, args)
            }
            NodeKind::MethodCallExpr => {
                let recv = self.eval(&e.children[0], scope)?;
                let args = self.args(e, scope)?;
                self.call_method(recv, e.name().unwrap_or(""), args)
            }
            NodeKind::MemberExpr => match self.eval(&e.children[0], scope)? {
                V::Obj(o) => Ok(o.borrow().fields[e.name().unwrap_or("")].clone()),
                _ => Err(Stop::Trap(DiagnosticCode::VmAbort)),
            },
            k => unreachable!("{k:?} is not an expression"),
        }
    }

    fn binary(&mut self, e: &'p AstNode, scope: &mut Scope) -> R {
        let op = e.bin_op().expect("binary operator");
        let l = self.eval(&e.children[0], scope)?;
        match (op, &l) {
            (BinOp::And, V::Bool(false)) => return Ok(V::Bool(false)),
            (BinOp::Or, V::Bool(true)) => return Ok(V::Bool(true)),
            (BinOp::And | BinOp::Or, _) => return self.eval(&e.children[1], scope),
            _ => {}
        }
        let r = self.eval(&e.children[1], scope)?;
        match op {
            BinOp::Eq => return Ok(V::Bool(values_equal(&l, &r))),
            BinOp::Ne => return Ok(V::Bool(!values_equal(&l, &r))),
            _ => {}
        }
        match (l, r) {
            (V::Str(a), V::Str(b)) if op == BinOp::Add => Ok(V::Str(Rc::new(format!("{a}{b}")))),
            (V::Int(a, n), V::Int(b, _)) => match op {
                BinOp::Add => int(a + b, n),
                BinOp::Sub => int(a - b, n),
                BinOp::Mul => int(a * b, n),
                BinOp::Div | BinOp::Rem if b == 0 => Err(Stop::Trap(DiagnosticCode::DivZero)),
                BinOp::Div => int(a / b, n),
                BinOp::Rem => int(a % b, n),
                BinOp::Lt => Ok(V::Bool(a < b)),
                BinOp::Le => Ok(V::Bool(a <= b)),
                BinOp::Gt => Ok(V::Bool(a > b)),
                BinOp::Ge => Ok(V::Bool(a >= b)),
                _ => Err(Stop::Trap(DiagnosticCode::VmAbort)),
            },
            _ => Err(Stop::Trap(DiagnosticCode::VmAbort)),
        }
    }
}
