//! Code generation: checked AST to bytecode. This is the compiler under
//! test; three planted defects (D1, D2, D6) live here.

use std::collections::HashMap;

use crate::ast::{AstNode, BinOp, Lit, NodeKind, Program, UnOp};
use crate::bytecode::{ArithOp, ClassLayout, CmpOp, Const, Function, Instr, Module, Width};
use crate::checker::{Analysis, CallKind, NameKind};
use crate::defects::{self, DefectId, DefectSet};
use crate::outcome::Outcome;
use crate::types::Type;

pub const ICE_MESSAGE: &str = "internal compiler error: semantic error(s) in IR";

/// Compile a program that passed the checker. The only failure is a
/// compiler crash.
pub fn compile(program: &Program, analysis: &Analysis, defects: &DefectSet) -> Result<Module, Outcome> {
    Codegen::new(program, analysis, defects)
        .module()
        .map_err(|Ice| Outcome::CompilerCrash {
            message: ICE_MESSAGE.to_string(),
        })
}

struct Ice;

type CResult<T = ()> = Result<T, Ice>;

struct Codegen<'a> {
    program: &'a Program,
    a: &'a Analysis,
    defects: &'a DefectSet,
    strings: Vec<String>,
    string_ids: HashMap<String, u32>,
    functions: Vec<Option<Function>>,
    func_ids: HashMap<String, u32>,
    ctor_ids: HashMap<String, u32>,
    method_ids: HashMap<(String, String), u32>,
    class_ids: HashMap<String, u32>,
    global_ids: HashMap<String, u32>,
}

struct FnCx {
    code: Vec<Instr>,
    scopes: Vec<HashMap<String, u32>>,
    locals: u32,
    params: u32,
    local_defaults: Vec<Const>,
    class: Option<String>,
    is_ctor: bool,
    returns_unit: bool,
}

impl FnCx {
    fn new(params: &[String], class: Option<String>, is_ctor: bool, returns_unit: bool) -> Self {
        let mut scope = HashMap::new();
        for (i, p) in params.iter().enumerate() {
            scope.insert(p.clone(), i as u32);
        }
        FnCx {
            code: Vec::new(),
            scopes: vec![scope],
            locals: params.len() as u32,
            params: params.len() as u32,
            local_defaults: Vec::new(),
            class,
            is_ctor,
            returns_unit,
        }
    }

    fn emit(&mut self, i: Instr) -> usize {
        self.code.push(i);
        self.code.len() - 1
    }

    fn here(&self) -> u32 {
        self.code.len() as u32
    }

    fn patch(&mut self, at: usize, target: u32) {
        match &mut self.code[at] {
            Instr::Jump(t) | Instr::JumpIfFalse(t) => *t = target,
            _ => unreachable!("patching a non-jump"),
        }
    }

    fn new_local(&mut self, name: &str, zero: Const) -> u32 {
        let slot = self.locals;
        self.locals += 1;
        self.local_defaults.push(zero);
        self.scopes.last_mut().expect("scope").insert(name.to_string(), slot);
        slot
    }

    fn local(&self, name: &str) -> Option<u32> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn finish(self, name: String) -> Function {
        Function {
            name,
            params: self.params,
            locals: self.locals,
            local_defaults: self.local_defaults,
            code: self.code,
        }
    }
}

fn width(t: Option<&Type>) -> Width {
    match t {
        Some(Type::Int8) => Width::W8,
        _ => Width::W64,
    }
}

fn is_ctor_call(a: &Analysis, n: &AstNode) -> bool {
    n.kind == NodeKind::CallExpr && matches!(a.calls.get(&n.id), Some(CallKind::Constructor(_)))
}

impl<'a> Codegen<'a> {
    fn new(program: &'a Program, a: &'a Analysis, defects: &'a DefectSet) -> Self {
        Codegen {
            program,
            a,
            defects,
            strings: Vec::new(),
            string_ids: HashMap::new(),
            functions: Vec::new(),
            func_ids: HashMap::new(),
            ctor_ids: HashMap::new(),
            method_ids: HashMap::new(),
            class_ids: HashMap::new(),
            global_ids: HashMap::new(),
        }
    }

    fn reserve(&mut self) -> u32 {
        self.functions.push(None);
        (self.functions.len() - 1) as u32
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&i) = self.string_ids.get(s) {
            return i;
        }
        let i = self.strings.len() as u32;
        self.strings.push(s.to_string());
        self.string_ids.insert(s.to_string(), i);
        i
    }

    fn zero(&mut self, t: &Type) -> Const {
        match t {
            Type::Int64 | Type::Int8 => Const::Int(0),
            Type::Bool => Const::Bool(false),
            Type::String => Const::Str(self.intern("")),
            Type::Class(_) => Const::Null,
            Type::Unit | Type::Error => Const::Unit,
        }
    }

    fn module(mut self) -> CResult<Module> {
        let table = &self.a.table;
        let init = self.reserve();
        let items = self.program.items();
        for f in items.iter().filter(|i| i.kind == NodeKind::FuncDecl) {
            let id = self.reserve();
            self.func_ids.insert(f.name().unwrap_or("").to_string(), id);
        }
        for (i, name) in table.classes.keys().enumerate() {
            self.class_ids.insert(name.clone(), i as u32);
            let id = self.reserve();
            self.ctor_ids.insert(name.clone(), id);
        }
        for c in self.program.classes() {
            let cname = c.name().unwrap_or("").to_string();
            for m in c.members().iter().filter(|m| m.kind == NodeKind::MethodDecl) {
                let id = self.reserve();
                self.method_ids
                    .insert((cname.clone(), m.name().unwrap_or("").to_string()), id);
            }
        }
        let globals: Vec<(String, Type)> = self.a.globals.clone();
        let mut global_defaults = Vec::new();
        for (i, (name, ty)) in globals.iter().enumerate() {
            self.global_ids.insert(name.clone(), i as u32);
            global_defaults.push(self.zero(ty));
        }

        let init_fn = self.global_init()?;
        self.functions[init as usize] = Some(init_fn);
        for f in items.iter().filter(|i| i.kind == NodeKind::FuncDecl) {
            let id = self.func_ids[f.name().unwrap_or("")];
            let func = self.function(f, None)?;
            self.functions[id as usize] = Some(func);
        }
        for c in self.program.classes() {
            let cname = c.name().unwrap_or("").to_string();
            let ctor = self.constructor(c)?;
            self.functions[self.ctor_ids[&cname] as usize] = Some(ctor);
            for m in c.members().iter().filter(|m| m.kind == NodeKind::MethodDecl) {
                let id = self.method_ids[&(cname.clone(), m.name().unwrap_or("").to_string())];
                let func = self.function(m, Some(cname.clone()))?;
                self.functions[id as usize] = Some(func);
            }
        }

        let broken = if self.defects.has(DefectId::D6) {
            defects::subclass_field_stores(self.program, table, self.a)
        } else {
            Vec::new()
        };
        let mut classes = Vec::new();
        for name in table.classes.keys() {
            let fields: Vec<Type> = table.all_fields(name).iter().map(|(_, f)| f.ty.clone()).collect();
            let field_defaults = fields.iter().map(|t| self.zero(t)).collect();
            let vtable = table
                .vtable(name)
                .into_iter()
                .map(|(m, owner)| {
                    if broken.contains(name) {
                        None
                    } else {
                        self.method_ids.get(&(owner, m)).copied()
                    }
                })
                .collect();
            classes.push(ClassLayout {
                name: name.clone(),
                field_defaults,
                vtable,
                ctor: self.ctor_ids[name],
            });
        }
        let main = self.func_ids.get("main").copied().unwrap_or(init);
        Ok(Module {
            functions: self
                .functions
                .into_iter()
                .map(|f| f.expect("every function compiled"))
                .collect(),
            classes,
            strings: self.strings,
            global_defaults,
            init,
            main,
        })
    }

    fn global_init(&mut self) -> CResult<Function> {
        let mut cx = FnCx::new(&[], None, false, true);
        for g in self.program.items().iter().filter(|i| i.kind == NodeKind::VarDecl) {
            let Some(init) = g.initializer() else {
                continue;
            };
            let slot = self.global_ids[g.name().unwrap_or("")];
            self.expr(&mut cx, init)?;
            if self.defects.has(DefectId::D1) && init.kind == NodeKind::IfExpr {
                cx.emit(Instr::Pop);
                let ty = self.a.var_types.get(&g.id).cloned().unwrap_or(Type::Error);
                let zero = self.zero(&ty);
                cx.emit(Instr::Push(zero));
            }
            cx.emit(Instr::StoreGlobal(slot));
        }
        cx.emit(Instr::Push(Const::Unit));
        cx.emit(Instr::Return);
        Ok(cx.finish("<init>".into()))
    }

    fn function(&mut self, f: &AstNode, class: Option<String>) -> CResult<Function> {
        let mut params: Vec<String> = Vec::new();
        if class.is_some() {
            params.push("this".into());
        }
        params.extend(f.params().map(|p| p.name().unwrap_or("").to_string()));
        let returns_unit = f.type_ann().is_none_or(|t| t.name() == Some("Unit"));
        let name = match &class {
            Some(c) => format!("{c}.{}", f.name().unwrap_or("")),
            None => f.name().unwrap_or("").to_string(),
        };
        let mut cx = FnCx::new(&params, class, false, returns_unit);
        if let Some(body) = f.body() {
            self.block(&mut cx, body)?;
        }
        if returns_unit {
            cx.emit(Instr::Pop);
            cx.emit(Instr::Push(Const::Unit));
        }
        cx.emit(Instr::Return);
        Ok(cx.finish(name))
    }

    /// Constructor: superclass constructor, own field initializers, then the
    /// `init` body. Returns `this`.
    fn constructor(&mut self, class: &AstNode) -> CResult<Function> {
        let cname = class.name().unwrap_or("").to_string();
        let table = &self.a.table;
        let sup = table.get(&cname).and_then(|c| c.superclass.clone());
        let init = class.members().iter().find(|m| m.kind == NodeKind::CtorDecl);
        let mut params = vec!["this".to_string()];
        match init {
            Some(i) => params.extend(i.params().map(|p| p.name().unwrap_or("").to_string())),
            None => {
                let n = table.effective_ctor(&cname).len();
                params.extend((0..n).map(|i| format!("<arg{i}>")));
            }
        }
        let mut cx = FnCx::new(&params, Some(cname.clone()), true, true);
        if let Some(s) = &sup {
            cx.emit(Instr::LoadLocal(0));
            let argc = if init.is_some() {
                0
            } else {
                let n = params.len() as u32 - 1;
                for i in 1..=n {
                    cx.emit(Instr::LoadLocal(i));
                }
                n
            };
            cx.emit(Instr::Call {
                func: self.ctor_ids[s],
                argc: argc + 1,
            });
            cx.emit(Instr::Pop);
        }
        for f in class.members().iter().filter(|m| m.kind == NodeKind::FieldDecl) {
            if let Some(value) = f.initializer() {
                let (slot, _, _) = table.field(&cname, f.name().unwrap_or("")).expect("field in table");
                cx.emit(Instr::LoadLocal(0));
                self.expr(&mut cx, value)?;
                cx.emit(Instr::StoreField(slot as u32));
            }
        }
        if let Some(body) = init.and_then(|i| i.body()) {
            self.block(&mut cx, body)?;
            cx.emit(Instr::Pop);
        }
        cx.emit(Instr::LoadLocal(0));
        cx.emit(Instr::Return);
        Ok(cx.finish(format!("{cname}.init")))
    }

    /// Emit a block leaving its value on the stack.
    fn block(&mut self, cx: &mut FnCx, b: &AstNode) -> CResult {
        cx.scopes.push(HashMap::new());
        for s in b.stmts() {
            self.stmt(cx, s)?;
        }
        match b.tail() {
            Some(t) => self.expr(cx, t)?,
            None => {
                cx.emit(Instr::Push(Const::Unit));
            }
        }
        cx.scopes.pop();
        Ok(())
    }

    fn stmt(&mut self, cx: &mut FnCx, s: &AstNode) -> CResult {
        match s.kind {
            NodeKind::VarDecl => {
                let ty = self.a.var_types.get(&s.id).cloned().unwrap_or(Type::Error);
                let zero = self.zero(&ty);
                match s.initializer() {
                    Some(init) => self.expr(cx, init)?,
                    None => {
                        cx.emit(Instr::Push(zero));
                    }
                }
                let slot = cx.new_local(s.name().unwrap_or(""), zero);
                cx.emit(Instr::StoreLocal(slot));
            }
            NodeKind::AssignExpr => {
                let (target, value) = (&s.children[0], &s.children[1]);
                match target.kind {
                    NodeKind::MemberExpr => {
                        self.expr(cx, &target.children[0])?;
                        self.expr(cx, value)?;
                        let slot = self.member_slot(target);
                        cx.emit(Instr::StoreField(slot));
                    }
                    _ => {
                        let name = target.name().unwrap_or("");
                        match self.a.names.get(&target.id) {
                            Some(NameKind::Local) => {
                                self.expr(cx, value)?;
                                let slot = cx.local(name).expect("resolved local");
                                cx.emit(Instr::StoreLocal(slot));
                            }
                            Some(NameKind::Field) => {
                                cx.emit(Instr::LoadLocal(0));
                                self.expr(cx, value)?;
                                let slot = self.this_field_slot(cx, name);
                                cx.emit(Instr::StoreField(slot));
                            }
                            _ => {
                                self.expr(cx, value)?;
                                cx.emit(Instr::StoreGlobal(self.global_ids[name]));
                            }
                        }
                    }
                }
            }
            NodeKind::WhileStmt => {
                let top = cx.here();
                self.expr(cx, &s.children[0])?;
                let exit = cx.emit(Instr::JumpIfFalse(0));
                self.block(cx, &s.children[1])?;
                cx.emit(Instr::Pop);
                cx.emit(Instr::Jump(top));
                let end = cx.here();
                cx.patch(exit, end);
            }
            NodeKind::ReturnStmt => {
                if cx.is_ctor {
                    cx.emit(Instr::LoadLocal(0));
                } else {
                    match s.children.first() {
                        Some(v) => {
                            self.expr(cx, v)?;
                            if cx.returns_unit {
                                cx.emit(Instr::Pop);
                                cx.emit(Instr::Push(Const::Unit));
                            }
                        }
                        None => {
                            cx.emit(Instr::Push(Const::Unit));
                        }
                    }
                }
                cx.emit(Instr::Return);
            }
            NodeKind::PrintStmt => {
                self.expr(cx, &s.children[0])?;
                cx.emit(Instr::Print);
            }
            _ => {
                self.expr(cx, s)?;
                cx.emit(Instr::Pop);
            }
        }
        Ok(())
    }

    fn this_field_slot(&self, cx: &FnCx, name: &str) -> u32 {
        let class = cx.class.as_deref().expect("field access inside a class");
        self.a.table.field(class, name).expect("resolved field").0 as u32
    }

    fn member_slot(&self, member: &AstNode) -> u32 {
        let recv = self
            .a
            .type_of(&member.children[0])
            .and_then(|t| t.class_name())
            .expect("class receiver");
        self.a
            .table
            .field(recv, member.name().unwrap_or(""))
            .expect("resolved field")
            .0 as u32
    }

    fn expr(&mut self, cx: &mut FnCx, e: &AstNode) -> CResult {
        match e.kind {
            NodeKind::Literal => {
                let c = match e.literal() {
                    Some(Lit::Int(v)) => Const::Int(*v as i64),
                    Some(Lit::Bool(b)) => Const::Bool(*b),
                    Some(Lit::Str(s)) => Const::Str(self.intern(s)),
                    None => Const::Unit,
                };
                cx.emit(Instr::Push(c));
            }
            NodeKind::NameRef => {
                let name = e.name().unwrap_or("");
                match self.a.names.get(&e.id) {
                    Some(NameKind::Local) => {
                        cx.emit(Instr::LoadLocal(cx.local(name).expect("resolved local")));
                    }
                    Some(NameKind::Field) => {
                        let slot = self.this_field_slot(cx, name);
                        cx.emit(Instr::LoadLocal(0));
                        cx.emit(Instr::LoadField(slot));
                    }
                    _ => {
                        cx.emit(Instr::LoadGlobal(self.global_ids[name]));
                    }
                }
            }
            NodeKind::ThisExpr => {
                cx.emit(Instr::LoadLocal(0));
            }
            NodeKind::UnaryExpr => {
                self.expr(cx, &e.children[0])?;
                match e.un_op() {
                    Some(UnOp::Neg) => cx.emit(Instr::Neg(width(self.a.type_of(e)))),
                    _ => cx.emit(Instr::Not),
                };
            }
            NodeKind::BinaryExpr => self.binary(cx, e)?,
            NodeKind::IfExpr => {
                if self.defects.has(DefectId::D2) {
                    for branch in e.children.iter().skip(1) {
                        if branch.kind == NodeKind::Block && branch.tail().is_some_and(|t| is_ctor_call(self.a, t)) {
                            return Err(Ice);
                        }
                    }
                }
                self.expr(cx, &e.children[0])?;
                let to_else = cx.emit(Instr::JumpIfFalse(0));
                self.block(cx, &e.children[1])?;
                let to_end = cx.emit(Instr::Jump(0));
                let else_at = cx.here();
                cx.patch(to_else, else_at);
                match e.children.get(2) {
                    Some(alt) if alt.kind == NodeKind::Block => self.block(cx, alt)?,
                    Some(alt) => self.expr(cx, alt)?,
                    None => {
                        cx.emit(Instr::Push(Const::Unit));
                    }
                }
                let end = cx.here();
                cx.patch(to_end, end);
            }
            NodeKind::CallExpr => {
                let argc = e.args().len() as u32;
                match self.a.calls.get(&e.id).cloned() {
                    Some(CallKind::Constructor(c)) => {
                        if self.defects.has(DefectId::D2) && e.args().iter().any(|a| a.kind == NodeKind::IfExpr) {
                            return Err(Ice);
                        }
                        cx.emit(Instr::New(self.class_ids[&c]));
                        for a in e.args() {
                            self.expr(cx, a)?;
                        }
                        cx.emit(Instr::Call {
                            func: self.ctor_ids[&c],
                            argc: argc + 1,
                        });
                    }
                    Some(CallKind::ThisMethod(m)) => {
                        cx.emit(Instr::LoadLocal(0));
                        for a in e.args() {
                            self.expr(cx, a)?;
                        }
                        let class = cx.class.clone().expect("method call inside a class");
                        let slot = self.a.table.vtable_slot(&class, &m).expect("resolved method") as u32;
                        cx.emit(Instr::CallMethod { slot, argc });
                    }
                    Some(CallKind::Function(f)) => {
                        for a in e.args() {
                            self.expr(cx, a)?;
                        }
                        cx.emit(Instr::Call {
                            func: self.func_ids[&f],
                            argc,
                        });
                    }
                    None => unreachable!("unresolved call in checked program"),
                }
            }
            NodeKind::MethodCallExpr => {
                self.expr(cx, &e.children[0])?;
                for a in e.args() {
                    self.expr(cx, a)?;
                }
                let recv = self
                    .a
                    .type_of(&e.children[0])
                    .and_then(|t| t.class_name())
                    .expect("class receiver");
                let slot = self
                    .a
                    .table
                    .vtable_slot(recv, e.name().unwrap_or(""))
                    .expect("resolved method") as u32;
                cx.emit(Instr::CallMethod {
                    slot,
                    argc: e.args().len() as u32,
                });
            }
            NodeKind::MemberExpr => {
                self.expr(cx, &e.children[0])?;
                let slot = self.member_slot(e);
                cx.emit(Instr::LoadField(slot));
            }
            NodeKind::Block => self.block(cx, e)?,
            _ => unreachable!("{:?} is not an expression", e.kind),
        }
        Ok(())
    }

    fn binary(&mut self, cx: &mut FnCx, e: &AstNode) -> CResult {
        let op = e.bin_op().unwrap_or(BinOp::Add);
        let (l, r) = (&e.children[0], &e.children[1]);
        match op {
            BinOp::And => {
                self.expr(cx, l)?;
                let short = cx.emit(Instr::JumpIfFalse(0));
                self.expr(cx, r)?;
                let done = cx.emit(Instr::Jump(0));
                let at = cx.here();
                cx.patch(short, at);
                cx.emit(Instr::Push(Const::Bool(false)));
                let end = cx.here();
                cx.patch(done, end);
                return Ok(());
            }
            BinOp::Or => {
                self.expr(cx, l)?;
                let rhs = cx.emit(Instr::JumpIfFalse(0));
                cx.emit(Instr::Push(Const::Bool(true)));
                let done = cx.emit(Instr::Jump(0));
                let at = cx.here();
                cx.patch(rhs, at);
                self.expr(cx, r)?;
                let end = cx.here();
                cx.patch(done, end);
                return Ok(());
            }
            _ => {}
        }
        self.expr(cx, l)?;
        self.expr(cx, r)?;
        let w = width(self.a.type_of(e));
        let ins = match op {
            BinOp::Add if self.a.type_of(e) == Some(&Type::String) => Instr::Concat,
            BinOp::Add => Instr::Arith(ArithOp::Add, w),
            BinOp::Sub => Instr::Arith(ArithOp::Sub, w),
            BinOp::Mul => Instr::Arith(ArithOp::Mul, w),
            BinOp::Div => Instr::Arith(ArithOp::Div, w),
            BinOp::Rem => Instr::Arith(ArithOp::Rem, w),
            BinOp::Lt => Instr::Cmp(CmpOp::Lt),
            BinOp::Le => Instr::Cmp(CmpOp::Le),
            BinOp::Gt => Instr::Cmp(CmpOp::Gt),
            BinOp::Ge => Instr::Cmp(CmpOp::Ge),
            BinOp::Eq => Instr::Eq,
            BinOp::Ne => Instr::Ne,
            BinOp::And | BinOp::Or => unreachable!("handled above"),
        };
        cx.emit(ins);
        Ok(())
    }
}
