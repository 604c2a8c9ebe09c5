//! Stack-machine bytecode produced by the compiler and executed by the VM.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Width {
    W64,
    W8,
}

impl Width {
    pub fn range(self) -> (i64, i64) {
        match self {
            Width::W64 => (i64::MIN, i64::MAX),
            Width::W8 => (i8::MIN as i64, i8::MAX as i64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

/// Zero value of a slot before it is first written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Const {
    Int(i64),
    Bool(bool),
    /// Index into [`Module::strings`].
    Str(u32),
    Unit,
    Null,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Instr {
    Push(Const),
    Pop,
    LoadLocal(u32),
    StoreLocal(u32),
    LoadGlobal(u32),
    StoreGlobal(u32),
    /// `[obj] -> [value]`
    LoadField(u32),
    /// `[obj, value] -> []`
    StoreField(u32),
    /// `[a, b] -> [a op b]`, trapping on overflow and division by zero.
    Arith(ArithOp, Width),
    Neg(Width),
    Not,
    Cmp(CmpOp),
    Eq,
    Ne,
    Concat,
    Jump(u32),
    JumpIfFalse(u32),
    /// Call a function with the top `argc` values as arguments.
    Call {
        func: u32,
        argc: u32,
    },
    /// `[recv, args..]`: dispatch through the receiver's vtable.
    CallMethod {
        slot: u32,
        argc: u32,
    },
    /// Push a new instance with zeroed fields.
    New(u32),
    Return,
    Print,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Function {
    pub name: String,
    /// Parameter count, including `this` for methods and constructors.
    pub params: u32,
    pub locals: u32,
    /// Zero values of the non-parameter locals.
    pub local_defaults: Vec<Const>,
    pub code: Vec<Instr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassLayout {
    pub name: String,
    pub field_defaults: Vec<Const>,
    /// Method implementation per slot. `None` is never produced by a
    /// correct compiler.
    pub vtable: Vec<Option<u32>>,
    pub ctor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Module {
    pub functions: Vec<Function>,
    pub classes: Vec<ClassLayout>,
    pub strings: Vec<String>,
    pub global_defaults: Vec<Const>,
    /// Runs the global initializers.
    pub init: u32,
    pub main: u32,
}

impl Module {
    /// Structural invariants: jump targets, function, class, string and
    /// slot indices are all in range.
    pub fn validate(&self) -> Result<(), String> {
        let nf = self.functions.len() as u32;
        for f in &self.functions {
            let len = f.code.len() as u32;
            for (pc, ins) in f.code.iter().enumerate() {
                let bad = match *ins {
                    Instr::Jump(t) | Instr::JumpIfFalse(t) => t >= len,
                    Instr::Call { func, .. } => func >= nf,
                    Instr::New(c) => c as usize >= self.classes.len(),
                    Instr::Push(Const::Str(s)) => s as usize >= self.strings.len(),
                    Instr::LoadLocal(l) | Instr::StoreLocal(l) => l >= f.locals,
                    Instr::LoadGlobal(g) | Instr::StoreGlobal(g) => g as usize >= self.global_defaults.len(),
                    _ => false,
                };
                if bad {
                    return Err(format!("{}: invalid operand at {pc}: {ins:?}", f.name));
                }
            }
            if f.code.last() != Some(&Instr::Return) {
                return Err(format!("{}: does not end in Return", f.name));
            }
        }
        for c in &self.classes {
            if c.ctor >= nf || c.vtable.iter().flatten().any(|&m| m >= nf) {
                return Err(format!("class {}: invalid function index", c.name));
            }
        }
        Ok(())
    }

    /// Whether every vtable slot holds an implementation.
    pub fn vtables_complete(&self) -> bool {
        self.classes.iter().all(|c| c.vtable.iter().all(Option::is_some))
    }
}
