//! Bytecode interpreter with an explicit frame stack.

use std::cell::RefCell;
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bytecode::{ArithOp, CmpOp, Const, Instr, Module, Width};
use crate::diag::DiagnosticCode;
use crate::outcome::Outcome;

/// Execution budget shared by the VM and the reference interpreter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub step_limit: u64,
    /// Deepest allowed call nesting; `main` runs at depth 1.
    pub max_depth: usize,
    pub timeout: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            step_limit: 10_000_000,
            max_depth: 4096,
            timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Debug, Clone)]
enum Value {
    Int(i64),
    Bool(bool),
    Str(Rc<str>),
    Unit,
    Null,
    Obj(Rc<Object>),
}

#[derive(Debug)]
struct Object {
    class: u32,
    fields: RefCell<Vec<Value>>,
}

enum Trap {
    Runtime(DiagnosticCode),
    Timeout,
}

struct Frame {
    func: u32,
    pc: usize,
    base: usize,
}

struct Vm<'m> {
    module: &'m Module,
    limits: Limits,
    strings: Vec<Rc<str>>,
    globals: Vec<Value>,
    stack: Vec<Value>,
    out: String,
    steps: u64,
    deadline: Instant,
}

pub fn run(module: &Module, limits: &Limits) -> Outcome {
    let strings: Vec<Rc<str>> = module.strings.iter().map(|s| Rc::from(s.as_str())).collect();
    let mut vm = Vm {
        module,
        limits: *limits,
        globals: Vec::new(),
        strings,
        stack: Vec::new(),
        out: String::new(),
        steps: 0,
        deadline: Instant::now() + limits.timeout,
    };
    vm.globals = module.global_defaults.iter().map(|c| vm.constant(*c)).collect();
    let result = vm.call_entry(module.init).and_then(|_| vm.call_entry(module.main));
    let stdout = std::mem::take(&mut vm.out);
    match result {
        Ok(Value::Int(exit)) => Outcome::Ran { stdout, exit },
        Ok(_) => Outcome::Ran { stdout, exit: 0 },
        Err(Trap::Runtime(code)) => Outcome::RuntimeError { code, stdout },
        Err(Trap::Timeout) => Outcome::Timeout { stdout },
    }
}

fn abort<T>() -> Result<T, Trap> {
    Err(Trap::Runtime(DiagnosticCode::VmAbort))
}

fn arith(op: ArithOp, w: Width, a: i64, b: i64) -> Result<i64, DiagnosticCode> {
    let r = match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div | ArithOp::Rem if b == 0 => return Err(DiagnosticCode::DivZero),
        ArithOp::Div => a.checked_div(b),
        ArithOp::Rem => Some(a.wrapping_rem(b)),
    };
    let (lo, hi) = w.range();
    match r {
        Some(v) if v >= lo && v <= hi => Ok(v),
        _ => Err(DiagnosticCode::Overflow),
    }
}

impl Vm<'_> {
    fn constant(&self, c: Const) -> Value {
        match c {
            Const::Int(i) => Value::Int(i),
            Const::Bool(b) => Value::Bool(b),
            Const::Str(s) => Value::Str(self.strings[s as usize].clone()),
            Const::Unit => Value::Unit,
            Const::Null => Value::Null,
        }
    }

    fn pop(&mut self) -> Value {
        self.stack.pop().expect("operand stack underflow")
    }

    fn pop_int(&mut self) -> i64 {
        match self.pop() {
            Value::Int(i) => i,
            v => panic!("expected Int, found {v:?}"),
        }
    }

    fn pop_bool(&mut self) -> bool {
        match self.pop() {
            Value::Bool(b) => b,
            v => panic!("expected Bool, found {v:?}"),
        }
    }

    fn push_frame(&mut self, frames: &mut Vec<Frame>, func: u32, argc: usize) -> Result<(), Trap> {
        if frames.len() >= self.limits.max_depth {
            return Err(Trap::Runtime(DiagnosticCode::StackOverflow));
        }
        let f = &self.module.functions[func as usize];
        let base = self.stack.len() - argc;
        for c in f.local_defaults.clone() {
            let v = self.constant(c);
            self.stack.push(v);
        }
        frames.push(Frame { func, pc: 0, base });
        Ok(())
    }

    fn call_entry(&mut self, func: u32) -> Result<Value, Trap> {
        let mut frames = Vec::new();
        self.push_frame(&mut frames, func, 0)?;
        self.execute(frames)
    }

    fn execute(&mut self, mut frames: Vec<Frame>) -> Result<Value, Trap> {
        let module = self.module;
        loop {
            self.steps += 1;
            if self.steps > self.limits.step_limit {
                return Err(Trap::Timeout);
            }
            if self.steps.is_multiple_of(4096) && Instant::now() >= self.deadline {
                return Err(Trap::Timeout);
            }
            let frame = frames.last_mut().expect("active frame");
            let base = frame.base;
            let ins = module.functions[frame.func as usize].code[frame.pc];
            frame.pc += 1;
            match ins {
                Instr::Push(c) => {
                    let v = self.constant(c);
                    self.stack.push(v);
                }
                Instr::Pop => {
                    self.pop();
                }
                Instr::LoadLocal(l) => self.stack.push(self.stack[base + l as usize].clone()),
                Instr::StoreLocal(l) => {
                    let v = self.pop();
                    self.stack[base + l as usize] = v;
                }
                Instr::LoadGlobal(g) => self.stack.push(self.globals[g as usize].clone()),
                Instr::StoreGlobal(g) => self.globals[g as usize] = self.pop(),
                Instr::LoadField(slot) => match self.pop() {
                    Value::Obj(o) => self.stack.push(o.fields.borrow()[slot as usize].clone()),
                    _ => return abort(),
                },
                Instr::StoreField(slot) => {
                    let v = self.pop();
                    match self.pop() {
                        Value::Obj(o) => o.fields.borrow_mut()[slot as usize] = v,
                        _ => return abort(),
                    }
                }
                Instr::Arith(op, w) => {
                    let b = self.pop_int();
                    let a = self.pop_int();
                    let r = arith(op, w, a, b).map_err(Trap::Runtime)?;
                    self.stack.push(Value::Int(r));
                }
                Instr::Neg(w) => {
                    let a = self.pop_int();
                    let r = arith(ArithOp::Sub, w, 0, a).map_err(Trap::Runtime)?;
                    self.stack.push(Value::Int(r));
                }
                Instr::Not => {
                    let b = self.pop_bool();
                    self.stack.push(Value::Bool(!b));
                }
                Instr::Cmp(op) => {
                    let b = self.pop_int();
                    let a = self.pop_int();
                    let r = match op {
                        CmpOp::Lt => a < b,
                        CmpOp::Le => a <= b,
                        CmpOp::Gt => a > b,
                        CmpOp::Ge => a >= b,
                    };
                    self.stack.push(Value::Bool(r));
                }
                Instr::Eq | Instr::Ne => {
                    let b = self.pop();
                    let a = self.pop();
                    let eq = match (&a, &b) {
                        (Value::Int(x), Value::Int(y)) => x == y,
                        (Value::Bool(x), Value::Bool(y)) => x == y,
                        (Value::Str(x), Value::Str(y)) => x == y,
                        (Value::Unit, Value::Unit) | (Value::Null, Value::Null) => true,
                        (Value::Obj(x), Value::Obj(y)) => Rc::ptr_eq(x, y),
                        _ => false,
                    };
                    self.stack.push(Value::Bool(eq == (ins == Instr::Eq)));
                }
                Instr::Concat => {
                    let b = self.pop();
                    let a = self.pop();
                    match (a, b) {
                        (Value::Str(x), Value::Str(y)) => self.stack.push(Value::Str(format!("{x}{y}").into())),
                        _ => return abort(),
                    }
                }
                Instr::Jump(t) => frame.pc = t as usize,
                Instr::JumpIfFalse(t) => {
                    if !self.pop_bool() {
                        frames.last_mut().expect("active frame").pc = t as usize;
                    }
                }
                Instr::Call { func, argc } => self.push_frame(&mut frames, func, argc as usize)?,
                Instr::CallMethod { slot, argc } => {
                    let recv = &self.stack[self.stack.len() - argc as usize - 1];
                    let Value::Obj(o) = recv else {
                        return abort();
                    };
                    let Some(Some(func)) = module.classes[o.class as usize].vtable.get(slot as usize).copied() else {
                        return abort();
                    };
                    self.push_frame(&mut frames, func, argc as usize + 1)?;
                }
                Instr::New(c) => {
                    let fields = module.classes[c as usize]
                        .field_defaults
                        .iter()
                        .map(|d| self.constant(*d))
                        .collect();
                    self.stack.push(Value::Obj(Rc::new(Object {
                        class: c,
                        fields: RefCell::new(fields),
                    })));
                }
                Instr::Return => {
                    let v = self.pop();
                    let done = frames.pop().expect("active frame");
                    self.stack.truncate(done.base);
                    if frames.is_empty() {
                        return Ok(v);
                    }
                    self.stack.push(v);
                }
                Instr::Print => {
                    match self.pop() {
                        Value::Int(i) => self.out.push_str(&i.to_string()),
                        Value::Bool(b) => self.out.push_str(if b { "true" } else { "false" }),
                        Value::Str(s) => self.out.push_str(&s),
                        Value::Unit => self.out.push_str("()"),
                        Value::Null | Value::Obj(_) => return abort(),
                    }
                    self.out.push('\n');
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn checked_arithmetic_matches_wide_ints(a: i64, b: i64, op in 0..5usize, narrow: bool) {
            let ops = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Rem];
            let w = if narrow { Width::W8 } else { Width::W64 };
            let (a, b) = if narrow { (a.rem_euclid(256) - 128, b.rem_euclid(256) - 128) } else { (a, b) };
            let (x, y) = (a as i128, b as i128);
            let wide = match ops[op] {
                ArithOp::Add => Some(x + y),
                ArithOp::Sub => Some(x - y),
                ArithOp::Mul => Some(x * y),
                ArithOp::Div => (y != 0).then(|| x / y),
                ArithOp::Rem => (y != 0).then(|| x % y),
            };
            let (lo, hi) = w.range();
            let expected = match wide {
                None => Err(DiagnosticCode::DivZero),
                Some(v) if v >= lo as i128 && v <= hi as i128 => Ok(v as i64),
                Some(_) if ops[op] == ArithOp::Rem => Ok(0),
                Some(_) => Err(DiagnosticCode::Overflow),
            };
            prop_assert_eq!(arith(ops[op], w, a, b), expected);
        }
    }

    #[test]
    fn min_over_minus_one() {
        assert_eq!(
            arith(ArithOp::Div, Width::W64, i64::MIN, -1),
            Err(DiagnosticCode::Overflow)
        );
        assert_eq!(arith(ArithOp::Rem, Width::W64, i64::MIN, -1), Ok(0));
        assert_eq!(arith(ArithOp::Add, Width::W8, 127, 1), Err(DiagnosticCode::Overflow));
    }
}
