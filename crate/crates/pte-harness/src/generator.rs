//! Grammar-directed random generation of clean seed programs.
//!
//! Programs use Int64 arithmetic, small class hierarchies, helper functions
//! and bounded loops. Every program is checked with the fixed compiler and
//! regenerated until it is clean.

use std::fmt::Write as _;

use minilang::checker;
use minilang::parser::parse_source;
use minilang::DefectSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no clean program for index {index} after {attempts} attempts")]
pub struct GenerationError {
    pub index: usize,
    pub attempts: usize,
}

/// `count` clean programs. Program `i` depends only on `seed` and `i`.
pub fn generate_seeds(count: usize, seed: u64) -> Result<Vec<String>, GenerationError> {
    (0..count).map(|i| generate_one(seed, i)).collect()
}

pub fn generate_one(seed: u64, index: usize) -> Result<String, GenerationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    for _ in 0..MAX_ATTEMPTS {
        let src = Gen::new(&mut rng).program();
        if is_clean(&src) {
            return Ok(src);
        }
    }
    Err(GenerationError {
        index,
        attempts: MAX_ATTEMPTS,
    })
}

fn is_clean(src: &str) -> bool {
    parse_source(src).is_ok_and(|p| checker::analyze(&p, &DefectSet::none()).1.is_empty())
}

#[derive(Clone)]
struct Var {
    name: String,
    mutable: bool,
    /// `None` for Int64, otherwise a class name.
    class: Option<String>,
}

#[derive(Clone)]
struct Class {
    name: String,
    ctor_arity: usize,
    fields: Vec<String>,
    methods: Vec<String>,
}

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    out: String,
    indent: usize,
    next_id: usize,
    classes: Vec<Class>,
    funcs: Vec<(String, usize)>,
    scopes: Vec<Vec<Var>>,
    /// Loop counters, never reassigned by generated statements.
    counters: Vec<String>,
    depth: usize,
}

impl<'r> Gen<'r> {
    fn new(rng: &'r mut ChaCha8Rng) -> Self {
        Gen {
            rng,
            out: String::new(),
            indent: 0,
            next_id: 0,
            classes: Vec::new(),
            funcs: Vec::new(),
            scopes: vec![Vec::new()],
            counters: Vec::new(),
            depth: 0,
        }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next_id += 1;
        format!("{prefix}{}", self.next_id)
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn literal(&mut self) -> String {
        match self.rng.gen_range(0..20) {
            0 => self.rng.gen_range(128i64..100_000).to_string(),
            1 => (-self.rng.gen_range(129i64..100_000)).to_string(),
            _ => self.rng.gen_range(-20i64..40).to_string(),
        }
    }

    fn ints_in_scope(&self) -> Vec<String> {
        self.scopes
            .iter()
            .flatten()
            .filter(|v| v.class.is_none())
            .map(|v| v.name.clone())
            .collect()
    }

    fn objects_in_scope(&self) -> Vec<(String, String)> {
        self.scopes
            .iter()
            .flatten()
            .filter_map(|v| v.class.clone().map(|c| (v.name.clone(), c)))
            .collect()
    }

    fn int_expr(&mut self, depth: usize) -> String {
        let leaf = depth == 0 || self.chance(0.35);
        if leaf {
            let vars = self.ints_in_scope();
            if !vars.is_empty() && self.chance(0.6) {
                return vars.choose(self.rng).unwrap().clone();
            }
            return self.literal();
        }
        match self.rng.gen_range(0..10) {
            0..=5 => {
                let op = *["+", "-", "*", "+", "-", "/", "%"].choose(self.rng).unwrap();
                let l = self.int_expr(depth - 1);
                let r = if matches!(op, "/" | "%") {
                    self.rng.gen_range(1i64..9).to_string()
                } else {
                    self.int_expr(depth - 1)
                };
                format!("({l} {op} {r})")
            }
            6 => {
                let c = self.bool_expr(depth - 1);
                let t = self.int_expr(depth - 1);
                let e = self.int_expr(depth - 1);
                format!("if ({c}) {{ {t} }} else {{ {e} }}")
            }
            7 if !self.funcs.is_empty() => {
                let (f, arity) = self.funcs.choose(self.rng).unwrap().clone();
                let args: Vec<_> = (0..arity).map(|_| self.int_expr(depth - 1)).collect();
                format!("{f}({})", args.join(", "))
            }
            8 => {
                let objs = self.objects_in_scope();
                let Some((o, class)) = objs.choose(self.rng).cloned() else {
                    return self.literal();
                };
                let c = self.class(&class);
                if !c.methods.is_empty() && self.chance(0.6) {
                    format!("{o}.{}()", c.methods.choose(self.rng).unwrap())
                } else {
                    format!("{o}.{}", c.fields.choose(self.rng).unwrap())
                }
            }
            _ => format!("(-{})", self.int_expr(depth - 1)),
        }
    }

    fn bool_expr(&mut self, depth: usize) -> String {
        match self.rng.gen_range(0..8) {
            0 => "true".to_string(),
            1 if depth > 0 => {
                let l = self.bool_expr(depth - 1);
                let r = self.bool_expr(depth - 1);
                let op = if self.chance(0.5) { "&&" } else { "||" };
                format!("({l} {op} {r})")
            }
            _ => {
                let op = *["<", "<=", ">", ">=", "==", "!="].choose(self.rng).unwrap();
                let l = self.int_expr(depth.min(1));
                let r = self.int_expr(depth.min(1));
                format!("{l} {op} {r}")
            }
        }
    }

    fn class(&self, name: &str) -> Class {
        self.classes
            .iter()
            .find(|c| c.name == name)
            .cloned()
            .expect("known class")
    }

    fn declare(&mut self, name: String, mutable: bool, class: Option<String>) {
        self.scopes.last_mut().unwrap().push(Var { name, mutable, class });
    }

    fn stmt(&mut self) {
        let roll = self.rng.gen_range(0..16);
        match roll {
            0..=3 => {
                let name = self.fresh("x");
                let mutable = self.chance(0.6);
                let kw = if mutable { "var" } else { "let" };
                let init = if self.chance(0.15) {
                    self.literal()
                } else {
                    self.int_expr(2)
                };
                let ann = if self.chance(0.4) { ": Int64" } else { "" };
                self.line(&format!("{kw} {name}{ann} = {init};"));
                self.declare(name, mutable, None);
            }
            4..=5 => {
                let targets: Vec<String> = self
                    .scopes
                    .iter()
                    .flatten()
                    .filter(|v| v.mutable && v.class.is_none() && !self.counters.contains(&v.name))
                    .map(|v| v.name.clone())
                    .collect();
                match targets.choose(self.rng).cloned() {
                    Some(t) => {
                        let e = self.int_expr(2);
                        self.line(&format!("{t} = {e};"));
                    }
                    None => self.print(),
                }
            }
            6..=8 => self.print(),
            9 | 10 if self.depth < 2 => {
                let c = self.bool_expr(1);
                self.line(&format!("if ({c}) {{"));
                self.nested(1..3);
                if self.chance(0.7) {
                    self.line("} else {");
                    self.nested(1..3);
                }
                self.line("}");
            }
            11 if self.depth < 2 => {
                let i = self.fresh("i");
                let bound = self.rng.gen_range(1..5);
                self.line(&format!("var {i} = 0;"));
                self.declare(i.clone(), true, None);
                self.counters.push(i.clone());
                self.line(&format!("while ({i} < {bound}) {{"));
                self.nested(1..3);
                self.indent += 1;
                self.line(&format!("{i} = {i} + 1;"));
                self.indent -= 1;
                self.line("}");
            }
            12..=13 if !self.classes.is_empty() => {
                let c = self.classes.choose(self.rng).unwrap().clone();
                let o = self.fresh("o");
                let args: Vec<_> = (0..c.ctor_arity).map(|_| self.int_expr(1)).collect();
                self.line(&format!("let {o} = {}({});", c.name, args.join(", ")));
                self.declare(o, false, Some(c.name));
            }
            _ => self.print(),
        }
    }

    fn print(&mut self) {
        if self.chance(0.1) {
            let s = *["done", "tick", "ok"].choose(self.rng).unwrap();
            self.line(&format!("println(\"{s}\");"));
            return;
        }
        let e = self.int_expr(2);
        self.line(&format!("println({e});"));
    }

    fn nested(&mut self, count: std::ops::Range<usize>) {
        self.indent += 1;
        self.depth += 1;
        self.scopes.push(Vec::new());
        let n = self.rng.gen_range(count);
        for _ in 0..n {
            self.stmt();
        }
        self.scopes.pop();
        self.depth -= 1;
        self.indent -= 1;
    }

    fn hierarchy(&mut self) {
        let base = self.fresh("K");
        let has_sub = self.chance(0.6);
        let open = if has_sub || self.chance(0.2) { "open " } else { "" };
        self.line(&format!("{open}class {base} {{"));
        self.indent += 1;
        let mut fields = Vec::new();
        let nfields = self.rng.gen_range(1..3);
        let with_init = self.chance(0.35);
        for _ in 0..nfields {
            let f = self.fresh("f");
            let kw = if self.chance(0.7) { "var" } else { "let" };
            if with_init || self.chance(0.8) {
                let v = self.literal();
                self.line(&format!("{kw} {f}: Int64 = {v};"));
            } else {
                self.line(&format!("var {f}: Int64;"));
            }
            fields.push(f);
        }
        let arity = if with_init {
            let p = self.fresh("p");
            let target = fields[0].clone();
            self.line(&format!("init({p}: Int64) {{"));
            self.indent += 1;
            self.line(&format!("{target} = {p};"));
            self.indent -= 1;
            self.line("}");
            1
        } else {
            0
        };
        let method = self.fresh("m");
        let body = format!("{} + {}", fields.choose(self.rng).unwrap(), self.rng.gen_range(0..10));
        self.line(&format!("func {method}(): Int64 {{"));
        self.indent += 1;
        self.line(&body);
        self.indent -= 1;
        self.line("}");
        self.indent -= 1;
        self.line("}");
        self.classes.push(Class {
            name: base.clone(),
            ctor_arity: arity,
            fields: fields.clone(),
            methods: vec![method.clone()],
        });
        if !has_sub {
            return;
        }
        let sub = self.fresh("K");
        self.line(&format!("class {sub} <: {base} {{"));
        self.indent += 1;
        let mut sub_fields = fields.clone();
        if self.chance(0.5) {
            let f = self.fresh("f");
            let v = self.literal();
            self.line(&format!("var {f}: Int64 = {v};"));
            sub_fields.push(f);
        }
        if self.chance(0.7) {
            let k = self.rng.gen_range(2..5);
            let f = sub_fields.last().unwrap().clone();
            self.line(&format!("override func {method}(): Int64 {{"));
            self.indent += 1;
            self.line(&format!("{f} * {k}"));
            self.indent -= 1;
            self.line("}");
        }
        self.indent -= 1;
        self.line("}");
        self.classes.push(Class {
            name: sub,
            ctor_arity: arity,
            fields: sub_fields,
            methods: vec![method],
        });
    }

    fn function(&mut self) {
        let name = self.fresh("h");
        let arity = self.rng.gen_range(0..3);
        let params: Vec<String> = (0..arity).map(|_| self.fresh("a")).collect();
        let sig: Vec<String> = params.iter().map(|p| format!("{p}: Int64")).collect();
        self.line(&format!("func {name}({}): Int64 {{", sig.join(", ")));
        self.indent += 1;
        self.scopes.push(
            params
                .iter()
                .map(|p| Var {
                    name: p.clone(),
                    mutable: false,
                    class: None,
                })
                .collect(),
        );
        let n = self.rng.gen_range(0..3);
        for _ in 0..n {
            self.stmt();
        }
        let tail = self.int_expr(2);
        self.line(&tail);
        self.scopes.pop();
        self.indent -= 1;
        self.line("}");
        self.funcs.push((name, arity));
    }

    fn program(mut self) -> String {
        let globals = self.rng.gen_range(0..3);
        for _ in 0..globals {
            let g = self.fresh("g");
            let mutable = self.chance(0.5);
            let kw = if mutable { "var" } else { "let" };
            let v = self.literal();
            self.line(&format!("{kw} {g}: Int64 = {v};"));
            self.declare(g, mutable, None);
        }
        let hierarchies = self.rng.gen_range(0..3);
        for _ in 0..hierarchies {
            self.hierarchy();
        }
        let funcs = self.rng.gen_range(0..3);
        for _ in 0..funcs {
            self.function();
        }
        self.line("main() {");
        self.indent += 1;
        self.scopes.push(Vec::new());
        let n = self.rng.gen_range(3..9);
        for _ in 0..n {
            self.stmt();
        }
        self.indent -= 1;
        self.line("}");
        let mut out = String::new();
        let _ = write!(out, "{}", self.out);
        out
    }
}
