//! Static types and the class table.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int64,
    Int8,
    Bool,
    String,
    Unit,
    Class(String),
    /// Placeholder after an error, compatible with everything so one
    /// mistake is reported once.
    Error,
}

impl Type {
    pub fn from_name(name: &str) -> Type {
        match name {
            "Int64" => Type::Int64,
            "Int8" => Type::Int8,
            "Bool" => Type::Bool,
            "String" => Type::String,
            "Unit" => Type::Unit,
            other => Type::Class(other.to_string()),
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Type::Int64 | Type::Int8)
    }

    pub fn is_class(&self) -> bool {
        matches!(self, Type::Class(_))
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Class(c) => Some(c),
            _ => None,
        }
    }

    /// Inclusive value range of an integer type.
    pub fn int_range(&self) -> Option<(i128, i128)> {
        match self {
            Type::Int64 => Some((i64::MIN as i128, i64::MAX as i128)),
            Type::Int8 => Some((i8::MIN as i128, i8::MAX as i128)),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int64 => f.write_str("Int64"),
            Type::Int8 => f.write_str("Int8"),
            Type::Bool => f.write_str("Bool"),
            Type::String => f.write_str("String"),
            Type::Unit => f.write_str("Unit"),
            Type::Class(c) => f.write_str(c),
            Type::Error => f.write_str("<error>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldInfo {
    pub name: String,
    pub ty: Type,
    pub mutable: bool,
    pub has_init: bool,
    pub decl: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodInfo {
    pub name: String,
    pub params: Vec<Type>,
    pub ret: Type,
    pub is_override: bool,
    pub decl: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub name: String,
    pub superclass: Option<String>,
    pub is_open: bool,
    /// Parameter types of the declared `init`, if any.
    pub ctor: Option<Vec<Type>>,
    pub fields: Vec<FieldInfo>,
    pub methods: Vec<MethodInfo>,
    pub decl: NodeId,
}

/// Per-class metadata. Only classes with an acyclic, resolvable ancestry
/// are entered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClassTable {
    pub classes: BTreeMap<String, ClassInfo>,
}

impl ClassTable {
    pub fn get(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    /// `name` followed by its ancestors, nearest first.
    pub fn ancestry(&self, name: &str) -> Vec<&ClassInfo> {
        let mut out = Vec::new();
        let mut cur = self.get(name);
        while let Some(c) = cur {
            if out.iter().any(|o: &&ClassInfo| o.name == c.name) {
                break;
            }
            out.push(c);
            cur = c.superclass.as_deref().and_then(|s| self.get(s));
        }
        out
    }

    /// Reflexive subclass relation.
    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        self.ancestry(sub).iter().any(|c| c.name == sup)
    }

    /// Proper, transitive subclasses of `name` in name order.
    pub fn subclasses(&self, name: &str) -> Vec<&str> {
        self.classes
            .keys()
            .filter(|c| c.as_str() != name && self.is_subclass(c, name))
            .map(String::as_str)
            .collect()
    }

    /// Fields in slot order: inherited fields first.
    pub fn all_fields(&self, name: &str) -> Vec<(&str, &FieldInfo)> {
        let mut chain = self.ancestry(name);
        chain.reverse();
        chain
            .into_iter()
            .flat_map(|c| c.fields.iter().map(move |f| (c.name.as_str(), f)))
            .collect()
    }

    pub fn field(&self, class: &str, field: &str) -> Option<(usize, &str, &FieldInfo)> {
        self.all_fields(class)
            .into_iter()
            .enumerate()
            .find(|(_, (_, f))| f.name == field)
            .map(|(i, (owner, f))| (i, owner, f))
    }

    /// The nearest definition of `method` visible from `class`.
    pub fn method(&self, class: &str, method: &str) -> Option<(&str, &MethodInfo)> {
        self.ancestry(class).into_iter().find_map(|c| {
            c.methods
                .iter()
                .find(|m| m.name == method)
                .map(|m| (c.name.as_str(), m))
        })
    }

    /// Virtual method table: `(method, defining class)` per slot. A class
    /// keeps its superclass's slot order and appends new methods.
    pub fn vtable(&self, name: &str) -> Vec<(String, String)> {
        let mut chain = self.ancestry(name);
        chain.reverse();
        let mut slots: Vec<(String, String)> = Vec::new();
        for c in chain {
            for m in &c.methods {
                match slots.iter_mut().find(|(n, _)| *n == m.name) {
                    Some(slot) => slot.1 = c.name.clone(),
                    None => slots.push((m.name.clone(), c.name.clone())),
                }
            }
        }
        slots
    }

    pub fn vtable_slot(&self, class: &str, method: &str) -> Option<usize> {
        self.vtable(class).iter().position(|(m, _)| m == method)
    }

    /// Constructor parameter types: the declared `init`, otherwise the
    /// superclass's effective constructor, otherwise none.
    pub fn effective_ctor(&self, name: &str) -> Vec<Type> {
        for c in self.ancestry(name) {
            if let Some(params) = &c.ctor {
                return params.clone();
            }
        }
        Vec::new()
    }

    /// Assignment compatibility: equal types, or a subclass into a
    /// superclass.
    pub fn assignable(&self, target: &Type, value: &Type) -> bool {
        match (target, value) {
            (Type::Error, _) | (_, Type::Error) => true,
            (Type::Class(t), Type::Class(v)) => self.is_subclass(v, t),
            (t, v) => t == v,
        }
    }
}
