//! Catalog of planted compiler defects and the configuration selecting them.
//!
//! Defects are behavior branches inside the checker, code generator and
//! printer, selected at run time by a [`DefectSet`]. The reference
//! interpreter never consults the set.
//!
//! **D5 is inverted.** Its presence in a set selects the original, buggy
//! checker that only looks for construction cycles in constructor bodies;
//! its absence selects the fixed checker that also inspects field
//! initializers. An empty set is therefore the fully fixed compiler.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ast::{visit, NodeKind, Program};
use crate::checker::{self, Analysis, CallKind};
use crate::types::ClassTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DefectId {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
}

impl DefectId {
    pub const ALL: [DefectId; 7] = [
        DefectId::D1,
        DefectId::D2,
        DefectId::D3,
        DefectId::D4,
        DefectId::D5,
        DefectId::D6,
        DefectId::D7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DefectId::D1 => "D1",
            DefectId::D2 => "D2",
            DefectId::D3 => "D3",
            DefectId::D4 => "D4",
            DefectId::D5 => "D5",
            DefectId::D6 => "D6",
            DefectId::D7 => "D7",
        }
    }
}

impl fmt::Display for DefectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown defect id '{0}' (expected D1..D7, 'none' or 'all')")]
    UnknownDefect(String),
}

impl FromStr for DefectId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DefectId::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ConfigError::UnknownDefect(s.trim().to_string()))
    }
}

/// Bug categories observed when testing production compilers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    CompilerCrash,
    Miscompilation,
    ProblematicErrorMessage,
    InconsistentErrorDetection,
    CoreLibrary,
    PotentialDesignIssue,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::CompilerCrash => "compiler crash",
            Category::Miscompilation => "miscompilation",
            Category::ProblematicErrorMessage => "problematic error message",
            Category::InconsistentErrorDetection => "inconsistent error detection",
            Category::CoreLibrary => "core library",
            Category::PotentialDesignIssue => "potential design issue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub id: DefectId,
    pub category: Category,
    /// Compiler module and operation the defect perturbs.
    pub site: &'static str,
    pub trigger: &'static str,
    /// Rule ids expected to expose the defect; a composition is written
    /// with `+` between its steps.
    pub designated_detector: &'static [&'static str],
    /// Whether the id names a buggy behavior that is on when present.
    pub inverted: bool,
}

pub fn catalog() -> Vec<Defect> {
    vec![
        Defect {
            id: DefectId::D1,
            category: Category::Miscompilation,
            site: "backend::compile (global initializers)",
            trigger: "a global variable whose initializer is an if-expression",
            designated_detector: &["R-COND"],
            inverted: false,
        },
        Defect {
            id: DefectId::D2,
            category: Category::CompilerCrash,
            site: "backend::compile (constructor calls)",
            trigger: "an if-expression as a constructor argument, or a constructor call as the value of an if branch",
            designated_detector: &["R-COND"],
            inverted: false,
        },
        Defect {
            id: DefectId::D3,
            category: Category::Miscompilation,
            site: "frontend::print (field declarations)",
            trigger: "printing a field declaration that has no initializer",
            designated_detector: &["R-ROUNDTRIP"],
            inverted: false,
        },
        Defect {
            id: DefectId::D4,
            category: Category::ProblematicErrorMessage,
            site: "checker::check (type mismatch reporting)",
            trigger: "a type mismatch involving Int8",
            designated_detector: &["R-NARROW"],
            inverted: false,
        },
        Defect {
            id: DefectId::D5,
            category: Category::InconsistentErrorDetection,
            site: "checker::check (construction cycles)",
            trigger: "a construction cycle through a field initializer",
            designated_detector: &["R-LSP+R-INIT-CTOR"],
            inverted: true,
        },
        Defect {
            id: DefectId::D6,
            category: Category::Miscompilation,
            site: "backend::compile (vtable layout)",
            trigger: "storing a value of a proper subclass type into a field of its supertype",
            designated_detector: &["R-LSP"],
            inverted: false,
        },
        Defect {
            id: DefectId::D7,
            category: Category::PotentialDesignIssue,
            site: "checker::check_modifiers",
            trigger: "a repeated modifier",
            designated_detector: &["R-DUPMOD"],
            inverted: false,
        },
    ]
}

pub fn defect(id: DefectId) -> Defect {
    catalog()
        .into_iter()
        .find(|d| d.id == id)
        .expect("catalog covers every id")
}

/// The active defects of one compiler configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefectSet(BTreeSet<DefectId>);

impl DefectSet {
    pub fn none() -> Self {
        DefectSet::default()
    }

    pub fn all() -> Self {
        DefectSet(DefectId::ALL.into_iter().collect())
    }

    pub fn only(id: DefectId) -> Self {
        DefectSet([id].into_iter().collect())
    }

    pub fn has(&self, id: DefectId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: DefectId) {
        self.0.insert(id);
    }

    pub fn with(mut self, id: DefectId) -> Self {
        self.0.insert(id);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = DefectId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parse `none`, `all` or a comma-separated id list such as `D1,D3`.
    pub fn parse_list(s: &str) -> Result<Self, ConfigError> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(DefectSet::none());
        }
        if s.eq_ignore_ascii_case("all") {
            return Ok(DefectSet::all());
        }
        s.split(',')
            .map(str::parse)
            .collect::<Result<BTreeSet<_>, _>>()
            .map(DefectSet)
    }
}

impl fmt::Display for DefectSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let ids: Vec<_> = self.0.iter().map(|d| d.as_str()).collect();
        f.write_str(&ids.join(","))
    }
}

impl FromIterator<DefectId> for DefectSet {
    fn from_iter<I: IntoIterator<Item = DefectId>>(iter: I) -> Self {
        DefectSet(iter.into_iter().collect())
    }
}

/// Whether `program` contains the pattern that activates defect `id`.
///
/// Checker defects (D4, D5) are detected by comparing the diagnostics of the
/// clean checker with those of the checker with only that defect active.
pub fn triggers(id: DefectId, program: &Program) -> bool {
    match id {
        DefectId::D1 => program
            .items()
            .iter()
            .any(|i| i.kind == NodeKind::VarDecl && i.initializer().is_some_and(|e| e.kind == NodeKind::IfExpr)),
        DefectId::D2 => {
            let (analysis, _) = checker::analyze(program, &DefectSet::none());
            ice_sites(program, &analysis) > 0
        }
        DefectId::D3 => {
            let mut found = false;
            visit(&program.root, &mut |n| {
                found |= n.kind == NodeKind::FieldDecl && n.initializer().is_none();
            });
            found
        }
        DefectId::D4 | DefectId::D5 => {
            let clean = checker::check(program).err().unwrap_or_default();
            let buggy = checker::check_with(program, &DefectSet::only(id))
                .err()
                .unwrap_or_default();
            clean != buggy
        }
        DefectId::D6 => {
            let (analysis, _) = checker::analyze(program, &DefectSet::none());
            !subclass_field_stores(program, &analysis.table, &analysis).is_empty()
        }
        DefectId::D7 => {
            let mut found = false;
            visit(&program.root, &mut |n| {
                if n.kind == NodeKind::ModifierList {
                    let mods = n.modifier_list();
                    found |= mods.iter().collect::<BTreeSet<_>>().len() != mods.len();
                }
            });
            found
        }
    }
}

/// Number of constructor calls that crash the code generator under D2.
pub fn ice_sites(program: &Program, analysis: &Analysis) -> usize {
    let is_ctor = |n: &crate::ast::AstNode| {
        n.kind == NodeKind::CallExpr && matches!(analysis.calls.get(&n.id), Some(CallKind::Constructor(_)))
    };
    let mut count = 0;
    visit(&program.root, &mut |n| {
        if is_ctor(n) && n.children.iter().any(|a| a.kind == NodeKind::IfExpr) {
            count += 1;
        }
        if n.kind == NodeKind::IfExpr {
            for branch in n.children.iter().skip(1) {
                if branch.kind == NodeKind::Block && branch.tail().is_some_and(is_ctor) {
                    count += 1;
                }
            }
        }
    });
    count
}

/// Classes whose instances are stored, with their static type, into a field
/// declared with a proper supertype. Sorted and deduplicated.
pub fn subclass_field_stores(program: &Program, table: &ClassTable, analysis: &Analysis) -> Vec<String> {
    let mut out = BTreeSet::new();
    let mut note = |field_ty: Option<&crate::types::Type>, value: &crate::ast::AstNode| {
        let (Some(crate::types::Type::Class(decl)), Some(crate::types::Type::Class(actual))) =
            (field_ty, analysis.expr_types.get(&value.id))
        else {
            return;
        };
        if decl != actual && table.is_subclass(actual, decl) {
            out.insert(actual.clone());
        }
    };
    visit(&program.root, &mut |n| match n.kind {
        NodeKind::FieldDecl => {
            if let Some(init) = n.initializer() {
                note(analysis.field_decl_types.get(&n.id), init);
            }
        }
        NodeKind::AssignExpr => {
            let target = &n.children[0];
            if analysis.field_targets.contains(&target.id) {
                note(analysis.expr_types.get(&target.id), &n.children[1]);
            }
        }
        _ => {}
    });
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_seven_unique_defects_with_detectors() {
        let cat = catalog();
        assert_eq!(cat.len(), 7);
        let ids: BTreeSet<_> = cat.iter().map(|d| d.id).collect();
        assert_eq!(ids.len(), 7);
        assert!(cat.iter().all(|d| !d.designated_detector.is_empty()));
        for c in [
            Category::CompilerCrash,
            Category::Miscompilation,
            Category::ProblematicErrorMessage,
            Category::InconsistentErrorDetection,
            Category::PotentialDesignIssue,
        ] {
            assert!(cat.iter().any(|d| d.category == c), "{c:?}");
        }
    }

    #[test]
    fn parses_lists() {
        assert_eq!(DefectSet::parse_list("none").unwrap(), DefectSet::none());
        assert_eq!(DefectSet::parse_list("all").unwrap(), DefectSet::all());
        let s = DefectSet::parse_list("D3,d1").unwrap();
        assert!(s.has(DefectId::D1) && s.has(DefectId::D3) && !s.has(DefectId::D2));
        assert_eq!(s.to_string(), "D1,D3");
        assert_eq!(
            DefectSet::parse_list("D1,D9").unwrap_err(),
            ConfigError::UnknownDefect("D9".into())
        );
    }
}
