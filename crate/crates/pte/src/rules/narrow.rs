use minilang::ast::{AstNode, NodeKind};
use minilang::types::Type;
use minilang::{DiagnosticCode, NodeId};

use crate::expectation::Expectation;
use crate::rule::{collect_sites, rewrite_sites, Rule, RuleContext, Transformed};

/// Annotate an Int64 variable as Int8 when its literal initializer does
/// not fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct NarrowRule;

impl Rule for NarrowRule {
    fn id(&self) -> &'static str {
        "R-NARROW"
    }

    fn summary(&self) -> &'static str {
        "Int64 variable with an out-of-range literal becomes Int8"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        let (lo, hi) = Type::Int8.int_range().expect("integer type");
        collect_sites(&cx.program.root, |n| {
            n.kind == NodeKind::VarDecl
                && cx.analysis.var_types.get(&n.id) == Some(&Type::Int64)
                && n.initializer()
                    .and_then(AstNode::int_literal)
                    .is_some_and(|v| v < lo || v > hi)
        })
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        Transformed::Ast(rewrite_sites(&cx.program.root, sites, |mut n| {
            match n.children.iter_mut().find(|c| c.kind == NodeKind::TypeRef) {
                Some(t) => *t = AstNode::type_ref("Int8"),
                None => n.children.insert(0, AstNode::type_ref("Int8")),
            }
            n
        }))
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::CompileError(Some(DiagnosticCode::TypeMismatch))]
    }
}
