use minilang::ast::{AstNode, Attr, NodeKind};
use minilang::NodeId;

use super::bool_lit;
use crate::expectation::Expectation;
use crate::rule::{collect_sites, rewrite_sites, Rule, RuleContext, Transformed};

/// Wrap the value of every assignment and initialized variable in
/// `if (true) { v } else { v }`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CondRule;

fn wrap(v: AstNode) -> AstNode {
    AstNode::new(
        NodeKind::IfExpr,
        Attr::None,
        vec![
            bool_lit(true),
            AstNode::block(vec![v.clone()], true),
            AstNode::block(vec![v], true),
        ],
    )
}

impl Rule for CondRule {
    fn id(&self) -> &'static str {
        "R-COND"
    }

    fn summary(&self) -> &'static str {
        "right-hand side v becomes if (true) { v } else { v }"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        collect_sites(&cx.program.root, |n| {
            n.kind == NodeKind::AssignExpr || n.kind == NodeKind::VarDecl && n.initializer().is_some()
        })
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        Transformed::Ast(rewrite_sites(&cx.program.root, sites, |mut n| {
            let slot = match n.kind {
                NodeKind::AssignExpr => n.children.get_mut(1),
                _ => n.initializer_mut(),
            };
            if let Some(v) = slot {
                let old = std::mem::replace(v, AstNode::int(0));
                *v = wrap(old);
            }
            n
        }))
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::Equiv]
    }
}
