use minilang::ast::{AstNode, Attr, Modifier, NodeKind};
use minilang::{DiagnosticCode, NodeId};

use crate::expectation::Expectation;
use crate::rule::{collect_sites, rewrite_sites, Rule, RuleContext, Transformed};

/// Repeat `open` on a class or `override` on a method.
#[derive(Debug, Clone, Copy, Default)]
pub struct DupModRule;

fn target(n: &AstNode) -> Option<Modifier> {
    match n.kind {
        NodeKind::ClassDecl if n.has_modifier(Modifier::Open) => Some(Modifier::Open),
        NodeKind::MethodDecl if n.has_modifier(Modifier::Override) => Some(Modifier::Override),
        _ => None,
    }
}

impl Rule for DupModRule {
    fn id(&self) -> &'static str {
        "R-DUPMOD"
    }

    fn summary(&self) -> &'static str {
        "repeat an open or override modifier"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        collect_sites(&cx.program.root, |n| target(n).is_some())
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        Transformed::Ast(rewrite_sites(&cx.program.root, sites, |mut n| {
            let Some(m) = target(&n) else {
                return n;
            };
            if let Some(list) = n.children.first_mut().filter(|c| c.kind == NodeKind::ModifierList) {
                if let Attr::Modifiers(mods) = &mut list.attrs {
                    let at = mods.iter().position(|x| *x == m).expect("modifier present");
                    mods.insert(at + 1, m);
                }
            }
            n
        }))
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::CompileError(Some(DiagnosticCode::DupModifier))]
    }
}
