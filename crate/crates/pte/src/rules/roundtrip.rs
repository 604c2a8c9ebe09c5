use minilang::ast::{AstNode, NodeKind};
use minilang::parser::{fragment_kind_of, parse_fragment};
use minilang::{NodeId, Outcome};

use crate::expectation::Expectation;
use crate::rule::{Rule, RuleContext, Transformed};

/// Print and reparse. Statements in both branches of every if-else are
/// round-tripped one at a time, then the whole program is printed with the
/// compiler's printer.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundTripRule;

impl RoundTripRule {
    fn fragments(&self, cx: &RuleContext, node: &AstNode) -> Result<AstNode, Outcome> {
        let mut out = node.clone();
        out.children = node
            .children
            .iter()
            .map(|c| self.fragments(cx, c))
            .collect::<Result<_, _>>()?;
        if out.kind == NodeKind::IfExpr && out.children.len() == 3 {
            for b in 1..3 {
                if out.children[b].kind == NodeKind::Block {
                    for stmt in out.children[b].children.iter_mut() {
                        *stmt = self.round_trip(cx, stmt)?;
                    }
                }
            }
        }
        Ok(out)
    }

    fn round_trip(&self, cx: &RuleContext, node: &AstNode) -> Result<AstNode, Outcome> {
        let Some(kind) = fragment_kind_of(node.kind) else {
            return Ok(node.clone());
        };
        let tokens = cx.pipeline.print(node);
        parse_fragment(&tokens, kind).map_err(Outcome::compile_error)
    }
}

impl Rule for RoundTripRule {
    fn id(&self) -> &'static str {
        "R-ROUNDTRIP"
    }

    fn summary(&self) -> &'static str {
        "parse(print(p)) behaves like p"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        vec![cx.program.root.id]
    }

    fn transform(&self, cx: &RuleContext, _sites: &[NodeId]) -> Transformed {
        match self.fragments(cx, &cx.program.root) {
            Ok(root) => Transformed::Source(cx.pipeline.print(&root).source),
            Err(outcome) => Transformed::Rejected(outcome),
        }
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::Equiv]
    }
}
