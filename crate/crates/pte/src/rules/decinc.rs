use minilang::ast::{AstNode, BinOp, NodeKind};
use minilang::types::Type;
use minilang::{DiagnosticCode, NodeId};

use crate::expectation::Expectation;
use crate::rule::{Rule, RuleContext, Transformed};

/// Insert `x = x - 1; x = x + 1;` after an initialized `var x` of type
/// Int64 in statement position.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecIncRule;

fn step(name: &str, op: BinOp) -> AstNode {
    AstNode::assign(
        AstNode::name_ref(name),
        AstNode::binary(op, AstNode::name_ref(name), AstNode::int(1)),
    )
}

impl Rule for DecIncRule {
    fn id(&self) -> &'static str {
        "R-DECINC"
    }

    fn summary(&self) -> &'static str {
        "x = x - 1; x = x + 1; after an Int64 var"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        let mut out = Vec::new();
        for block in cx.program.root.preorder() {
            if block.kind != NodeKind::Block {
                continue;
            }
            for s in block.stmts() {
                if s.kind == NodeKind::VarDecl
                    && s.is_mutable()
                    && s.initializer().is_some()
                    && cx.analysis.var_types.get(&s.id) == Some(&Type::Int64)
                {
                    out.push(s.id);
                }
            }
        }
        out.sort();
        out
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        Transformed::Ast(minilang::ast::walk_post(&cx.program.root, &mut |mut n| {
            if n.kind == NodeKind::Block {
                let mut children = Vec::with_capacity(n.children.len());
                for c in std::mem::take(&mut n.children) {
                    let insert = sites.contains(&c.id).then(|| c.name().unwrap_or("").to_string());
                    children.push(c);
                    if let Some(x) = insert {
                        children.push(step(&x, BinOp::Sub));
                        children.push(step(&x, BinOp::Add));
                    }
                }
                n.children = children;
            }
            n
        }))
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![
            Expectation::Equiv,
            Expectation::RuntimeError(Some(DiagnosticCode::Overflow)),
        ]
    }
}
