use minilang::ast::{AstNode, Attr, NodeKind};
use minilang::checker::CallKind;
use minilang::{DiagnosticCode, NodeId};

use crate::expectation::Expectation;
use crate::rule::{collect_sites, rewrite_sites, Rule, RuleContext, Transformed};

/// Replace a constructor call with a call to a subclass whose constructor
/// accepts the same arguments. The smallest qualifying name wins.
#[derive(Debug, Clone, Copy, Default)]
pub struct LspRule {
    pub naive: bool,
}

fn substitute(cx: &RuleContext, call: &AstNode) -> Option<String> {
    let Some(CallKind::Constructor(class)) = cx.analysis.calls.get(&call.id) else {
        return None;
    };
    let table = &cx.analysis.table;
    let args: Vec<_> = call
        .args()
        .iter()
        .map(|a| cx.analysis.type_of(a))
        .collect::<Option<_>>()?;
    table
        .subclasses(class)
        .into_iter()
        .find(|sub| {
            let params = table.effective_ctor(sub);
            params.len() == args.len() && params.iter().zip(&args).all(|(p, a)| table.assignable(p, a))
        })
        .map(str::to_string)
}

impl Rule for LspRule {
    fn id(&self) -> &'static str {
        "R-LSP"
    }

    fn summary(&self) -> &'static str {
        "construct a subclass instead of the declared class"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        collect_sites(&cx.program.root, |n| {
            n.kind == NodeKind::CallExpr && substitute(cx, n).is_some()
        })
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        let subs: Vec<(NodeId, String)> = cx
            .program
            .root
            .preorder()
            .into_iter()
            .filter(|n| sites.contains(&n.id))
            .filter_map(|n| substitute(cx, n).map(|s| (n.id, s)))
            .collect();
        Transformed::Ast(rewrite_sites(&cx.program.root, sites, |mut n| {
            if let Some((_, sub)) = subs.iter().find(|(id, _)| *id == n.id) {
                n.attrs = Attr::Name(sub.clone());
            }
            n
        }))
    }

    fn expectations(&self) -> Vec<Expectation> {
        if self.naive {
            return vec![Expectation::Equiv];
        }
        vec![
            Expectation::Executable,
            Expectation::CompileError(Some(DiagnosticCode::CircularDep)),
            Expectation::CompileError(Some(DiagnosticCode::TypeMismatch)),
            Expectation::RuntimeError(Some(DiagnosticCode::StackOverflow)),
        ]
    }
}
