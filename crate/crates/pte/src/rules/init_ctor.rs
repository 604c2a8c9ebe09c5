use std::collections::BTreeSet;

use minilang::ast::{visit, AstNode, Attr, NodeKind};
use minilang::NodeId;

use super::this_field;
use crate::expectation::Expectation;
use crate::rule::{collect_sites, rewrite_sites, Rule, RuleContext, Transformed};

/// Move field initializers into the constructor as `this.f = v;`
/// assignments, creating `init()` when the class has none.
#[derive(Debug, Clone, Copy, Default)]
pub struct InitCtorRule;

fn initialized_fields(class: &AstNode) -> impl Iterator<Item = &AstNode> {
    class
        .members()
        .iter()
        .filter(|m| m.kind == NodeKind::FieldDecl && m.initializer().is_some())
}

fn qualifies(cx: &RuleContext, class: &AstNode) -> bool {
    if class.kind != NodeKind::ClassDecl || initialized_fields(class).next().is_none() {
        return false;
    }
    match class.members().iter().find(|m| m.kind == NodeKind::CtorDecl) {
        // A new `init()` would hide an inherited constructor signature.
        None => cx.analysis.table.effective_ctor(class.name().unwrap_or("")).is_empty(),
        // Moved initializers must not be captured by parameter names.
        Some(init) => {
            let params: BTreeSet<&str> = init.params().filter_map(|p| p.name()).collect();
            let mut captured = false;
            for f in initialized_fields(class) {
                visit(f, &mut |n| {
                    captured |= n.kind == NodeKind::NameRef && n.name().is_some_and(|x| params.contains(x));
                });
            }
            !captured
        }
    }
}

fn move_initializers(mut class: AstNode) -> AstNode {
    let mut assigns = Vec::new();
    let mut last_field = 0;
    for (i, m) in class.children.iter_mut().enumerate() {
        if m.kind != NodeKind::FieldDecl {
            continue;
        }
        last_field = i;
        if let Some(pos) = m
            .children
            .iter()
            .position(|c| !matches!(c.kind, NodeKind::TypeRef | NodeKind::ModifierList))
        {
            let value = m.children.remove(pos);
            assigns.push(AstNode::assign(this_field(m.name().unwrap_or("")), value));
        }
    }
    match class.children.iter_mut().find(|m| m.kind == NodeKind::CtorDecl) {
        Some(init) => {
            let body = init.body_mut().expect("init has a body");
            let rest = std::mem::take(&mut body.children);
            body.children = assigns.into_iter().chain(rest).collect();
        }
        None => {
            let init = AstNode::new(
                NodeKind::CtorDecl,
                Attr::None,
                vec![AstNode::modifiers(Vec::new()), AstNode::block(assigns, false)],
            );
            class.children.insert(last_field + 1, init);
        }
    }
    class
}

impl Rule for InitCtorRule {
    fn id(&self) -> &'static str {
        "R-INIT-CTOR"
    }

    fn summary(&self) -> &'static str {
        "initialize fields in init() instead of at the declaration"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        collect_sites(&cx.program.root, |n| qualifies(cx, n))
    }

    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed {
        Transformed::Ast(rewrite_sites(&cx.program.root, sites, move_initializers))
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::Equiv]
    }
}
