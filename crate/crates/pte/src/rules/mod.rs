//! The shipped rule library.

mod cond;
mod decinc;
mod dupmod;
mod init_ctor;
mod lsp;
mod narrow;
mod roundtrip;

use minilang::ast::{AstNode, Attr, Lit, NodeKind};
use minilang::NodeId;

use crate::expectation::Expectation;
use crate::rule::{Rule, RuleContext, Transformed};

pub use cond::CondRule;
pub use decinc::DecIncRule;
pub use dupmod::DupModRule;
pub use init_ctor::InitCtorRule;
pub use lsp::LspRule;
pub use narrow::NarrowRule;
pub use roundtrip::RoundTripRule;

/// Rule ids in registry order.
pub const RULE_IDS: [&str; 7] = [
    "R-COND",
    "R-ROUNDTRIP",
    "R-LSP",
    "R-INIT-CTOR",
    "R-DECINC",
    "R-NARROW",
    "R-DUPMOD",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuleOptions {
    /// Give R-LSP the unrefined `[Equiv]` expectation.
    pub naive_lsp: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule '{0}'")]
pub struct UnknownRule(pub String);

pub fn registry(opts: RuleOptions) -> Vec<Box<dyn Rule>> {
    vec![
        Box::new(CondRule),
        Box::new(RoundTripRule),
        Box::new(LspRule { naive: opts.naive_lsp }),
        Box::new(InitCtorRule),
        Box::new(DecIncRule),
        Box::new(NarrowRule),
        Box::new(DupModRule),
    ]
}

pub fn rule(id: &str, opts: RuleOptions) -> Option<Box<dyn Rule>> {
    registry(opts).into_iter().find(|r| r.id() == id)
}

/// Resolve `all` or a comma-separated id list, keeping the given order.
pub fn resolve(list: &str, opts: RuleOptions) -> Result<Vec<Box<dyn Rule>>, UnknownRule> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(registry(opts));
    }
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|id| rule(&id.to_ascii_uppercase(), opts).ok_or_else(|| UnknownRule(id.to_string())))
        .collect()
}

/// Resolve a composition written as `R-LSP+R-INIT-CTOR`.
pub fn resolve_sequence(seq: &str, opts: RuleOptions) -> Result<Vec<Box<dyn Rule>>, UnknownRule> {
    seq.split('+')
        .map(str::trim)
        .map(|id| rule(&id.to_ascii_uppercase(), opts).ok_or_else(|| UnknownRule(id.to_string())))
        .collect()
}

/// Returns the program unchanged; expects [`Expectation::Equiv`].
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRule;

impl Rule for IdentityRule {
    fn id(&self) -> &'static str {
        "R-IDENTITY"
    }

    fn summary(&self) -> &'static str {
        "leave the program unchanged"
    }

    fn sites(&self, cx: &RuleContext) -> Vec<NodeId> {
        vec![cx.program.root.id]
    }

    fn transform(&self, cx: &RuleContext, _sites: &[NodeId]) -> Transformed {
        Transformed::Ast(cx.program.root.clone())
    }

    fn expectations(&self) -> Vec<Expectation> {
        vec![Expectation::Equiv]
    }
}

fn bool_lit(b: bool) -> AstNode {
    AstNode::leaf(NodeKind::Literal, Attr::Lit(Lit::Bool(b)))
}

fn this_field(name: &str) -> AstNode {
    AstNode::new(
        NodeKind::MemberExpr,
        Attr::Name(name.to_string()),
        vec![AstNode::leaf(NodeKind::ThisExpr, Attr::None)],
    )
}
