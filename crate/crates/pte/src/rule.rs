//! The rule interface.

use minilang::ast::{walk_post, AstNode};
use minilang::checker::Analysis;
use minilang::{NodeId, Outcome, Pipeline, Program};

use crate::expectation::Expectation;

/// What a rule sees: the program, its analysis under the fixed checker, and
/// the compiler under test (for rules that exercise the compiler's own
/// printer).
pub struct RuleContext<'a> {
    pub program: &'a Program,
    pub analysis: &'a Analysis,
    pub pipeline: &'a Pipeline,
}

/// Result of a transformation.
#[derive(Debug, Clone)]
pub enum Transformed {
    /// A rewritten tree, rendered by the canonical printer. It must parse.
    Ast(AstNode),
    /// Program text produced by the compiler under test; parse errors count
    /// as compile errors.
    Source(String),
    /// The compiler under test failed while the transformation ran.
    Rejected(Outcome),
}

pub trait Rule: Send + Sync {
    fn id(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    /// Matching sites in preorder. Empty when the rule does not apply.
    fn sites(&self, cx: &RuleContext) -> Vec<NodeId>;

    fn precondition(&self, cx: &RuleContext) -> bool {
        !self.sites(cx).is_empty()
    }

    /// Rewrite the given sites, a non-empty subset of [`Rule::sites`].
    fn transform(&self, cx: &RuleContext, sites: &[NodeId]) -> Transformed;

    /// Accepted outcomes of the transformed program, tried in order.
    fn expectations(&self) -> Vec<Expectation>;
}

/// Rebuild `root` bottom-up, passing every node whose id is in `sites` to
/// `f` after its children were rebuilt.
pub fn rewrite_sites<F>(root: &AstNode, sites: &[NodeId], mut f: F) -> AstNode
where
    F: FnMut(AstNode) -> AstNode,
{
    walk_post(root, &mut |n| if sites.contains(&n.id) { f(n) } else { n })
}

/// Ids of all nodes satisfying `pred`, in preorder.
pub fn collect_sites<F>(root: &AstNode, mut pred: F) -> Vec<NodeId>
where
    F: FnMut(&AstNode) -> bool,
{
    root.preorder().into_iter().filter(|n| pred(n)).map(|n| n.id).collect()
}
