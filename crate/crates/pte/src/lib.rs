//! Program-transformation testing: rules pair a precondition and a
//! transformation with the outcomes a correct compiler may produce on the
//! transformed program.

pub mod engine;
pub mod expectation;
pub mod rule;
pub mod rules;

pub use engine::{CaseResult, Engine, EngineConfig, EngineError, Seed, StepResult};
pub use expectation::{check_expectation, Expectation, Verdict};
pub use rule::{Rule, RuleContext, Transformed};
pub use rules::{registry, resolve, resolve_sequence, IdentityRule, RuleOptions, RULE_IDS};
