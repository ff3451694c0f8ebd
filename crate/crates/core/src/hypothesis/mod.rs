//! Hypothesis space construction, canonical rules, scoring and θ-subsumption.

mod bias;
mod constraint;
mod space;
mod subsume;

pub use bias::{LanguageBias, ModeDecl, Modifier};
pub use constraint::{score, Constraint, Literal, Scheme};
pub use space::{build_space, HypothesisSpace, RuleId};
pub use subsume::{subsumers, subsumes};
