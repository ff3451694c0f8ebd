//! Learning first-order symmetry-breaking constraints for the Partner Unit
//! Problem.
//!
//! The crate covers the whole pipeline: PUP instances and their derived
//! predicates, a backtracking solver, symmetry detection and lex-leader
//! dominance, example generation, the hypothesis space with
//! theta-subsumption, and a conflict-driven learner.

pub mod atoms;
pub mod error;
pub mod examples;
pub mod ground;
pub mod hypothesis;
pub mod instance;
pub mod learner;
pub mod pipeline;
pub mod solution;
pub mod solver;
pub mod symmetry;

pub use atoms::{GroundAtom, Predicate};
pub use error::{Error, Result};
pub use instance::{generate_instance, instance_from_spec, make_fig1_instance, Family, PupInstance};
pub use solution::Solution;
