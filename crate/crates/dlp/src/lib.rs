//! Inconsistency-robust logic programming.
//!
//! Knowledge lives in named theories that tolerate contradiction: deriving
//! both a proposition and its negation reports an inconsistency instead of
//! making everything provable. Three reasoning layers sit on top of the
//! same store:
//!
//! - a direct-inference engine that applies entailment rules only forward
//!   (no contraposition), keeps Disjunctive Syllogism and the Boolean
//!   equivalences, and treats the `implies` connective as the one place
//!   where modus tollens is allowed;
//! - a plan interpreter that compiles implications into forward and
//!   backward pattern-directed plans, searches with chronological
//!   backtracking, and supports negation as failure;
//! - a probability auditor that shows how conditional-probability
//!   constraints leak the contrapositive conclusions the direct engine
//!   blocks.
//!
//! Every derived conclusion carries a replayable derivation tree, and
//! theories support nonmonotonic revision by deriving a child theory that
//! omits selected parent items.

pub mod direct;
pub mod export;
pub mod parse;
pub mod planner;
pub mod prob;
pub mod prop;
pub mod repl;
pub mod symbol;
pub mod term;
pub mod theory;

pub use prob::Prob;
