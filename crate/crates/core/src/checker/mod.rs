//! Closure of abstract possibility relations, principle checks and the
//! bounded counterexample search.

pub mod closure;

pub use closure::{close, AbstractModel, ClosedRelation, ClosureError, ClosureRuleSet, Derivation, TraceStep};
pub mod principles;
pub mod search;

pub use principles::{check_principles, Outcome, PrincipleReport, PrincipleResult};
pub use search::{search_counterexample_theorem1, Principle, SearchBounds, SearchError, SearchOutcome, SearchReport, Toggles};
