//! A small SMT-LIB 2 solver for quantifier-free linear arithmetic over
//! mixed integer/real/boolean constants. Ships as the fallback backend
//! binary for the planning toolkit; any SMT-LIB-conforming solver can be
//! substituted through the solver configuration.
//!
//! Architecture: the boolean skeleton goes to a CDCL SAT solver
//! (varisat); theory atoms are bounds on shared linear expressions,
//! checked with an exact delta-rational simplex; integers are handled by
//! branch-and-bound. Theory conflicts are learned as clauses until the
//! boolean and arithmetic views agree.

pub mod script;
pub mod sexpr;
pub mod solver;
pub mod term;

pub use script::{run_script, Interpreter};
pub use solver::{Model, ModelValue, SmtOutcome};
