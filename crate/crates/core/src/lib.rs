//! Bracket-based derivative-free minimization of univariate functions that
//! are piecewise smooth, with reference methods and a benchmark harness.

pub mod baselines;
pub mod brackets;
pub mod dupm;
pub mod eupm;
pub mod harness;
pub mod models;
pub mod solver;
pub mod supm;
pub mod testfuncs;

pub use brackets::{Bracket, Bracket3, BracketError, ExtendedBracket5, ExtendedBracket7, GapVector};
pub use solver::{Branch, Oracle, RunConfig, SolveError, SolverResult, Status, TraceEntry, UpdateSequence};
