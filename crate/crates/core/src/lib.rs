//! Exact branch-and-cut for sparse max-cut and QUBO.

pub mod bnc;
pub mod graph;
pub mod heuristics;
pub mod io;
pub mod lp;
pub mod presolve;
pub mod propagate;
pub mod sepa;
pub mod transform;
