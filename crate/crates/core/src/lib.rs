//! A SAT solver whose main engine is a local-search descent over complete
//! assignments. Whenever the descent reaches a local minimum, an embedded
//! CDCL engine fixes the literals of a falsified clause, learns from any
//! conflict and eventually proves unsatisfiability.
//!
//! The CDCL engine doubles as a standalone complete solver. The [`mus`]
//! module provides criticality predicates and brute-force MUS enumeration
//! used to check the search's behaviour at local minima.

pub mod bench;
pub mod cdcl;
pub mod clause_db;
pub mod cnf;
pub mod generate;
pub mod hybrid;
pub mod local_search;
pub mod mus;
pub mod observer;
pub mod outcome;
pub mod propagate;
pub mod trail;

pub use cdcl::{solve_cdcl, CdclEngine};
pub use cnf::{parse_dimacs, verify_model, Clause, Formula, Lit, Model, Var};
pub use hybrid::{solve_hybrid, HybridParams, HybridSolver};
pub use outcome::{Budget, SolveOutcome, Stats, Status};
