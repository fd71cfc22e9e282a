//! Hooks for instrumented runs. All methods default to no-ops, so the
//! uninstrumented solver pays nothing for them.

use crate::cdcl::LearnedClauseInfo;
use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::Var;
use crate::trail::Trail;

/// Solver state at a local minimum of the descent.
pub struct MinimumView<'a> {
    pub db: &'a ClauseDb,
    pub trail: &'a Trail,
    pub assignment: &'a [bool],
    pub falsified: &'a [ClauseRef],
}

pub trait SearchObserver {
    /// Called right after conflict analysis, before backjumping. `trail`
    /// is still the conflicting trail.
    fn on_learn(&mut self, _trail: &Trail, _info: &LearnedClauseInfo) {}

    /// Called after the local search flipped `var`. The trail is unchanged
    /// by a flip.
    fn on_flip(&mut self, _trail: &Trail, _var: Var) {}

    /// Called when no descent flip exists, before `fix` runs.
    fn on_local_minimum(&mut self, _view: &MinimumView<'_>) {}
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoObserver;

impl SearchObserver for NoObserver {}
