//! The partial assignment maintained by the CDCL side: assigned literals in
//! chronological order, each with its decision level and reason.

use crate::clause_db::ClauseRef;
use crate::cnf::{Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    Propagated(ClauseRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    pub lit: Lit,
    pub level: u32,
    pub reason: Reason,
}

#[derive(Clone, Debug)]
pub struct Trail {
    entries: Vec<TrailEntry>,
    /// `level_starts[k]` is the index of the decision opening level `k + 1`.
    level_starts: Vec<usize>,
    values: Vec<Option<bool>>,
    levels: Vec<u32>,
    reasons: Vec<Reason>,
    positions: Vec<usize>,
    /// Next entry to propagate.
    pub(crate) head: usize,
}

impl Trail {
    pub fn new(num_vars: usize) -> Trail {
        Trail {
            entries: Vec::with_capacity(num_vars),
            level_starts: Vec::new(),
            values: vec![None; num_vars],
            levels: vec![0; num_vars],
            reasons: vec![Reason::Decision; num_vars],
            positions: vec![usize::MAX; num_vars],
            head: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn decision_level(&self) -> u32 {
        self.level_starts.len() as u32
    }

    #[inline]
    pub fn value(&self, var: Var) -> Option<bool> {
        self.values[var.index()]
    }

    #[inline]
    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        self.values[lit.var().index()].map(|v| lit.eval(v))
    }

    #[inline]
    pub fn is_assigned(&self, var: Var) -> bool {
        self.values[var.index()].is_some()
    }

    #[inline]
    pub fn level(&self, var: Var) -> u32 {
        self.levels[var.index()]
    }

    #[inline]
    pub fn reason(&self, var: Var) -> Reason {
        self.reasons[var.index()]
    }

    /// Position of an assigned variable on the trail.
    pub fn position(&self, var: Var) -> usize {
        self.positions[var.index()]
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.values
    }

    /// Opens a new decision level with `lit` as its decision.
    ///
    /// Panics when the variable is already assigned.
    pub fn decide(&mut self, lit: Lit) {
        assert!(
            !self.is_assigned(lit.var()),
            "decision on assigned variable {}",
            lit.var()
        );
        self.level_starts.push(self.entries.len());
        self.push(lit, Reason::Decision);
    }

    /// Assigns `lit` at the current level, justified by `reason`.
    pub fn assign(&mut self, lit: Lit, reason: ClauseRef) {
        debug_assert!(!self.is_assigned(lit.var()));
        self.push(lit, Reason::Propagated(reason));
    }

    fn push(&mut self, lit: Lit, reason: Reason) {
        let v = lit.var().index();
        let level = self.decision_level();
        self.values[v] = Some(lit.is_positive());
        self.levels[v] = level;
        self.reasons[v] = reason;
        self.positions[v] = self.entries.len();
        self.entries.push(TrailEntry { lit, level, reason });
    }

    /// Undoes every level above `level`. Panics if `level` is above the
    /// current decision level.
    pub fn backjump(&mut self, level: u32) {
        self.backjump_with(level, |_| {});
    }

    /// Like [`Trail::backjump`], reporting each undone literal (most recent
    /// first).
    pub fn backjump_with(&mut self, level: u32, mut on_undo: impl FnMut(Lit)) {
        assert!(
            level <= self.decision_level(),
            "backjump to {} above current level {}",
            level,
            self.decision_level()
        );
        if level == self.decision_level() {
            return;
        }
        let keep = self.level_starts[level as usize];
        while self.entries.len() > keep {
            let e = self.entries.pop().unwrap();
            let v = e.lit.var().index();
            self.values[v] = None;
            self.positions[v] = usize::MAX;
            on_undo(e.lit);
        }
        self.level_starts.truncate(level as usize);
        self.head = self.head.min(self.entries.len());
    }

    /// Literals of one decision level, in assignment order.
    pub fn level_entries(&self, level: u32) -> &[TrailEntry] {
        let start = if level == 0 {
            0
        } else {
            self.level_starts[level as usize - 1]
        };
        let end = self
            .level_starts
            .get(level as usize)
            .copied()
            .unwrap_or(self.entries.len());
        &self.entries[start..end]
    }
}
