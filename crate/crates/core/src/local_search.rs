//! Descent over complete assignments, restricted to variables the trail
//! leaves free.
//!
//! Per-clause true-literal counters make flip evaluation proportional to the
//! variable's occurrence count. A clause satisfied by the trail always keeps
//! a true literal on a fixed variable, so it can never enter the falsified
//! set; that set is therefore exactly the falsified part of the formula
//! simplified by the trail.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::{Lit, Var};
use crate::trail::Trail;

const ABSENT: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescentStep {
    Flipped(Var),
    LocalMinimum,
}

#[derive(Clone, Debug)]
pub struct LsState {
    values: Vec<bool>,
    true_count: Vec<u32>,
    live: Vec<bool>,
    falsified: Vec<ClauseRef>,
    slot: Vec<usize>,
    occurs: Vec<Vec<ClauseRef>>,
}

impl LsState {
    /// Builds counters for every live clause of `db` under `values`.
    pub fn new(db: &ClauseDb, values: Vec<bool>) -> LsState {
        let n = values.len();
        let mut s = LsState {
            values,
            true_count: Vec::new(),
            live: Vec::new(),
            falsified: Vec::new(),
            slot: Vec::new(),
            occurs: vec![Vec::new(); 2 * n],
        };
        s.rebuild(db);
        s
    }

    /// Random assignment that copies the trail on assigned variables.
    pub fn init_random<R: Rng>(db: &ClauseDb, trail: &Trail, rng: &mut R) -> LsState {
        let values = (0..trail.num_vars())
            .map(|i| trail.value(Var::new(i)).unwrap_or_else(|| rng.gen()))
            .collect();
        LsState::new(db, values)
    }

    /// Recomputes occurrence lists and counters from scratch.
    pub fn rebuild(&mut self, db: &ClauseDb) {
        let cap = db.capacity();
        self.true_count = vec![0; cap];
        self.live = vec![false; cap];
        self.slot = vec![ABSENT; cap];
        self.falsified.clear();
        for occ in &mut self.occurs {
            occ.clear();
        }
        for (cr, c) in db.iter() {
            self.insert_clause(cr, &c.lits);
        }
    }

    /// Starts tracking a clause added to the database.
    pub fn add_clause(&mut self, cr: ClauseRef, lits: &[Lit]) {
        let i = cr.index();
        if i >= self.true_count.len() {
            self.true_count.resize(i + 1, 0);
            self.live.resize(i + 1, false);
            self.slot.resize(i + 1, ABSENT);
        }
        self.insert_clause(cr, lits);
    }

    fn insert_clause(&mut self, cr: ClauseRef, lits: &[Lit]) {
        let i = cr.index();
        self.live[i] = true;
        self.true_count[i] = 0;
        for &l in lits {
            self.occurs[l.code()].push(cr);
            if self.lit_is_true(l) {
                self.true_count[i] += 1;
            }
        }
        if self.true_count[i] == 0 {
            self.mark_falsified(cr);
        }
    }

    fn mark_falsified(&mut self, cr: ClauseRef) {
        self.slot[cr.index()] = self.falsified.len();
        self.falsified.push(cr);
    }

    fn unmark_falsified(&mut self, cr: ClauseRef) {
        let at = self.slot[cr.index()];
        self.falsified.swap_remove(at);
        if let Some(&moved) = self.falsified.get(at) {
            self.slot[moved.index()] = at;
        }
        self.slot[cr.index()] = ABSENT;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var.index()]
    }

    #[inline]
    pub fn lit_is_true(&self, lit: Lit) -> bool {
        lit.eval(self.values[lit.var().index()])
    }

    /// Falsified clauses, in no particular order.
    pub fn falsified(&self) -> &[ClauseRef] {
        &self.falsified
    }

    pub fn is_falsified(&self, cr: ClauseRef) -> bool {
        self.slot[cr.index()] != ABSENT
    }

    pub fn true_count(&self, cr: ClauseRef) -> u32 {
        self.true_count[cr.index()]
    }

    /// Change in the number of falsified clauses if `var` were flipped
    /// (break minus make). Panics on trail-assigned variables.
    pub fn flip_delta(&self, trail: &Trail, var: Var) -> i64 {
        assert!(
            !trail.is_assigned(var),
            "flip_delta on trail-assigned variable {var}"
        );
        self.raw_delta(var)
    }

    fn raw_delta(&self, var: Var) -> i64 {
        let now_true = Lit::new(var, self.values[var.index()]);
        let breaks = self.occurs[now_true.code()]
            .iter()
            .filter(|cr| self.live[cr.index()] && self.true_count[cr.index()] == 1)
            .count();
        let makes = self.occurs[(!now_true).code()]
            .iter()
            .filter(|cr| self.live[cr.index()] && self.true_count[cr.index()] == 0)
            .count();
        breaks as i64 - makes as i64
    }

    /// Flips a free variable. Panics on trail-assigned variables.
    pub fn flip(&mut self, trail: &Trail, var: Var) {
        assert!(
            !trail.is_assigned(var),
            "flip of trail-assigned variable {var}"
        );
        self.flip_unchecked(var);
    }

    /// Flips without the tabu check; used to copy trail values over.
    pub(crate) fn flip_unchecked(&mut self, var: Var) {
        let was_true = Lit::new(var, self.values[var.index()]);
        self.values[var.index()] = !self.values[var.index()];
        for k in 0..self.occurs[was_true.code()].len() {
            let cr = self.occurs[was_true.code()][k];
            if !self.live[cr.index()] {
                continue;
            }
            self.true_count[cr.index()] -= 1;
            if self.true_count[cr.index()] == 0 {
                self.mark_falsified(cr);
            }
        }
        let now_true = !was_true;
        for k in 0..self.occurs[now_true.code()].len() {
            let cr = self.occurs[now_true.code()][k];
            if !self.live[cr.index()] {
                continue;
            }
            if self.true_count[cr.index()] == 0 {
                self.unmark_falsified(cr);
            }
            self.true_count[cr.index()] += 1;
        }
    }

    /// Overwrites every trail-assigned variable whose value disagrees with
    /// the trail. Returns how many were changed.
    pub fn sync_with_trail(&mut self, trail: &Trail) -> usize {
        let mut changed = 0;
        for e in trail.entries() {
            if !self.lit_is_true(e.lit) {
                self.flip_unchecked(e.lit.var());
                changed += 1;
            }
        }
        changed
    }

    /// Best descent flip among the free variables of `cr`, if any. Ties on
    /// the delta are broken uniformly at random.
    fn best_descent_in<R: Rng>(
        &self,
        db: &ClauseDb,
        trail: &Trail,
        cr: ClauseRef,
        rng: &mut R,
    ) -> Option<Var> {
        let mut best: Option<(i64, Var)> = None;
        let mut ties = 0u32;
        for &l in &db.get(cr).lits {
            let v = l.var();
            if trail.is_assigned(v) {
                continue;
            }
            let d = self.raw_delta(v);
            if d >= 0 {
                continue;
            }
            match best {
                Some((bd, _)) if d > bd => {}
                Some((bd, _)) if d == bd => {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        best = Some((d, v));
                    }
                }
                _ => {
                    best = Some((d, v));
                    ties = 1;
                }
            }
        }
        best.map(|(_, v)| v)
    }

    /// Scans the falsified clauses in random order and flips the best
    /// descent variable of the first clause that has one. Reports a local
    /// minimum when no falsified clause allows a strict descent.
    pub fn try_descent_step<R: Rng>(
        &mut self,
        db: &ClauseDb,
        trail: &Trail,
        rng: &mut R,
    ) -> DescentStep {
        assert!(
            !self.falsified.is_empty(),
            "descent step requested with no falsified clause"
        );
        let mut pending = self.falsified.clone();
        while !pending.is_empty() {
            let pick = rng.gen_range(0..pending.len());
            let cr = pending.swap_remove(pick);
            if let Some(v) = self.best_descent_in(db, trail, cr, rng) {
                self.flip(trail, v);
                return DescentStep::Flipped(v);
            }
        }
        DescentStep::LocalMinimum
    }

    /// A falsified clause chosen uniformly at random.
    pub fn random_falsified<R: Rng>(&self, rng: &mut R) -> Option<ClauseRef> {
        self.falsified.choose(rng).copied()
    }
}
