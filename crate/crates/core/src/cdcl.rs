//! Conflict-driven clause learning: first-UIP analysis with recursive
//! minimization, backjumping, activity-based branching with phase saving,
//! Luby restarts and learned-clause reduction.
//!
//! [`CdclEngine`] exposes the individual steps so the hybrid solver can drive
//! them; [`solve_cdcl`] runs the classic complete loop on top of them.

use std::time::Instant;

use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::{Clause, Formula, Lit, Model, Var};
use crate::observer::{MinimumView, NoObserver, SearchObserver};
use crate::outcome::{Budget, Deadline, SolveOutcome, Stats, Status};
use crate::propagate::Propagator;
use crate::trail::{Reason, Trail};

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESCALE_LIMIT: f64 = 1e100;
const CLAUSE_RESCALE_LIMIT: f64 = 1e20;

/// Variable activities kept in an indexed binary max-heap. Ties go to the
/// lower variable index.
#[derive(Clone, Debug)]
pub struct VarActivity {
    scores: Vec<f64>,
    increment: f64,
    decay: f64,
    heap: Vec<Var>,
    /// Heap slot of each variable, `usize::MAX` when absent.
    slots: Vec<usize>,
}

impl VarActivity {
    pub fn new(num_vars: usize, decay: f64) -> VarActivity {
        assert!(decay > 0.0 && decay < 1.0);
        VarActivity {
            scores: vec![0.0; num_vars],
            increment: 1.0,
            decay,
            heap: (0..num_vars).map(Var::new).collect(),
            slots: (0..num_vars).collect(),
        }
    }

    pub fn score(&self, var: Var) -> f64 {
        self.scores[var.index()]
    }

    fn before(&self, a: Var, b: Var) -> bool {
        let (sa, sb) = (self.scores[a.index()], self.scores[b.index()]);
        sa > sb || (sa == sb && a < b)
    }

    pub fn bump(&mut self, var: Var) {
        let s = &mut self.scores[var.index()];
        *s += self.increment;
        if *s > RESCALE_LIMIT {
            for s in &mut self.scores {
                *s /= RESCALE_LIMIT;
            }
            self.increment /= RESCALE_LIMIT;
        }
        if self.contains(var) {
            self.sift_up(self.slots[var.index()]);
        }
    }

    pub fn decay(&mut self) {
        self.increment /= self.decay;
    }

    pub fn contains(&self, var: Var) -> bool {
        self.slots[var.index()] != usize::MAX
    }

    pub fn insert(&mut self, var: Var) {
        if self.contains(var) {
            return;
        }
        self.slots[var.index()] = self.heap.len();
        self.heap.push(var);
        self.sift_up(self.heap.len() - 1);
    }

    pub fn pop_max(&mut self) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.slots[top.index()] = usize::MAX;
        if !self.heap.is_empty() {
            self.slots[self.heap[0].index()] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.before(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && self.before(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.before(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.slots[self.heap[i].index()] = i;
        self.slots[self.heap[j].index()] = j;
    }
}

/// The `i`-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ...
pub fn luby(i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = i;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}

/// Second-highest level in a multiset of literal levels; 0 for fewer than
/// two literals.
pub fn compute_backjump_level(levels: &[u32]) -> u32 {
    let mut sorted = levels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.get(1).copied().unwrap_or(0)
}

/// A nogood produced by conflict analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedClauseInfo {
    /// Asserting literal first, then the literal of highest level among the
    /// rest.
    pub clause: Vec<Lit>,
    pub asserting_literal: Lit,
    pub backjump_level: u32,
    /// Decision level at which the conflict occurred.
    pub conflict_level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Analysis {
    Learned(LearnedClauseInfo),
    /// The conflict happened at level 0.
    Unsat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartPolicy {
    /// Restart after `unit * luby(k)` conflicts.
    Luby { unit: u64 },
    EveryConflict,
    Never,
}

#[derive(Clone, Debug)]
pub struct CdclConfig {
    pub restarts: RestartPolicy,
    pub var_decay: f64,
    /// Learned clauses are reduced once they exceed
    /// `max(reduce_floor, 2 * original clauses)`.
    pub reduce_floor: usize,
    pub minimize: bool,
}

impl Default for CdclConfig {
    fn default() -> Self {
        CdclConfig {
            restarts: RestartPolicy::Luby { unit: 64 },
            var_decay: VAR_DECAY,
            reduce_floor: 4000,
            minimize: true,
        }
    }
}

pub struct CdclEngine<O: SearchObserver = NoObserver> {
    prop: Propagator,
    config: CdclConfig,
    activity: VarActivity,
    phases: Vec<bool>,
    seen: Vec<bool>,
    clause_increment: f64,
    original_clauses: usize,
    /// Bumped every time clauses are deleted.
    reductions: u64,
    pub stats: Stats,
    observer: O,
}

impl CdclEngine<NoObserver> {
    pub fn new(formula: &Formula) -> Self {
        CdclEngine::with_observer(formula, CdclConfig::default(), NoObserver)
    }
}

impl<O: SearchObserver> CdclEngine<O> {
    pub fn with_observer(formula: &Formula, config: CdclConfig, observer: O) -> Self {
        let n = formula.num_vars;
        CdclEngine {
            prop: Propagator::new(formula),
            activity: VarActivity::new(n, config.var_decay),
            config,
            phases: vec![false; n],
            seen: vec![false; n],
            clause_increment: 1.0,
            original_clauses: formula.original.len(),
            reductions: 0,
            stats: Stats::default(),
            observer,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.prop.num_vars()
    }

    pub fn trail(&self) -> &Trail {
        self.prop.trail()
    }

    pub fn db(&self) -> &ClauseDb {
        self.prop.db()
    }

    pub fn activity(&self) -> &VarActivity {
        &self.activity
    }

    pub fn observer(&self) -> &O {
        &self.observer
    }

    pub fn observer_mut(&mut self) -> &mut O {
        &mut self.observer
    }

    pub fn into_observer(self) -> O {
        self.observer
    }

    pub fn reductions(&self) -> u64 {
        self.reductions
    }

    /// Current clause database (original and learned) as a formula.
    pub fn formula(&self) -> Formula {
        self.db().to_formula(self.num_vars())
    }

    pub(crate) fn notify_flip(&mut self, var: Var) {
        self.observer.on_flip(&self.prop.trail, var);
    }

    pub(crate) fn notify_minimum(&mut self, assignment: &[bool], falsified: &[ClauseRef]) {
        let view = MinimumView {
            db: &self.prop.db,
            trail: &self.prop.trail,
            assignment,
            falsified,
        };
        self.observer.on_local_minimum(&view);
    }

    pub fn decide(&mut self, lit: Lit) {
        self.stats.decisions += 1;
        self.prop.decide(lit);
    }

    pub fn propagate(&mut self) -> Option<ClauseRef> {
        let c = self.prop.propagate();
        self.stats.propagations = self.prop.propagations;
        c
    }

    /// Backjumps, saving the phase of every undone variable.
    pub fn backjump(&mut self, level: u32) {
        let (activity, phases) = (&mut self.activity, &mut self.phases);
        self.prop.trail.backjump_with(level, |lit| {
            phases[lit.var().index()] = lit.is_positive();
            activity.insert(lit.var());
        });
    }

    /// Unassigned variable of highest activity, with its saved phase.
    pub fn pick_branch_lit(&mut self) -> Option<Lit> {
        while let Some(v) = self.activity.pop_max() {
            if !self.prop.trail.is_assigned(v) {
                return Some(Lit::new(v, self.phases[v.index()]));
            }
        }
        None
    }

    fn bump_clause(&mut self, cr: ClauseRef) {
        let db = &mut self.prop.db;
        let c = db.get_mut(cr);
        if !c.learned {
            return;
        }
        c.activity += self.clause_increment;
        if c.activity > CLAUSE_RESCALE_LIMIT {
            for r in db.learned_refs() {
                db.get_mut(r).activity /= CLAUSE_RESCALE_LIMIT;
            }
            self.clause_increment /= CLAUSE_RESCALE_LIMIT;
        }
    }

    /// First-UIP analysis of a falsified clause, followed by recursive
    /// minimization. Bumps every variable met on the way.
    pub fn analyze_conflict(&mut self, conflict: ClauseRef) -> Analysis {
        let level = self.prop.trail.decision_level();
        if level == 0 {
            return Analysis::Unsat;
        }
        debug_assert!(self
            .db()
            .get(conflict)
            .lits
            .iter()
            .all(|&l| self.trail().lit_value(l) == Some(false)));

        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut at_level = 0usize;
        let mut index = self.prop.trail.len();
        let mut pivot: Option<Lit> = None;
        let mut cr = conflict;

        loop {
            self.bump_clause(cr);
            let lits = self.prop.db.get(cr).lits.clone();
            for q in lits {
                let v = q.var();
                if Some(v) == pivot.map(Lit::var) {
                    continue;
                }
                let lvl = self.prop.trail.level(v);
                if !self.seen[v.index()] && lvl > 0 {
                    self.seen[v.index()] = true;
                    self.activity.bump(v);
                    if lvl >= level {
                        at_level += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            let p = loop {
                index -= 1;
                let lit = self.prop.trail.entries()[index].lit;
                if self.seen[lit.var().index()] {
                    break lit;
                }
            };
            self.seen[p.var().index()] = false;
            at_level -= 1;
            pivot = Some(p);
            if at_level == 0 {
                break;
            }
            cr = match self.prop.trail.reason(p.var()) {
                Reason::Propagated(r) => r,
                Reason::Decision => unreachable!("decision reached before the UIP"),
            };
        }
        learnt[0] = !pivot.expect("conflict analysis visits at least one literal");

        let mut to_clear: Vec<Lit> = learnt.clone();
        if self.config.minimize {
            let abstract_levels = learnt[1..]
                .iter()
                .fold(0u32, |acc, l| acc | self.abstract_level(l.var()));
            let mut kept = 1;
            for i in 1..learnt.len() {
                let lit = learnt[i];
                let keep = match self.prop.trail.reason(lit.var()) {
                    Reason::Decision => true,
                    Reason::Propagated(_) => {
                        !self.lit_redundant(lit, abstract_levels, &mut to_clear)
                    }
                };
                if keep {
                    learnt[kept] = lit;
                    kept += 1;
                }
            }
            learnt.truncate(kept);
        }
        for l in &to_clear {
            self.seen[l.var().index()] = false;
        }

        if learnt.len() > 1 {
            let trail = &self.prop.trail;
            let max_i = (1..learnt.len())
                .max_by_key(|&i| (trail.level(learnt[i].var()), std::cmp::Reverse(i)))
                .unwrap();
            learnt.swap(1, max_i);
        }
        let levels: Vec<u32> = learnt
            .iter()
            .map(|l| self.prop.trail.level(l.var()))
            .collect();
        let info = LearnedClauseInfo {
            asserting_literal: learnt[0],
            backjump_level: compute_backjump_level(&levels),
            clause: learnt,
            conflict_level: level,
        };
        self.observer.on_learn(&self.prop.trail, &info);
        Analysis::Learned(info)
    }

    fn abstract_level(&self, var: Var) -> u32 {
        1 << (self.prop.trail.level(var) & 31)
    }

    /// Whether `lit` is implied by the other learned literals through its
    /// reason chain.
    fn lit_redundant(&mut self, lit: Lit, abstract_levels: u32, to_clear: &mut Vec<Lit>) -> bool {
        let top = to_clear.len();
        let mut stack = vec![lit];
        while let Some(q) = stack.pop() {
            let Reason::Propagated(cr) = self.prop.trail.reason(q.var()) else {
                unreachable!("only propagated literals are expanded")
            };
            let lits = self.prop.db.get(cr).lits.clone();
            for l in lits {
                let v = l.var();
                if v == q.var() || self.seen[v.index()] || self.prop.trail.level(v) == 0 {
                    continue;
                }
                let expandable = matches!(self.prop.trail.reason(v), Reason::Propagated(_))
                    && self.abstract_level(v) & abstract_levels != 0;
                if expandable {
                    self.seen[v.index()] = true;
                    stack.push(l);
                    to_clear.push(l);
                } else {
                    for c in &to_clear[top..] {
                        self.seen[c.var().index()] = false;
                    }
                    to_clear.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    /// Stores the nogood, backjumps to its level and asserts its first
    /// literal with the new clause as reason.
    pub fn learn(&mut self, info: &LearnedClauseInfo) -> ClauseRef {
        self.backjump(info.backjump_level);
        let mut clause = Clause::learned(info.clause.clone());
        clause.activity = self.clause_increment;
        let cr = self.prop.add_learned(clause);
        self.prop.trail.assign(info.asserting_literal, cr);
        self.stats.learned += 1;
        cr
    }

    /// Ends a conflict: decays activities.
    pub fn end_conflict(&mut self) {
        self.stats.conflicts += 1;
        self.activity.decay();
        self.clause_increment /= CLAUSE_DECAY;
    }

    /// Analyzes and learns until propagation reaches a conflict-free
    /// fixpoint. Returns false when unsatisfiability is proven.
    pub fn resolve_conflict(&mut self, mut conflict: ClauseRef) -> bool {
        loop {
            let info = match self.analyze_conflict(conflict) {
                Analysis::Unsat => {
                    self.stats.conflicts += 1;
                    return false;
                }
                Analysis::Learned(info) => info,
            };
            self.learn(&info);
            self.end_conflict();
            match self.propagate() {
                Some(c) => conflict = c,
                None => {
                    self.reduce_if_needed();
                    return true;
                }
            }
        }
    }

    fn is_locked(&self, cr: ClauseRef) -> bool {
        let c = self.db().get(cr);
        let first = c.lits[0];
        self.trail().is_assigned(first.var())
            && self.trail().reason(first.var()) == Reason::Propagated(cr)
    }

    /// Deletes the less active half of the learned clauses once the store
    /// is over its limit. Binary clauses and reasons stay. Returns whether
    /// anything was deleted.
    pub fn reduce_if_needed(&mut self) -> bool {
        let limit = self.config.reduce_floor.max(2 * self.original_clauses);
        let learned = self.db().num_learned();
        if learned <= limit {
            return false;
        }
        let mut candidates: Vec<ClauseRef> = self
            .db()
            .learned_refs()
            .into_iter()
            .filter(|&cr| self.db().get(cr).lits.len() > 2 && !self.is_locked(cr))
            .collect();
        candidates.sort_by(|&a, &b| {
            let (x, y) = (self.db().get(a).activity, self.db().get(b).activity);
            x.total_cmp(&y).then(a.cmp(&b))
        });
        let target = (learned / 2).min(candidates.len());
        for &cr in &candidates[..target] {
            self.prop.db.delete(cr);
        }
        self.prop.purge_deleted();
        self.stats.deleted += target as u64;
        self.reductions += 1;
        target > 0
    }

    fn restart_due(&self, since_restart: u64, restarts: u64) -> bool {
        match self.config.restarts {
            RestartPolicy::Luby { unit } => since_restart >= unit * luby(restarts),
            RestartPolicy::EveryConflict => true,
            RestartPolicy::Never => false,
        }
    }

    /// Complete CDCL search under `budget`.
    pub fn solve(&mut self, budget: &Budget) -> SolveOutcome {
        let start = Instant::now();
        let deadline = Deadline::new(start, budget);
        let status = self.search(budget, &deadline);
        let mut stats = self.stats.clone();
        stats.seconds = start.elapsed().as_secs_f64();
        let model = (status == Status::Sat).then(|| {
            let values = self
                .trail()
                .values()
                .iter()
                .map(|v| v.expect("complete assignment"))
                .collect();
            Model::new(values)
        });
        SolveOutcome {
            status,
            model,
            stats,
        }
    }

    fn search(&mut self, budget: &Budget, deadline: &Deadline) -> Status {
        let mut since_restart = 0u64;
        let mut decisions_since_check = 0u32;
        loop {
            if let Some(conflict) = self.propagate() {
                let info = match self.analyze_conflict(conflict) {
                    Analysis::Unsat => {
                        self.stats.conflicts += 1;
                        return Status::Unsat;
                    }
                    Analysis::Learned(info) => info,
                };
                self.learn(&info);
                self.end_conflict();
                since_restart += 1;
                if self.restart_due(since_restart, self.stats.restarts) {
                    self.backjump(0);
                    self.stats.restarts += 1;
                    since_restart = 0;
                }
                if budget
                    .max_conflicts
                    .is_some_and(|m| self.stats.conflicts >= m)
                    || deadline.expired()
                {
                    return Status::Unknown;
                }
            } else {
                self.reduce_if_needed();
                decisions_since_check += 1;
                if decisions_since_check >= 1024 {
                    decisions_since_check = 0;
                    if deadline.expired() {
                        return Status::Unknown;
                    }
                }
                match self.pick_branch_lit() {
                    None => return Status::Sat,
                    Some(lit) => self.decide(lit),
                }
            }
        }
    }
}

/// Runs the standalone CDCL solver on `formula`.
pub fn solve_cdcl(formula: &Formula, budget: &Budget) -> SolveOutcome {
    CdclEngine::new(formula).solve(budget)
}
