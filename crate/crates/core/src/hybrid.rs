//! Local search driven solver that calls an embedded CDCL engine whenever
//! the descent gets stuck.
//!
//! The complete assignment walks downhill over the variables left free by
//! the trail. At a local minimum a random falsified clause is handed to
//! [`HybridSolver::fix`], which asserts its literals one decision at a time
//! with propagation. A conflict is analyzed and learned like in CDCL; a
//! level-0 conflict proves unsatisfiability. Variables on the trail act as
//! a tabu list: the descent never flips them.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cdcl::{CdclConfig, CdclEngine};
use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::{Formula, Lit, Model, Var};
use crate::local_search::{DescentStep, LsState};
use crate::observer::{NoObserver, SearchObserver};
use crate::outcome::{Budget, Deadline, SolveOutcome, Stats, Status};
use crate::propagate::Propagator;
use crate::trail::Trail;

#[derive(Clone, Debug, PartialEq)]
pub struct HybridParams {
    /// Iterations before the complete assignment is re-randomized and the
    /// trail reset to level 0. `None` means `100 * num_vars`.
    pub max_flips: Option<u64>,
    pub seed: u64,
    pub budget: Budget,
}

impl Default for HybridParams {
    fn default() -> Self {
        HybridParams {
            max_flips: None,
            seed: 0,
            budget: Budget::unlimited(),
        }
    }
}

impl HybridParams {
    pub fn with_seed(seed: u64) -> Self {
        HybridParams {
            seed,
            ..HybridParams::default()
        }
    }

    pub fn effective_max_flips(&self, num_vars: usize) -> u64 {
        self.max_flips.unwrap_or(100 * num_vars as u64).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixResult {
    Unsat,
    Unknown,
}

pub struct HybridSolver<O: SearchObserver = NoObserver> {
    engine: CdclEngine<O>,
    ls: LsState,
    rng: ChaCha8Rng,
    params: HybridParams,
    seen_reductions: u64,
    /// Set once a level-0 conflict has been found.
    unsat: bool,
}

impl HybridSolver<NoObserver> {
    pub fn new(formula: &Formula, params: HybridParams) -> Self {
        HybridSolver::with_observer(formula, params, NoObserver)
    }
}

impl<O: SearchObserver> HybridSolver<O> {
    pub fn with_observer(formula: &Formula, params: HybridParams, observer: O) -> Self {
        let mut engine = CdclEngine::with_observer(formula, CdclConfig::default(), observer);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let unsat = match engine.propagate() {
            Some(c) => !engine.resolve_conflict(c),
            None => false,
        };
        let ls = LsState::init_random(engine.db(), engine.trail(), &mut rng);
        HybridSolver {
            seen_reductions: engine.reductions(),
            engine,
            ls,
            rng,
            params,
            unsat,
        }
    }

    pub fn engine(&self) -> &CdclEngine<O> {
        &self.engine
    }

    pub fn local_search(&self) -> &LsState {
        &self.ls
    }

    pub fn trail(&self) -> &Trail {
        self.engine.trail()
    }

    pub fn observer(&self) -> &O {
        self.engine.observer()
    }

    pub fn into_observer(self) -> O {
        self.engine.into_observer()
    }

    /// Re-randomizes the free variables and resets the trail to level 0.
    /// Learned clauses are kept.
    pub fn restart(&mut self) {
        self.engine.backjump(0);
        self.ls = LsState::init_random(self.engine.db(), self.engine.trail(), &mut self.rng);
        self.seen_reductions = self.engine.reductions();
        self.engine.stats.restarts += 1;
    }

    /// Asserts the literals of the falsified clause `alpha` as successive
    /// decisions until they are all assigned or a conflict occurs. A
    /// conflict is analyzed and learned; the complete assignment is then
    /// aligned with the trail.
    ///
    /// Returns `Unsat` at once if unsatisfiability is already known. Panics
    /// when `alpha` is not falsified by the complete assignment.
    pub fn fix(&mut self, alpha: ClauseRef) -> FixResult {
        if self.unsat {
            return FixResult::Unsat;
        }
        assert!(
            self.ls.is_falsified(alpha),
            "fix called on a clause that is not falsified"
        );
        self.engine.stats.fix_calls += 1;

        let mut pending: Vec<Lit> = self
            .engine
            .db()
            .get(alpha)
            .lits
            .iter()
            .copied()
            .filter(|l| !self.engine.trail().is_assigned(l.var()))
            .collect();
        let activity = self.engine.activity();
        pending.sort_by(|a, b| activity.score(b.var()).total_cmp(&activity.score(a.var())));

        let mut conflict = None;
        while conflict.is_none() && !pending.is_empty() {
            let lit = pending.remove(0);
            self.engine.decide(lit);
            conflict = self.engine.propagate();
            let trail = self.engine.trail();
            pending.retain(|l| !trail.is_assigned(l.var()));
        }

        if let Some(c) = conflict {
            let first_new = self.engine.db().capacity();
            if !self.engine.resolve_conflict(c) {
                self.unsat = true;
                return FixResult::Unsat;
            }
            if self.engine.reductions() != self.seen_reductions {
                self.seen_reductions = self.engine.reductions();
                self.ls.rebuild(self.engine.db());
            } else {
                let db = self.engine.db();
                for i in first_new..db.capacity() {
                    let cr = ClauseRef(i as u32);
                    if !db.is_deleted(cr) {
                        self.ls.add_clause(cr, &db.get(cr).lits);
                    }
                }
            }
        }
        self.ls.sync_with_trail(self.engine.trail());
        FixResult::Unknown
    }

    fn budget_exhausted(&self, deadline: &Deadline) -> bool {
        self.params
            .budget
            .max_flips
            .is_some_and(|m| self.engine.stats.flips >= m)
            || self
                .params
                .budget
                .max_conflicts
                .is_some_and(|m| self.engine.stats.conflicts >= m)
            || deadline.expired()
    }

    pub fn solve(&mut self) -> SolveOutcome {
        let start = Instant::now();
        let deadline = Deadline::new(start, &self.params.budget);
        let status = self.search(&deadline);
        let model = (status == Status::Sat).then(|| {
            let m = merged_model(self.engine.trail(), self.ls.values());
            assert!(
                model_satisfies_db(self.engine.db(), &m),
                "internal error: merged model violates a clause"
            );
            m
        });
        let mut stats = self.engine.stats.clone();
        stats.seconds = start.elapsed().as_secs_f64();
        SolveOutcome {
            status,
            model,
            stats,
        }
    }

    fn search(&mut self, deadline: &Deadline) -> Status {
        if self.unsat {
            return Status::Unsat;
        }
        let max_flips = self.params.effective_max_flips(self.engine.num_vars());
        let mut first_round = true;
        loop {
            if !first_round {
                self.restart();
            }
            first_round = false;
            for j in 0..max_flips {
                if self.ls.falsified().is_empty() {
                    return Status::Sat;
                }
                if j % 64 == 0 && self.budget_exhausted(deadline) {
                    return Status::Unknown;
                }
                match self
                    .ls
                    .try_descent_step(self.engine.db(), self.engine.trail(), &mut self.rng)
                {
                    DescentStep::Flipped(v) => {
                        self.engine.stats.flips += 1;
                        self.engine.notify_flip(v);
                        if self
                            .params
                            .budget
                            .max_flips
                            .is_some_and(|m| self.engine.stats.flips >= m)
                            && !self.ls.falsified().is_empty()
                        {
                            return Status::Unknown;
                        }
                    }
                    DescentStep::LocalMinimum => {
                        self.engine.stats.local_minima += 1;
                        self.engine
                            .notify_minimum(self.ls.values(), self.ls.falsified());
                        let alpha = self
                            .ls
                            .random_falsified(&mut self.rng)
                            .expect("local minimum with falsified clauses");
                        if self.fix(alpha) == FixResult::Unsat {
                            return Status::Unsat;
                        }
                    }
                }
            }
        }
    }
}

/// Trail values where assigned, the complete assignment elsewhere.
pub fn merged_model(trail: &Trail, complete: &[bool]) -> Model {
    let values = (0..trail.num_vars())
        .map(|i| {
            let from_trail = trail.value(Var::new(i));
            debug_assert!(
                from_trail.is_none_or(|v| v == complete[i]),
                "trail and complete assignment disagree on {}",
                Var::new(i)
            );
            from_trail.unwrap_or(complete[i])
        })
        .collect();
    Model::new(values)
}

fn model_satisfies_db(db: &ClauseDb, m: &Model) -> bool {
    db.iter().all(|(_, c)| c.is_satisfied_by(&m.values))
}

pub fn solve_hybrid(formula: &Formula, params: &HybridParams) -> SolveOutcome {
    HybridSolver::new(formula, params.clone()).solve()
}

/// Descent with a random-walk escape at local minima and no CDCL part.
/// Never proves unsatisfiability.
pub fn solve_local_search_only(formula: &Formula, params: &HybridParams) -> SolveOutcome {
    let start = Instant::now();
    let deadline = Deadline::new(start, &params.budget);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let prop = Propagator::new(formula);
    let trail = Trail::new(formula.num_vars);
    let mut ls = LsState::init_random(prop.db(), &trail, &mut rng);
    let mut stats = Stats::default();
    let max_flips = params.effective_max_flips(formula.num_vars);
    let has_empty = formula.clauses().any(|c| c.is_empty());

    let status = 'outer: loop {
        if stats.flips > 0 {
            ls = LsState::init_random(prop.db(), &trail, &mut rng);
            stats.restarts += 1;
        }
        for j in 0..max_flips {
            if ls.falsified().is_empty() {
                break 'outer Status::Sat;
            }
            if has_empty
                || params.budget.max_flips.is_some_and(|m| stats.flips >= m)
                || (j % 64 == 0 && deadline.expired())
            {
                break 'outer Status::Unknown;
            }
            match ls.try_descent_step(prop.db(), &trail, &mut rng) {
                DescentStep::Flipped(_) => stats.flips += 1,
                DescentStep::LocalMinimum => {
                    stats.local_minima += 1;
                    let cr = ls.random_falsified(&mut rng).expect("falsified clause");
                    let lits = &prop.db().get(cr).lits;
                    let v = lits[rng.gen_range(0..lits.len())].var();
                    ls.flip(&trail, v);
                    stats.flips += 1;
                }
            }
        }
    };
    stats.seconds = start.elapsed().as_secs_f64();
    SolveOutcome {
        status,
        model: (status == Status::Sat).then(|| Model::new(ls.values().to_vec())),
        stats,
    }
}
