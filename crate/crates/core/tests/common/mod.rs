//! Test-only oracles, independent of the solver code paths they check.
#![allow(dead_code)]

use hybrid_sat::cdcl::LearnedClauseInfo;
use hybrid_sat::clause_db::{ClauseDb, ClauseRef};
use hybrid_sat::cnf::{Formula, Lit, Var};
use hybrid_sat::mus::{
    check_prop2, check_prop2_at_minimum, enumerate_mus, falsified_are_critical, restrict,
};
use hybrid_sat::observer::{MinimumView, SearchObserver};
use hybrid_sat::trail::{Reason, Trail};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Clause as (positive mask, negative mask) over at most 32 variables.
pub fn masks(f: &Formula) -> Vec<(u32, u32)> {
    f.clauses()
        .map(|c| {
            c.lits.iter().fold((0u32, 0u32), |(p, n), l| {
                let bit = 1u32 << l.var().index();
                if l.is_positive() {
                    (p | bit, n)
                } else {
                    (p, n | bit)
                }
            })
        })
        .collect()
}

fn satisfies(a: u32, clauses: &[(u32, u32)]) -> bool {
    clauses.iter().all(|&(p, n)| (a & p) | (!a & n) != 0)
}

/// Truth-table search. Returns a model as a bit vector.
pub fn brute_force(f: &Formula) -> Option<u32> {
    assert!(f.num_vars <= 24, "truth table too large");
    let cs = masks(f);
    (0u32..(1u32 << f.num_vars)).find(|&a| satisfies(a, &cs))
}

pub fn bits_to_values(bits: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| bits >> i & 1 == 1).collect()
}

/// Whether every model of `f`'s original clauses satisfies `clause`.
pub fn implied_by_original(f: &Formula, clause: &[Lit]) -> bool {
    let cs: Vec<(u32, u32)> = masks(&Formula {
        num_vars: f.num_vars,
        original: f.original.clone(),
        learned: vec![],
    });
    let target = masks(&Formula {
        num_vars: f.num_vars,
        original: vec![hybrid_sat::Clause::new(clause.to_vec())],
        learned: vec![],
    })[0];
    (0u32..(1u32 << f.num_vars))
        .filter(|&a| (a & target.0) | (!a & target.1) == 0)
        .all(|a| !satisfies(a, &cs))
}

/// Random k-CNF with possibly mixed clause lengths.
pub fn random_formula(rng: &mut ChaCha8Rng, n: usize, m: usize, max_len: usize) -> Formula {
    let mut f = Formula::new(n);
    for _ in 0..m {
        let len = rng.gen_range(1..=max_len.min(n));
        let lits: Vec<Lit> = (0..len)
            .map(|_| Lit::new(Var::new(rng.gen_range(0..n)), rng.gen()))
            .collect();
        f.add_clause(&lits);
    }
    f
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn formula(n: usize, cs: &[&[i64]]) -> Formula {
    let cs: Vec<Vec<i64>> = cs.iter().map(|c| c.to_vec()).collect();
    Formula::from_dimacs_clauses(n, &cs)
}

/// Variables a..e are 1..5.
pub fn mus_example() -> Formula {
    let (a, b, c, d, e) = (1, 2, 3, 4, 5);
    formula(
        5,
        &[
            &[-d, e],
            &[b, -c],
            &[-d],
            &[-a, b],
            &[a],
            &[a, -c, e],
            &[-a, c, d],
            &[-b],
        ],
    )
}

/// Variables a..c are 1..3.
pub fn critical_example() -> Formula {
    let (a, b, c) = (1, 2, 3);
    formula(3, &[&[-a, -b, -c], &[a, -b], &[b, -c], &[c, -a]])
}

/// Falsified clauses of `f` under `values`, by brute force.
pub fn falsified_set(f: &Formula, values: &[bool]) -> Vec<usize> {
    f.clauses()
        .enumerate()
        .filter(|(_, c)| !c.is_satisfied_by(values))
        .map(|(i, _)| i)
        .collect()
}

/// All local minima of `f`: falsified count > 0 and no single flip
/// strictly decreases it.
pub fn local_minima(f: &Formula) -> Vec<Vec<bool>> {
    let cs = masks(f);
    let count = |a: u32| cs.iter().filter(|&&(p, n)| (a & p) | (!a & n) == 0).count();
    (0u32..(1u32 << f.num_vars))
        .filter(|&a| {
            let c = count(a);
            c > 0 && (0..f.num_vars).all(|v| count(a ^ (1 << v)) >= c)
        })
        .map(|a| bits_to_values(a, f.num_vars))
        .collect()
}

/// First-UIP clause computed by walking the implication graph: the UIP is
/// the conflict-level node closest to the conflict that every path from
/// the level's decision to the conflict passes through. The clause
/// negates the UIP and every lower-level node with an edge into the
/// UIP's conflict side.
pub fn first_uip_by_graph(db: &ClauseDb, trail: &Trail, conflict: ClauseRef) -> Vec<Lit> {
    let level = trail.decision_level();
    let entries: Vec<_> = trail.level_entries(level).to_vec();
    let preds = |lit: Lit| -> Vec<Lit> {
        match trail.reason(lit.var()) {
            Reason::Decision => vec![],
            Reason::Propagated(cr) => db
                .get(cr)
                .lits
                .iter()
                .filter(|l| l.var() != lit.var())
                .map(|&l| !l)
                .collect(),
        }
    };
    let conflict_preds: Vec<Lit> = db.get(conflict).lits.iter().map(|&l| !l).collect();
    let decision = entries[0].lit;

    // Nodes at the conflict level from which the conflict is reachable
    // without passing through `blocked`.
    let reaches_conflict = |blocked: Option<Lit>| -> bool {
        let mut stack: Vec<Lit> = conflict_preds
            .iter()
            .copied()
            .filter(|l| trail.level(l.var()) == level && Some(*l) != blocked)
            .collect();
        let mut visited = std::collections::HashSet::new();
        while let Some(x) = stack.pop() {
            if !visited.insert(x) {
                continue;
            }
            if x == decision {
                return true;
            }
            for p in preds(x) {
                if trail.level(p.var()) == level && Some(p) != blocked {
                    stack.push(p);
                }
            }
        }
        false
    };

    let uip = entries
        .iter()
        .rev()
        .map(|e| e.lit)
        .find(|&u| u == decision || !reaches_conflict(Some(u)))
        .unwrap();

    // Conflict side: conflict-level nodes after the UIP that reach the
    // conflict.
    let mut side = std::collections::HashSet::new();
    let mut stack: Vec<Lit> = conflict_preds
        .iter()
        .copied()
        .filter(|l| trail.level(l.var()) == level && *l != uip)
        .collect();
    while let Some(x) = stack.pop() {
        if !side.insert(x) {
            continue;
        }
        for p in preds(x) {
            if trail.level(p.var()) == level && p != uip {
                stack.push(p);
            }
        }
    }
    let mut clause: Vec<Lit> = vec![!uip];
    let mut sources: Vec<Lit> = conflict_preds.clone();
    for &x in &side {
        sources.extend(preds(x));
    }
    for p in sources {
        let lvl = trail.level(p.var());
        if lvl > 0 && lvl < level && !clause.contains(&!p) {
            clause.push(!p);
        }
    }
    clause.sort();
    clause
}

/// Records what instrumented runs need to check.
#[derive(Default)]
pub struct Recorder {
    pub learned: Vec<Vec<Lit>>,
    pub non_asserting: usize,
    pub fixed_flips: usize,
    pub flips: usize,
    pub minima: usize,
    pub prop1_violations: usize,
    pub prop2_violations: usize,
    /// Minima where the MUSes of the trail-simplified formula were checked.
    pub restricted_checked: usize,
    pub restricted_violations: usize,
    /// MUSes to check at every local minimum, as database indices.
    pub muses: Option<Vec<Vec<usize>>>,
    pub check_prop1: bool,
}

impl SearchObserver for Recorder {
    fn on_learn(&mut self, trail: &Trail, info: &LearnedClauseInfo) {
        let at_level = info
            .clause
            .iter()
            .filter(|l| trail.level(l.var()) == info.conflict_level)
            .count();
        if at_level != 1 || info.clause[0] != info.asserting_literal {
            self.non_asserting += 1;
        }
        self.learned.push(info.clause.clone());
    }

    fn on_flip(&mut self, trail: &Trail, var: Var) {
        self.flips += 1;
        if trail.is_assigned(var) {
            self.fixed_flips += 1;
        }
    }

    fn on_local_minimum(&mut self, view: &MinimumView<'_>) {
        self.minima += 1;
        if self.check_prop1 && !falsified_are_critical(view) {
            self.prop1_violations += 1;
        }
        if let Some(muses) = &self.muses {
            if !check_prop2_at_minimum(view, muses) {
                self.prop2_violations += 1;
            }
            let r = restrict(view.db, view.trail);
            if let Ok(local) = enumerate_mus(&r.formula) {
                self.restricted_checked += 1;
                if !check_prop2(&r.formula, view.assignment, &local) {
                    self.restricted_violations += 1;
                }
            }
        }
    }
}

/// Formulas over 1..=`max_vars` variables with clauses of length
/// 1..=`max_len`.
pub fn arb_formula(
    max_vars: usize,
    max_clauses: usize,
    max_len: usize,
) -> impl proptest::strategy::Strategy<Value = Formula> {
    use proptest::prelude::*;
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (0..n, any::<bool>()).prop_map(|(v, s)| Lit::new(Var::new(v), s));
        prop::collection::vec(prop::collection::vec(lit, 1..=max_len), 0..=max_clauses).prop_map(
            move |cs| {
                let mut f = Formula::new(n);
                for c in cs {
                    f.add_clause(&c);
                }
                f
            },
        )
    })
}
