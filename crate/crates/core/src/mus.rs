//! Once-satisfied, critical and linked clauses, plus a brute-force
//! enumeration of minimal unsatisfiable subsets for small formulas.

use thiserror::Error;

use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::{Clause, Formula, Lit};
use crate::observer::MinimumView;
use crate::trail::Trail;

/// Largest formula [`enumerate_mus`] accepts.
pub const MUS_MAX_CLAUSES: usize = 20;
pub const MUS_MAX_VARS: usize = 16;

/// The unique true literal of `clause` under `values`, if exactly one.
pub fn once_satisfied_on(clause: &[Lit], values: &[bool]) -> Option<Lit> {
    let mut it = clause.iter().filter(|l| l.eval(values[l.var().index()]));
    match (it.next(), it.next()) {
        (Some(&z), None) => Some(z),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalityReport {
    pub falsified: bool,
    pub critical: bool,
    /// For each literal of the clause, the indices (in `Formula::clauses`
    /// order) of clauses containing its negation and once-satisfied on it.
    pub links: Vec<(Lit, Vec<usize>)>,
}

/// A falsified clause is critical when each of its literals has a linked
/// clause: one containing the negated literal that is once-satisfied on
/// that negated literal, so flipping the variable would break it.
pub fn is_critical(alpha: &[Lit], f: &Formula, values: &[bool]) -> CriticalityReport {
    let falsified = alpha.iter().all(|l| !l.eval(values[l.var().index()]));
    let links: Vec<(Lit, Vec<usize>)> = alpha
        .iter()
        .map(|&l| {
            let witnesses = f
                .clauses()
                .enumerate()
                .filter(|(_, c)| once_satisfied_on(&c.lits, values) == Some(!l))
                .map(|(i, _)| i)
                .collect();
            (l, witnesses)
        })
        .collect();
    let critical = falsified && links.iter().all(|(_, w)| !w.is_empty());
    CriticalityReport {
        falsified,
        critical,
        links,
    }
}

/// A formula simplified by a partial assignment.
#[derive(Clone, Debug)]
pub struct Restricted {
    pub formula: Formula,
    /// Database reference of each restricted clause.
    pub origin: Vec<ClauseRef>,
}

impl Restricted {
    pub fn position(&self, cr: ClauseRef) -> Option<usize> {
        self.origin.iter().position(|&o| o == cr)
    }
}

/// Drops the clauses the trail satisfies and the literals it falsifies.
/// Learned clauses are kept alongside the original ones.
pub fn restrict(db: &ClauseDb, trail: &Trail) -> Restricted {
    let mut formula = Formula::new(trail.num_vars());
    let mut origin = Vec::new();
    for (cr, c) in db.iter() {
        if c.lits.iter().any(|&l| trail.lit_value(l) == Some(true)) {
            continue;
        }
        let lits = c
            .lits
            .iter()
            .copied()
            .filter(|&l| trail.lit_value(l).is_none())
            .collect();
        formula.original.push(Clause::new(lits));
        origin.push(cr);
    }
    Restricted { formula, origin }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MusError {
    #[error("{clauses} clauses over {vars} variables is too large for enumeration (limits {MUS_MAX_CLAUSES} and {MUS_MAX_VARS})")]
    TooLarge { clauses: usize, vars: usize },
}

/// All minimal unsatisfiable subsets, as sorted clause indices in
/// `Formula::clauses` order, themselves sorted.
///
/// Every total assignment (over the used variables) contributes the set of
/// clauses it falsifies; a subset is satisfiable iff it avoids one of those
/// sets. Satisfiability is pushed down the subset lattice, then the
/// unsatisfiable subsets whose one-smaller subsets are all satisfiable are
/// reported.
pub fn enumerate_mus(f: &Formula) -> Result<Vec<Vec<usize>>, MusError> {
    let clauses: Vec<&Clause> = f.clauses().collect();
    let m = clauses.len();
    let mut used: Vec<usize> = clauses
        .iter()
        .flat_map(|c| c.lits.iter().map(|l| l.var().index()))
        .collect();
    used.sort_unstable();
    used.dedup();
    if m > MUS_MAX_CLAUSES || used.len() > MUS_MAX_VARS {
        return Err(MusError::TooLarge {
            clauses: m,
            vars: used.len(),
        });
    }

    let full: u32 = if m == 0 { 0 } else { (1u32 << m) - 1 };
    let mut sat = vec![false; 1usize << m];
    let mut values = vec![false; f.num_vars];
    for bits in 0u32..(1u32 << used.len()) {
        for (k, &v) in used.iter().enumerate() {
            values[v] = bits >> k & 1 == 1;
        }
        let falsified = clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_satisfied_by(&values))
            .fold(0u32, |acc, (i, _)| acc | 1 << i);
        sat[(full & !falsified) as usize] = true;
    }
    for s in (0..sat.len()).rev() {
        if !sat[s] {
            continue;
        }
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            sat[s & !bit] = true;
            rest &= !bit;
        }
    }

    let mut muses = Vec::new();
    for s in 0..sat.len() {
        if sat[s] {
            continue;
        }
        let minimal = (0..m)
            .filter(|i| s >> i & 1 == 1)
            .all(|i| sat[s & !(1 << i)]);
        if minimal {
            muses.push((0..m).filter(|i| s >> i & 1 == 1).collect::<Vec<_>>());
        }
    }
    muses.sort();
    Ok(muses)
}

/// Whether every MUS has at least one clause critical under `values`.
pub fn check_prop2(f: &Formula, values: &[bool], muses: &[Vec<usize>]) -> bool {
    muses.iter().all(|mus| {
        mus.iter()
            .any(|&i| is_critical(&f.clause(i).lits, f, values).critical)
    })
}

/// Whether every clause of the falsified set is critical in the formula
/// simplified by the trail.
pub fn falsified_are_critical(view: &MinimumView<'_>) -> bool {
    let r = restrict(view.db, view.trail);
    view.falsified.iter().all(|&cr| {
        let Some(i) = r.position(cr) else {
            return false;
        };
        is_critical(&r.formula.clause(i).lits, &r.formula, view.assignment).critical
    })
}

/// The same check as [`check_prop2`] at a local minimum of the hybrid
/// search. `muses` index the database (original clauses come first, in
/// input order). Each MUS must keep a clause that the trail leaves
/// unsatisfied and that is critical in the simplified formula.
pub fn check_prop2_at_minimum(view: &MinimumView<'_>, muses: &[Vec<usize>]) -> bool {
    let r = restrict(view.db, view.trail);
    muses.iter().all(|mus| {
        mus.iter().any(|&i| {
            r.position(ClauseRef(i as u32)).is_some_and(|p| {
                is_critical(&r.formula.clause(p).lits, &r.formula, view.assignment).critical
            })
        })
    })
}
