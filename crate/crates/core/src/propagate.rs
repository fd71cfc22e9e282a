//! Boolean constraint propagation over two watched literals.
//!
//! Every clause with at least two literals watches its first two positions.
//! A watch on literal `l` is visited when `l` becomes false. Unit clauses
//! are not watched; they are asserted at level 0 the first time
//! [`Propagator::propagate`] runs at that level. Pending literals are handled
//! in FIFO order straight off the trail.

use crate::clause_db::{ClauseDb, ClauseRef};
use crate::cnf::{Clause, Formula, Lit};
use crate::trail::Trail;

#[derive(Clone, Debug)]
pub struct Propagator {
    pub(crate) db: ClauseDb,
    watches: Vec<Vec<ClauseRef>>,
    pub(crate) trail: Trail,
    pending_units: Vec<ClauseRef>,
    pub propagations: u64,
}

impl Propagator {
    pub fn new(formula: &Formula) -> Propagator {
        let n = formula.num_vars;
        let mut p = Propagator {
            db: ClauseDb::new(),
            watches: vec![Vec::new(); 2 * n],
            trail: Trail::new(n),
            pending_units: Vec::new(),
            propagations: 0,
        };
        for c in formula.clauses() {
            p.add_clause(c.clone());
        }
        p
    }

    pub fn num_vars(&self) -> usize {
        self.trail.num_vars()
    }

    pub fn trail(&self) -> &Trail {
        &self.trail
    }

    pub fn db(&self) -> &ClauseDb {
        &self.db
    }

    /// Adds a clause while the trail is at level 0 and before it has been
    /// propagated past any of the clause's variables. Units and the empty
    /// clause are queued for the next level-0 propagation.
    pub fn add_clause(&mut self, clause: Clause) -> ClauseRef {
        let len = clause.lits.len();
        let cr = self.db.push(clause);
        if len >= 2 {
            self.watch(cr);
        } else {
            self.pending_units.push(cr);
        }
        cr
    }

    /// Adds a learned clause whose first literal is the asserting one and
    /// whose second literal has the highest level among the rest. Units are
    /// not queued: the caller asserts them.
    pub fn add_learned(&mut self, clause: Clause) -> ClauseRef {
        debug_assert!(clause.learned);
        let len = clause.lits.len();
        let cr = self.db.push(clause);
        if len >= 2 {
            self.watch(cr);
        }
        cr
    }

    fn watch(&mut self, cr: ClauseRef) {
        let lits = &self.db.get(cr).lits;
        self.watches[lits[0].code()].push(cr);
        self.watches[lits[1].code()].push(cr);
    }

    pub fn decide(&mut self, lit: Lit) {
        self.trail.decide(lit);
    }

    pub fn backjump(&mut self, level: u32) {
        self.trail.backjump(level);
    }

    /// Drops watches of deleted clauses.
    pub fn purge_deleted(&mut self) {
        let db = &self.db;
        for ws in &mut self.watches {
            ws.retain(|&cr| !db.is_deleted(cr));
        }
    }

    /// Propagates to fixpoint. Returns the first falsified clause found.
    pub fn propagate(&mut self) -> Option<ClauseRef> {
        if self.trail.decision_level() == 0 && !self.pending_units.is_empty() {
            let pending = std::mem::take(&mut self.pending_units);
            for (i, &cr) in pending.iter().enumerate() {
                let clause = self.db.get(cr);
                let Some(&lit) = clause.lits.first() else {
                    self.pending_units = pending[i..].to_vec();
                    return Some(cr);
                };
                match self.trail.lit_value(lit) {
                    Some(true) => {}
                    Some(false) => {
                        self.pending_units = pending[i..].to_vec();
                        return Some(cr);
                    }
                    None => self.trail.assign(lit, cr),
                }
            }
        }

        while self.trail.head < self.trail.len() {
            let p = self.trail.entries()[self.trail.head].lit;
            self.trail.head += 1;
            self.propagations += 1;
            let false_lit = !p;

            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cr = ws[i];
                i += 1;
                let lits = &mut self.db.get_mut(cr).lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                debug_assert_eq!(lits[1], false_lit);
                let first = lits[0];
                if self.trail.lit_value(first) == Some(true) {
                    ws[j] = cr;
                    j += 1;
                    continue;
                }
                let replacement =
                    (2..lits.len()).find(|&k| self.trail.lit_value(lits[k]) != Some(false));
                if let Some(k) = replacement {
                    lits.swap(1, k);
                    let new_watch = lits[1];
                    self.watches[new_watch.code()].push(cr);
                    continue;
                }
                ws[j] = cr;
                j += 1;
                match self.trail.lit_value(first) {
                    Some(false) => {
                        conflict = Some(cr);
                        break;
                    }
                    _ => self.trail.assign(first, cr),
                }
            }
            while i < ws.len() {
                ws[j] = ws[i];
                i += 1;
                j += 1;
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.trail.head = self.trail.len();
                return conflict;
            }
        }
        None
    }
}

/// Whether `lit` follows from `formula` by unit propagation alone, i.e.
/// asserting its negation and propagating yields a conflict.
pub fn up_entails(formula: &Formula, lit: Lit) -> bool {
    let mut p = Propagator::new(formula);
    if p.propagate().is_some() {
        return true;
    }
    match p.trail.lit_value(lit) {
        Some(v) => v,
        None => {
            p.decide(!lit);
            let entailed = p.propagate().is_some();
            p.backjump(0);
            entailed
        }
    }
}
