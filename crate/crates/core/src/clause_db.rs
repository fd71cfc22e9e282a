//! Arena of clauses shared by the propagation, learning and local-search
//! code. References are stable: deleted clauses keep their slot.

use crate::cnf::{Clause, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseRef(pub u32);

impl ClauseRef {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClauseDb {
    clauses: Vec<Clause>,
    deleted: Vec<bool>,
    num_original: usize,
    num_learned: usize,
}

impl ClauseDb {
    pub fn new() -> ClauseDb {
        ClauseDb::default()
    }

    pub fn push(&mut self, clause: Clause) -> ClauseRef {
        if clause.learned {
            self.num_learned += 1;
        } else {
            self.num_original += 1;
        }
        self.clauses.push(clause);
        self.deleted.push(false);
        ClauseRef((self.clauses.len() - 1) as u32)
    }

    #[inline]
    pub fn get(&self, cr: ClauseRef) -> &Clause {
        &self.clauses[cr.index()]
    }

    #[inline]
    pub fn get_mut(&mut self, cr: ClauseRef) -> &mut Clause {
        &mut self.clauses[cr.index()]
    }

    #[inline]
    pub fn is_deleted(&self, cr: ClauseRef) -> bool {
        self.deleted[cr.index()]
    }

    pub fn delete(&mut self, cr: ClauseRef) {
        let i = cr.index();
        if !self.deleted[i] {
            self.deleted[i] = true;
            if self.clauses[i].learned {
                self.num_learned -= 1;
            } else {
                self.num_original -= 1;
            }
            self.clauses[i].lits = Vec::new();
        }
    }

    /// Number of slots, deleted ones included.
    pub fn capacity(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_original(&self) -> usize {
        self.num_original
    }

    pub fn num_learned(&self) -> usize {
        self.num_learned
    }

    /// Live clauses with their references.
    pub fn iter(&self) -> impl Iterator<Item = (ClauseRef, &Clause)> {
        self.clauses
            .iter()
            .enumerate()
            .filter(move |(i, _)| !self.deleted[*i])
            .map(|(i, c)| (ClauseRef(i as u32), c))
    }

    pub fn learned_refs(&self) -> Vec<ClauseRef> {
        self.iter()
            .filter(|(_, c)| c.learned)
            .map(|(cr, _)| cr)
            .collect()
    }

    /// Exports the live clauses as a formula.
    pub fn to_formula(&self, num_vars: usize) -> Formula {
        let mut f = Formula::new(num_vars);
        for (_, c) in self.iter() {
            if c.learned {
                f.learned.push(c.clone());
            } else {
                f.original.push(c.clone());
            }
        }
        f
    }
}
