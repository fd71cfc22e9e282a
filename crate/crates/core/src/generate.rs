//! Benchmark instance generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Formula, Lit, Var};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("random 3-SAT needs at least 3 variables, got {0}")]
    TooFewVars(usize),
    #[error("clause/variable ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("pigeonhole needs at least one pigeon and one hole")]
    EmptyPigeonhole,
}

/// Uniform random 3-SAT: `round(n * ratio)` clauses over three distinct
/// variables with random signs. Output depends only on the arguments.
pub fn random_3sat(num_vars: usize, ratio: f64, seed: u64) -> Result<Formula, GenError> {
    if num_vars < 3 {
        return Err(GenError::TooFewVars(num_vars));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(GenError::BadRatio(ratio));
    }
    let num_clauses = (num_vars as f64 * ratio).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Formula::new(num_vars);
    for _ in 0..num_clauses {
        let lits: Vec<Lit> = sample(&mut rng, num_vars, 3)
            .into_iter()
            .map(|v| Lit::new(Var::new(v), rng.gen()))
            .collect();
        f.add_clause(&lits);
    }
    Ok(f)
}

/// Variable saying pigeon `p` sits in hole `h`.
pub fn pigeon_var(pigeon: usize, hole: usize, holes: usize) -> Var {
    Var::new(pigeon * holes + hole)
}

/// Every pigeon in some hole, no hole with two pigeons. Unsatisfiable
/// whenever `pigeons > holes`.
pub fn pigeonhole(pigeons: usize, holes: usize) -> Formula {
    let mut f = Formula::new(pigeons * holes);
    for p in 0..pigeons {
        let lits: Vec<Lit> = (0..holes)
            .map(|h| pigeon_var(p, h, holes).positive())
            .collect();
        f.add_clause(&lits);
    }
    for h in 0..holes {
        for p in 0..pigeons {
            for q in p + 1..pigeons {
                f.add_clause(&[
                    pigeon_var(p, h, holes).negative(),
                    pigeon_var(q, h, holes).negative(),
                ]);
            }
        }
    }
    f
}

/// Checked variant of [`pigeonhole`] for user input.
pub fn try_pigeonhole(pigeons: usize, holes: usize) -> Result<Formula, GenError> {
    if pigeons == 0 || holes == 0 {
        return Err(GenError::EmptyPigeonhole);
    }
    Ok(pigeonhole(pigeons, holes))
}
