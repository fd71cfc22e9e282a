//! CNF representation: variables, literals, clauses, formulas and models,
//! together with DIMACS reading/writing and the resolution rule.

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, stored 0-based. DIMACS index is `index() + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn new(index: usize) -> Var {
        Var(index as u32)
    }

    /// Builds a variable from its 1-based DIMACS number.
    pub fn from_dimacs(number: u32) -> Var {
        assert!(number >= 1, "DIMACS variables start at 1");
        Var(number - 1)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> u32 {
        self.0 + 1
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.to_dimacs())
    }
}

/// A literal encoded as `2 * var + neg`, so that literal-indexed tables
/// (watches, occurrences) can be plain vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Parses a signed, nonzero DIMACS literal.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::from_dimacs(value.unsigned_abs() as u32), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().to_dimacs());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for literal-indexed tables.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    /// Truth value of the literal when its variable is set to `value`.
    #[inline]
    pub fn eval(self, value: bool) -> bool {
        value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals.
#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub lits: Vec<Lit>,
    pub learned: bool,
    /// Bumped when the clause takes part in conflict analysis.
    pub activity: f64,
}

impl Clause {
    pub fn new(lits: Vec<Lit>) -> Clause {
        Clause {
            lits,
            learned: false,
            activity: 0.0,
        }
    }

    pub fn learned(lits: Vec<Lit>) -> Clause {
        Clause {
            lits,
            learned: true,
            activity: 0.0,
        }
    }

    /// Removes duplicate literals, keeping first occurrences. Returns `None`
    /// when the clause is tautological.
    pub fn normalized(lits: &[Lit]) -> Option<Vec<Lit>> {
        let mut out: Vec<Lit> = Vec::with_capacity(lits.len());
        for &lit in lits {
            if out.contains(&!lit) {
                return None;
            }
            if !out.contains(&lit) {
                out.push(lit);
            }
        }
        Some(out)
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.contains(&lit)
    }

    pub fn is_satisfied_by(&self, values: &[bool]) -> bool {
        self.lits.iter().any(|l| l.eval(values[l.var().index()]))
    }
}

/// A CNF formula: immutable original clauses plus a growable learned store.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Formula {
    pub num_vars: usize,
    pub original: Vec<Clause>,
    pub learned: Vec<Clause>,
}

impl Formula {
    pub fn new(num_vars: usize) -> Formula {
        Formula {
            num_vars,
            original: Vec::new(),
            learned: Vec::new(),
        }
    }

    /// Builds a formula from DIMACS-style signed integer clauses, normalizing
    /// each clause and dropping tautologies.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[Vec<i64>]) -> Formula {
        let mut f = Formula::new(num_vars);
        for c in clauses {
            let lits: Vec<Lit> = c.iter().map(|&v| Lit::from_dimacs(v)).collect();
            f.add_clause(&lits);
        }
        f
    }

    /// Adds an original clause after normalization. Returns false when the
    /// clause was a tautology and has been dropped.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        for l in lits {
            assert!(
                l.var().index() < self.num_vars,
                "literal {} outside of {} variables",
                l,
                self.num_vars
            );
        }
        match Clause::normalized(lits) {
            Some(norm) => {
                self.original.push(Clause::new(norm));
                true
            }
            None => false,
        }
    }

    /// Original clauses followed by learned ones.
    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.original.iter().chain(self.learned.iter())
    }

    pub fn num_clauses(&self) -> usize {
        self.original.len() + self.learned.len()
    }

    /// Clause by index in the `clauses()` order.
    pub fn clause(&self, index: usize) -> &Clause {
        if index < self.original.len() {
            &self.original[index]
        } else {
            &self.learned[index - self.original.len()]
        }
    }

    /// Writes the original clauses in DIMACS CNF.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.original.len());
        for c in &self.original {
            for l in &c.lits {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// A total truth assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Model {
        Model { values }
    }

    pub fn value(&self, var: Var) -> bool {
        self.values[var.index()]
    }

    pub fn lit_is_true(&self, lit: Lit) -> bool {
        lit.eval(self.values[lit.var().index()])
    }

    /// The model as signed DIMACS literals.
    pub fn to_dimacs_lits(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &b)| Lit::new(Var::new(i), b).to_dimacs())
            .collect()
    }
}

/// True iff every clause of `f`, learned ones included, has a true literal.
pub fn verify_model(f: &Formula, m: &Model) -> bool {
    if m.values.len() < f.num_vars {
        return false;
    }
    f.clauses().all(|c| c.is_satisfied_by(&m.values))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolvent {
    Clause(Vec<Lit>),
    Tautology,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("pivot literal {0} does not occur in the first clause")]
    PivotMissingLeft(Lit),
    #[error("negated pivot {0} does not occur in the second clause")]
    PivotMissingRight(Lit),
}

/// Resolves `left` (containing `pivot`) with `right` (containing `!pivot`).
pub fn resolvent(left: &[Lit], right: &[Lit], pivot: Lit) -> Result<Resolvent, ResolveError> {
    if !left.contains(&pivot) {
        return Err(ResolveError::PivotMissingLeft(pivot));
    }
    if !right.contains(&!pivot) {
        return Err(ResolveError::PivotMissingRight(!pivot));
    }
    let merged: Vec<Lit> = left
        .iter()
        .chain(right.iter())
        .copied()
        .filter(|l| l.var() != pivot.var())
        .collect();
    Ok(match Clause::normalized(&merged) {
        Some(lits) => Resolvent::Clause(lits),
        None => Resolvent::Tautology,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("malformed header `{0}`")]
    BadHeader(String),
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("invalid token `{0}`")]
    BadToken(String),
    #[error("literal {lit} exceeds the {num_vars} declared variables")]
    VarOutOfRange { lit: i64, num_vars: usize },
    #[error("last clause is missing its terminating 0")]
    MissingTerminator,
    #[error("input is not valid UTF-8")]
    Encoding,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses DIMACS CNF. Duplicate literals are merged and tautologies dropped,
/// so the clause count may be lower than the header's.
pub fn parse_dimacs(input: &[u8]) -> Result<Formula, ParseError> {
    let text = std::str::from_utf8(input).map_err(|_| err(1, ParseErrorKind::Encoding))?;
    if text.trim().is_empty() {
        return Err(err(1, ParseErrorKind::Empty));
    }

    let mut formula: Option<Formula> = None;
    let mut current: Vec<Lit> = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        // SATLIB files end with a `%` line followed by junk.
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if formula.is_some() {
                return Err(err(line_no, ParseErrorKind::DuplicateHeader));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || err(line_no, ParseErrorKind::BadHeader(line.to_string()));
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(bad());
            }
            let vars: usize = parts[2].parse().map_err(|_| bad())?;
            let _clauses: usize = parts[3].parse().map_err(|_| bad())?;
            formula = Some(Formula::new(vars));
            continue;
        }
        let f = formula
            .as_mut()
            .ok_or_else(|| err(line_no, ParseErrorKind::MissingHeader))?;
        for tok in line.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| err(line_no, ParseErrorKind::BadToken(tok.to_string())))?;
            if value == 0 {
                f.add_clause(&current);
                current.clear();
                continue;
            }
            if value.unsigned_abs() as usize > f.num_vars {
                return Err(err(
                    line_no,
                    ParseErrorKind::VarOutOfRange {
                        lit: value,
                        num_vars: f.num_vars,
                    },
                ));
            }
            current.push(Lit::from_dimacs(value));
        }
    }

    let f = formula.ok_or_else(|| err(last_line, ParseErrorKind::MissingHeader))?;
    if !current.is_empty() {
        return Err(err(last_line, ParseErrorKind::MissingTerminator));
    }
    Ok(f)
}
