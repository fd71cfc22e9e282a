use std::fmt;
use std::time::{Duration, Instant};

use crate::cnf::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl Status {
    /// Conventional SAT-competition exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Sat => 10,
            Status::Unsat => 20,
            Status::Unknown => 0,
        }
    }

    pub fn competition_line(self) -> &'static str {
        match self {
            Status::Sat => "s SATISFIABLE",
            Status::Unsat => "s UNSATISFIABLE",
            Status::Unknown => "s UNKNOWN",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub flips: u64,
    pub local_minima: u64,
    pub fix_calls: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub deleted: u64,
    pub restarts: u64,
    pub seconds: f64,
}

impl Stats {
    /// `key=value` pairs in a fixed order; `seconds` is left out so the
    /// output stays reproducible.
    pub fn counters(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("flips", self.flips),
            ("local_minima", self.local_minima),
            ("fix_calls", self.fix_calls),
            ("decisions", self.decisions),
            ("propagations", self.propagations),
            ("conflicts", self.conflicts),
            ("learned", self.learned),
            ("deleted", self.deleted),
            ("restarts", self.restarts),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: Status,
    /// Present iff `status == Sat`.
    pub model: Option<Model>,
    pub stats: Stats,
}

/// Resource limits. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Budget {
    pub timeout: Option<Duration>,
    pub max_conflicts: Option<u64>,
    pub max_flips: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn with_timeout(timeout: Duration) -> Budget {
        Budget {
            timeout: Some(timeout),
            ..Budget::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Deadline(Option<Instant>);

impl Deadline {
    pub(crate) fn new(start: Instant, budget: &Budget) -> Deadline {
        Deadline(budget.timeout.map(|t| start + t))
    }

    pub(crate) fn expired(&self) -> bool {
        self.0.is_some_and(|d| Instant::now() >= d)
    }
}
