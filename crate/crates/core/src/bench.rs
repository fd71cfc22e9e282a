//! Desk-scale benchmark harness: solves every DIMACS file of a directory
//! with several solver modes and emits a results table and cactus data.

use std::fmt;
use std::fs;
use std::io;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cdcl::solve_cdcl;
use crate::cnf::{parse_dimacs, verify_model, Formula};
use crate::hybrid::{solve_hybrid, solve_local_search_only, HybridParams};
use crate::outcome::{Budget, SolveOutcome, Stats, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SolverMode {
    Hybrid,
    Cdcl,
    LsOnly,
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMode::Hybrid => "hybrid",
            SolverMode::Cdcl => "cdcl",
            SolverMode::LsOnly => "ls-only",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown solver mode `{0}` (expected hybrid, cdcl or ls-only)")]
pub struct UnknownMode(String);

impl FromStr for SolverMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hybrid" => Ok(SolverMode::Hybrid),
            "cdcl" => Ok(SolverMode::Cdcl),
            "ls-only" => Ok(SolverMode::LsOnly),
            other => Err(UnknownMode(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: SolverMode,
    pub seed: u64,
    pub max_flips: Option<u64>,
    pub timeout: Option<Duration>,
    pub flip_limit: Option<u64>,
}

impl RunConfig {
    pub fn new(mode: SolverMode, seed: u64) -> RunConfig {
        RunConfig {
            mode,
            seed,
            max_flips: None,
            timeout: None,
            flip_limit: None,
        }
    }
}

/// Runs one solver mode on a formula.
pub fn run_solver(formula: &Formula, config: &RunConfig) -> SolveOutcome {
    let budget = Budget {
        timeout: config.timeout,
        max_conflicts: None,
        max_flips: config.flip_limit,
    };
    let params = HybridParams {
        max_flips: config.max_flips,
        seed: config.seed,
        budget,
    };
    match config.mode {
        SolverMode::Hybrid => solve_hybrid(formula, &params),
        SolverMode::Cdcl => solve_cdcl(formula, &budget),
        SolverMode::LsOnly => solve_local_search_only(formula, &params),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: PathBuf,
    pub mode: SolverMode,
    pub seed: u64,
    pub status: Status,
    pub seconds: f64,
    pub stats: Stats,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub modes: Vec<SolverMode>,
    pub timeout: Duration,
    pub seed: u64,
    pub jobs: usize,
    pub max_flips: Option<u64>,
    pub flip_limit: Option<u64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            modes: vec![SolverMode::Hybrid, SolverMode::Cdcl],
            timeout: Duration::from_secs(1200),
            seed: 0,
            jobs: 1,
            max_flips: None,
            flip_limit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus directory {0} does not exist")]
    MissingCorpus(PathBuf),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    /// Sorted by instance, then mode.
    pub records: Vec<RunRecord>,
    /// Instances where one mode said SAT and another UNSAT.
    pub disagreements: Vec<PathBuf>,
    /// Records whose SAT model failed verification.
    pub bad_models: Vec<(PathBuf, SolverMode)>,
}

impl BenchReport {
    pub fn is_sound(&self) -> bool {
        self.disagreements.is_empty() && self.bad_models.is_empty()
    }

    /// Comma-separated table with a header line.
    pub fn results_csv(&self) -> String {
        let mut out = String::from(
            "instance,mode,seed,status,seconds,flips,local_minima,fix_calls,conflicts,learned,restarts,note\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{},{},{},{},{},{},{}\n",
                r.instance.display(),
                r.mode,
                r.seed,
                r.status,
                r.seconds,
                r.stats.flips,
                r.stats.local_minima,
                r.stats.fix_calls,
                r.stats.conflicts,
                r.stats.learned,
                r.stats.restarts,
                r.note.replace([',', '\n'], ";"),
            ));
        }
        out
    }

    /// Solve times per mode in increasing order, as `mode,rank,seconds`.
    pub fn cactus_csv(&self) -> String {
        let mut out = String::from("mode,rank,seconds\n");
        let mut modes: Vec<SolverMode> = self.records.iter().map(|r| r.mode).collect();
        modes.sort();
        modes.dedup();
        for mode in modes {
            let mut times: Vec<f64> = self
                .records
                .iter()
                .filter(|r| r.mode == mode && r.status != Status::Unknown)
                .map(|r| r.seconds)
                .collect();
            times.sort_by(f64::total_cmp);
            for (rank, t) in times.iter().enumerate() {
                out.push_str(&format!("{},{},{:.6}\n", mode, rank + 1, t));
            }
        }
        out
    }

    /// Writes `results.csv` and `cactus.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), self.results_csv())?;
        fs::write(dir.join("cactus.csv"), self.cactus_csv())?;
        Ok(())
    }
}

/// DIMACS files (`.cnf`) of a directory, sorted by name.
pub fn list_corpus(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    if !dir.is_dir() {
        return Err(BenchError::MissingCorpus(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "cnf"))
        .collect();
    files.sort();
    Ok(files)
}

/// Seed for the `index`-th instance, derived from the base seed.
pub fn instance_seed(base: u64, index: usize) -> u64 {
    // splitmix64 step
    let mut z = base.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_one(path: &Path, config: &RunConfig) -> (SolveOutcome, String) {
    let unknown = |note: String| {
        (
            SolveOutcome {
                status: Status::Unknown,
                model: None,
                stats: Stats::default(),
            },
            note,
        )
    };
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => return unknown(format!("read error: {e}")),
    };
    let formula = match parse_dimacs(&bytes) {
        Ok(f) => f,
        Err(e) => return unknown(format!("parse error: {e}")),
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| {
        let out = run_solver(&formula, config);
        let verified = out
            .model
            .as_ref()
            .map(|m| verify_model(&formula, m))
            .unwrap_or(true);
        (out, verified)
    }));
    match result {
        Ok((out, true)) => (out, String::new()),
        Ok((out, false)) => (out, "model verification failed".to_string()),
        Err(_) => unknown("solver panicked".to_string()),
    }
}

/// Runs every (instance, mode) pair on a pool of `config.jobs` threads.
pub fn run_bench(corpus: &Path, config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let files = list_corpus(corpus)?;
    let jobs: Vec<(usize, SolverMode)> = (0..files.len())
        .flat_map(|i| config.modes.iter().map(move |&m| (i, m)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; jobs.len()]);

    let workers = config.jobs.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, mode)) = jobs.get(k) else {
                    break;
                };
                let seed = instance_seed(config.seed, i);
                let run = RunConfig {
                    mode,
                    seed,
                    max_flips: config.max_flips,
                    timeout: Some(config.timeout),
                    flip_limit: config.flip_limit,
                };
                let start = Instant::now();
                let (out, note) = run_one(&files[i], &run);
                let record = RunRecord {
                    instance: files[i]
                        .file_name()
                        .map(PathBuf::from)
                        .unwrap_or_else(|| files[i].clone()),
                    mode,
                    seed,
                    status: out.status,
                    seconds: start.elapsed().as_secs_f64(),
                    stats: out.stats,
                    note,
                };
                results.lock().unwrap()[k] = Some(record);
            });
        }
    });

    let records: Vec<RunRecord> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect();

    let mut report = BenchReport::default();
    for chunk in records.chunks(config.modes.len().max(1)) {
        let sat = chunk.iter().any(|r| r.status == Status::Sat);
        let unsat = chunk.iter().any(|r| r.status == Status::Unsat);
        if sat && unsat {
            report.disagreements.push(chunk[0].instance.clone());
        }
        for r in chunk {
            if r.note == "model verification failed" {
                report.bad_models.push((r.instance.clone(), r.mode));
            }
        }
    }
    report.records = records;
    Ok(report)
}
