use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use hybrid_sat::bench::{run_bench, run_solver, BenchConfig, RunConfig, SolverMode};
use hybrid_sat::cnf::{parse_dimacs, verify_model, Formula, Lit};
use hybrid_sat::generate::{random_3sat, try_pigeonhole};
use hybrid_sat::mus::{enumerate_mus, is_critical};

const LITS_PER_LINE: usize = 20;

#[derive(Parser)]
#[command(name = "hybrid-sat", version, about = "Local search SAT solver with CDCL-based escapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one DIMACS CNF file.
    Solve(SolveArgs),
    /// Run every .cnf file of a directory with several modes.
    Bench(BenchArgs),
    /// Generate a benchmark instance.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Enumerate the MUSes of a small instance and report critical clauses.
    Mus(MusArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Iterations between restarts of the local search (default 100 * vars).
    #[arg(long)]
    max_flips: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long, env = "HYBRID_SAT_TIMEOUT", default_value_t = 1200.0)]
    timeout: f64,
    /// Stop after this many local-search flips.
    #[arg(long)]
    flip_limit: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value = "hybrid")]
    mode: SolverMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    flags: SolverFlags,
    /// Also print the solving time.
    #[arg(long)]
    stats: bool,
    /// Re-check the model against the input and report it.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct BenchArgs {
    corpus: PathBuf,
    /// Directory receiving results.csv and cactus.csv.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "hybrid,cdcl")]
    modes: Vec<SolverMode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Uniform random 3-SAT.
    Random3sat {
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 4.26)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Pigeonhole principle: unsatisfiable when pigeons > holes.
    Pigeonhole {
        #[arg(long)]
        pigeons: usize,
        #[arg(long)]
        holes: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MusArgs {
    file: PathBuf,
    /// Total assignment as DIMACS literals, e.g. "1 -2 3", used for the
    /// criticality report.
    #[arg(long, allow_hyphen_values = true)]
    assign: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Gen(cmd) => generate(cmd).map(|_| 0),
        Command::Mus(args) => mus(args).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_formula(path: &PathBuf) -> Result<Formula, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_dimacs(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn timeout(secs: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(secs).map_err(|_| format!("invalid timeout {secs}"))
}

fn solve(args: SolveArgs) -> Result<u8, String> {
    let formula = read_formula(&args.file)?;
    let config = RunConfig {
        mode: args.mode,
        seed: args.seed,
        max_flips: args.flags.max_flips,
        timeout: Some(timeout(args.flags.timeout)?),
        flip_limit: args.flags.flip_limit,
    };
    let outcome = run_solver(&formula, &config);

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut lines = vec![
        format!("c mode={} seed={}", args.mode, args.seed),
        format!(
            "c vars={} clauses={}",
            formula.num_vars,
            formula.original.len()
        ),
    ];
    for (k, v) in outcome.stats.counters() {
        lines.push(format!("c {k}={v}"));
    }
    if args.stats {
        lines.push(format!("c seconds={:.3}", outcome.stats.seconds));
    }
    if let Some(model) = &outcome.model {
        if !verify_model(&formula, model) {
            return Err("internal error: model does not satisfy the formula".into());
        }
        if args.verify {
            lines.push("c model verified".into());
        }
    }
    lines.push(outcome.status.competition_line().to_string());
    if let Some(model) = &outcome.model {
        lines.extend(value_lines(&model.to_dimacs_lits()));
    }
    for l in lines {
        writeln!(out, "{l}").map_err(|e| e.to_string())?;
    }
    Ok(outcome.status.exit_code() as u8)
}

fn value_lines(lits: &[i64]) -> Vec<String> {
    let mut lines: Vec<String> = lits
        .chunks(LITS_PER_LINE)
        .map(|chunk| {
            let body: Vec<String> = chunk.iter().map(i64::to_string).collect();
            format!("v {}", body.join(" "))
        })
        .collect();
    match lines.last_mut() {
        Some(last) => last.push_str(" 0"),
        None => lines.push("v 0".into()),
    }
    lines
}

fn bench(args: BenchArgs) -> Result<u8, String> {
    let config = BenchConfig {
        modes: args.modes,
        timeout: timeout(args.flags.timeout)?,
        seed: args.seed,
        jobs: args.jobs,
        max_flips: args.flags.max_flips,
        flip_limit: args.flags.flip_limit,
    };
    let report = run_bench(&args.corpus, &config).map_err(|e| e.to_string())?;
    report.write_to(&args.out).map_err(|e| e.to_string())?;
    for r in &report.records {
        println!("c {} {} {}", r.instance.display(), r.mode, r.status);
    }
    println!(
        "c {} runs written to {}",
        report.records.len(),
        args.out.display()
    );
    if !report.is_sound() {
        for i in &report.disagreements {
            eprintln!("error: SAT/UNSAT disagreement on {}", i.display());
        }
        for (i, m) in &report.bad_models {
            eprintln!("error: {m} returned an invalid model on {}", i.display());
        }
        return Ok(3);
    }
    Ok(0)
}

fn generate(cmd: GenCommand) -> Result<(), String> {
    let (formula, out) = match cmd {
        GenCommand::Random3sat {
            vars,
            ratio,
            seed,
            out,
        } => (random_3sat(vars, ratio, seed).map_err(|e| e.to_string())?, out),
        GenCommand::Pigeonhole {
            pigeons,
            holes,
            out,
        } => (
            try_pigeonhole(pigeons, holes).map_err(|e| e.to_string())?,
            out,
        ),
    };
    let text = formula.to_dimacs();
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_assignment(text: &str, num_vars: usize) -> Result<Vec<bool>, String> {
    let mut values = vec![None; num_vars];
    for tok in text.split([' ', ',']).filter(|t| !t.is_empty()) {
        let v: i64 = tok
            .parse()
            .map_err(|_| format!("bad literal `{tok}` in assignment"))?;
        if v == 0 || v.unsigned_abs() as usize > num_vars {
            return Err(format!("literal {v} out of range"));
        }
        let lit = Lit::from_dimacs(v);
        values[lit.var().index()] = Some(lit.is_positive());
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| format!("variable {} missing from assignment", i + 1)))
        .collect()
}

fn clause_text(lits: &[Lit]) -> String {
    let parts: Vec<String> = lits.iter().map(|l| l.to_string()).collect();
    format!("({})", parts.join(" "))
}

fn mus(args: MusArgs) -> Result<(), String> {
    let formula = read_formula(&args.file)?;
    let muses = enumerate_mus(&formula).map_err(|e| e.to_string())?;
    println!("c {} MUS found", muses.len());
    for (k, m) in muses.iter().enumerate() {
        let clauses: Vec<String> = m
            .iter()
            .map(|&i| clause_text(&formula.clause(i).lits))
            .collect();
        println!("mus {} size={} {}", k + 1, m.len(), clauses.join(" "));
    }
    if let Some(text) = args.assign {
        let values = parse_assignment(&text, formula.num_vars)?;
        for (i, c) in formula.clauses().enumerate() {
            let report = is_critical(&c.lits, &formula, &values);
            if !report.falsified {
                continue;
            }
            let links: Vec<String> = report
                .links
                .iter()
                .map(|(l, w)| {
                    let w: Vec<String> = w.iter().map(|j| (j + 1).to_string()).collect();
                    format!("{l}:[{}]", w.join(" "))
                })
                .collect();
            println!(
                "falsified clause {} {} critical={} links {}",
                i + 1,
                clause_text(&c.lits),
                report.critical,
                links.join(" ")
            );
        }
    }
    Ok(())
}
