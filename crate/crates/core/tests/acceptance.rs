//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use hybrid_sat::cdcl::{CdclConfig, CdclEngine};
use hybrid_sat::generate::{pigeonhole, random_3sat};
use hybrid_sat::mus::{check_prop2, enumerate_mus, is_critical};
use hybrid_sat::{
    solve_cdcl, solve_hybrid, verify_model, Budget, Formula, HybridParams, HybridSolver, Status,
};
use rand::Rng;

type Verdict = Result<String, String>;

fn oracle_instance(i: u64) -> Formula {
    let mut r = rng(0xACCE_5500 + i);
    let n = r.gen_range(3..=15);
    let ratio = r.gen_range(2.0..=6.0);
    random_3sat(n, ratio, i).unwrap()
}

#[derive(Default)]
struct OracleTally {
    instances: usize,
    sat: usize,
    disagreements: Vec<String>,
    bad_models: usize,
    learned: usize,
    non_asserting: usize,
    not_implied: usize,
    flips: usize,
    fixed_flips: usize,
}

/// Runs the hybrid and CDCL solvers, instrumented, on the oracle corpus.
fn oracle_suite() -> OracleTally {
    let mut t = OracleTally::default();
    for i in 0..1000u64 {
        let f = oracle_instance(i);
        let expected = brute_force(&f).is_some();
        t.instances += 1;
        t.sat += expected as usize;

        let mut hybrid =
            HybridSolver::with_observer(&f, HybridParams::with_seed(i), Recorder::default());
        let h = hybrid.solve();
        let h_rec = hybrid.into_observer();

        let mut cdcl = CdclEngine::with_observer(&f, CdclConfig::default(), Recorder::default());
        let c = cdcl.solve(&Budget::unlimited());
        let c_rec = cdcl.into_observer();

        for (name, out) in [("hybrid", &h), ("cdcl", &c)] {
            let got = match out.status {
                Status::Sat => true,
                Status::Unsat => false,
                Status::Unknown => {
                    t.disagreements.push(format!("#{i} {name} unknown"));
                    continue;
                }
            };
            if got != expected {
                t.disagreements.push(format!("#{i} {name}"));
            }
            if let Some(m) = &out.model {
                if !verify_model(&f, m) {
                    t.bad_models += 1;
                }
            }
        }

        for rec in [&h_rec, &c_rec] {
            t.learned += rec.learned.len();
            t.non_asserting += rec.non_asserting;
            t.not_implied += rec
                .learned
                .iter()
                .filter(|c| !implied_by_original(&f, c))
                .count();
            t.flips += rec.flips;
            t.fixed_flips += rec.fixed_flips;
        }
    }
    t
}

fn oracle_equivalence(t: &OracleTally) -> Verdict {
    let detail = format!(
        "{} instances ({} SAT), {} disagreements, {} invalid models",
        t.instances,
        t.sat,
        t.disagreements.len(),
        t.bad_models
    );
    if t.disagreements.is_empty() && t.bad_models == 0 && t.instances == 1000 {
        Ok(detail)
    } else {
        Err(format!("{detail}: {:?}", t.disagreements))
    }
}

fn first_uip_structure(t: &OracleTally) -> Verdict {
    let detail = format!(
        "{} learned clauses, {} not asserting, {} not implied",
        t.learned, t.non_asserting, t.not_implied
    );
    if t.non_asserting == 0 && t.not_implied == 0 && t.learned > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tabu_semantics(t: &OracleTally) -> Verdict {
    let detail = format!("{} flips, {} on trail-assigned variables", t.flips, t.fixed_flips);
    if t.fixed_flips == 0 && t.flips > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn unsat_capability() -> Verdict {
    let mut cases: Vec<(String, Formula)> = (3..=5)
        .map(|p| (format!("pigeonhole({p},{})", p - 1), pigeonhole(p, p - 1)))
        .collect();
    cases.push(("mus example".into(), mus_example()));
    let mut report = Vec::new();
    let mut ok = true;
    for (name, f) in cases {
        let params = HybridParams {
            budget: Budget::with_timeout(Duration::from_secs(10)),
            ..HybridParams::with_seed(1)
        };
        let start = Instant::now();
        let out = solve_hybrid(&f, &params);
        let secs = start.elapsed().as_secs_f64();
        ok &= out.status == Status::Unsat && secs <= 10.0;
        report.push(format!("{name}: {} in {secs:.3}s", out.status));
    }
    if ok {
        Ok(report.join(", "))
    } else {
        Err(report.join(", "))
    }
}

fn sat_capability() -> Verdict {
    let mut instances = Vec::new();
    let mut seed = 0u64;
    while instances.len() < 100 {
        let f = random_3sat(50, 4.0, 0x5A7_0000 + seed).unwrap();
        seed += 1;
        if solve_cdcl(&f, &Budget::unlimited()).status == Status::Sat {
            instances.push(f);
        }
    }
    let mut solved = 0;
    let mut slowest = 0f64;
    for (i, f) in instances.iter().enumerate() {
        let params = HybridParams {
            budget: Budget::with_timeout(Duration::from_secs(10)),
            ..HybridParams::with_seed(i as u64)
        };
        let start = Instant::now();
        let out = solve_hybrid(f, &params);
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        if out.status == Status::Sat
            && secs <= 10.0
            && out.model.as_ref().is_some_and(|m| verify_model(f, m))
        {
            solved += 1;
        }
    }
    let detail = format!(
        "{solved}/100 solved ({} generated to find 100 satisfiable), slowest {slowest:.3}s",
        seed
    );
    if solved >= 95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criticality_suite() -> Verdict {
    let mut minima = 0;
    let mut checked = 0;
    let mut violations = 0;
    for i in 0..200u64 {
        let mut r = rng(0x9A0_0000 + i);
        let n = r.gen_range(3..=10);
        let m = r.gen_range(n..=6 * n);
        let f = random_formula(&mut r, n, m, 3);
        for values in local_minima(&f) {
            minima += 1;
            for c in falsified_set(&f, &values) {
                checked += 1;
                if !is_critical(&f.clause(c).lits, &f, &values).critical {
                    violations += 1;
                }
            }
        }
    }
    let detail = format!(
        "200 formulas, {minima} local minima, {checked} falsified clauses, {violations} not critical"
    );
    if violations == 0 && minima > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mus_criticality_suite() -> Verdict {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, f) in [
        ("mus example", mus_example()),
        ("pigeonhole(3,2)", pigeonhole(3, 2)),
    ] {
        let muses = enumerate_mus(&f).unwrap();

        let mut exhaustive = 0;
        let mut exhaustive_bad = 0;
        for values in local_minima(&f) {
            exhaustive += 1;
            exhaustive_bad += !check_prop2(&f, &values, &muses) as usize;
        }

        let mut minima = 0;
        let mut bad = 0;
        let mut restricted = 0;
        let mut restricted_bad = 0;
        let mut prop1_bad = 0;
        for seed in 0..100 {
            let rec = Recorder {
                muses: Some(muses.clone()),
                check_prop1: true,
                ..Recorder::default()
            };
            let mut s = HybridSolver::with_observer(&f, HybridParams::with_seed(seed), rec);
            let out = s.solve();
            ok &= out.status == Status::Unsat;
            let rec = s.into_observer();
            minima += rec.minima;
            bad += rec.prop2_violations;
            restricted += rec.restricted_checked;
            restricted_bad += rec.restricted_violations;
            prop1_bad += rec.prop1_violations;
        }
        ok &= exhaustive_bad == 0 && bad == 0 && restricted_bad == 0 && prop1_bad == 0;
        details.push(format!(
            "{name}: {} MUS, {exhaustive} enumerated minima ({exhaustive_bad} bad), \
             {minima} search minima ({bad} bad, {restricted} with simplified-formula MUSes, \
             {restricted_bad} bad, {prop1_bad} non-critical falsified)",
            muses.len()
        ));
    }
    if ok {
        Ok(details.join("; "))
    } else {
        Err(details.join("; "))
    }
}

fn mus_oracle() -> Verdict {
    let f = mus_example();
    let muses = enumerate_mus(&f).map_err(|e| e.to_string())?;
    let mut sizes: Vec<usize> = muses.iter().map(Vec::len).collect();
    sizes.sort();
    let common: Vec<usize> = match muses.as_slice() {
        [x, y] => x.iter().copied().filter(|i| y.contains(i)).collect(),
        _ => vec![],
    };
    let text = |ids: &[usize]| -> Vec<String> {
        ids.iter()
            .map(|&i| {
                let lits: Vec<String> = f.clause(i).lits.iter().map(|l| l.to_string()).collect();
                format!("({})", lits.join(" "))
            })
            .collect()
    };
    let detail = format!(
        "{} MUS of sizes {:?}, shared clauses {:?}",
        muses.len(),
        sizes,
        text(&common)
    );
    // a is clause 4 and the negation of b is clause 7.
    if muses.len() == 2 && sizes == [3, 5] && common == [4, 7] {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_cli(args: &[&str]) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hybrid-sat"))
        .args(args)
        .env_remove("HYBRID_SAT_TIMEOUT")
        .output()
        .expect("run hybrid-sat");
    (out.stdout, out.status.code())
}

fn without_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(4);
            cols.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    let path = |name: &str| corpus.join(name).to_string_lossy().into_owned();

    let gens: [&[&str]; 4] = [
        &["gen", "random3sat", "--vars", "40", "--ratio", "4.0", "--seed", "3"],
        &["gen", "random3sat", "--vars", "30", "--ratio", "5.5", "--seed", "9"],
        &["gen", "random3sat", "--vars", "60", "--ratio", "3.5", "--seed", "1"],
        &["gen", "pigeonhole", "--pigeons", "5", "--holes", "4"],
    ];
    for (k, g) in gens.iter().enumerate() {
        let (first, code) = run_cli(g);
        let (second, _) = run_cli(g);
        if code != Some(0) || first != second {
            return Err(format!("`{}` not reproducible", g.join(" ")));
        }
        fs::write(corpus.join(format!("i{k}.cnf")), first).unwrap();
    }

    let mut runs = 0;
    for k in 0..gens.len() {
        let file = path(&format!("i{k}.cnf"));
        for mode in ["hybrid", "cdcl", "ls-only"] {
            for seed in ["0", "17"] {
                let args = [
                    "solve", &file, "--mode", mode, "--seed", seed, "--flip-limit", "200000",
                ];
                let (a, ca) = run_cli(&args);
                let (b, cb) = run_cli(&args);
                runs += 1;
                if a != b || ca != cb {
                    return Err(format!("`solve i{k}.cnf --mode {mode} --seed {seed}` differs"));
                }
            }
        }
    }

    let out = dir.path().join("out");
    let bench = || {
        run_cli(&[
            "bench",
            &corpus.to_string_lossy(),
            "--out",
            &out.to_string_lossy(),
            "--modes",
            "hybrid,cdcl,ls-only",
            "--seed",
            "5",
            "--jobs",
            "3",
            "--flip-limit",
            "200000",
        ])
    };
    let (sa, _) = bench();
    let ra = fs::read_to_string(out.join("results.csv")).unwrap();
    let (sb, _) = bench();
    let rb = fs::read_to_string(out.join("results.csv")).unwrap();
    if sa != sb || without_seconds(&ra) != without_seconds(&rb) {
        return Err("bench output differs between runs".into());
    }
    Ok(format!(
        "{runs} solve commands and a 3-mode bench reproduced byte for byte"
    ))
}

#[test]
fn acceptance_criteria() {
    let results: Vec<(&str, Verdict)> = std::thread::scope(|s| {
        let oracle = s.spawn(oracle_suite);
        let others: Vec<(&str, _)> = vec![
            ("UNSAT capability", s.spawn(unsat_capability)),
            ("SAT capability", s.spawn(sat_capability)),
            ("criticality at local minima", s.spawn(criticality_suite)),
            ("critical clause in every MUS", s.spawn(mus_criticality_suite)),
            ("MUS oracle", s.spawn(mus_oracle)),
            ("determinism", s.spawn(determinism)),
        ];
        let tally = oracle.join().expect("oracle suite panicked");
        let mut results = vec![
            ("oracle equivalence", oracle_equivalence(&tally)),
            ("first-UIP structure", first_uip_structure(&tally)),
            ("tabu semantics", tabu_semantics(&tally)),
        ];
        for (name, h) in others {
            let v = h
                .join()
                .unwrap_or_else(|_| Err("criterion panicked".to_string()));
            results.push((name, v));
        }
        results
    });

    for (name, v) in &results {
        match v {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => println!("FAIL {name}: {d}"),
        }
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, v)| v.is_err())
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
