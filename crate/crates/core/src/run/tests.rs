use super::*;

fn bench_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("benchmarks")
}

fn stats(outcome: Outcome) -> RunStats {
    RunStats {
        outcome,
        program: None,
        program_size: None,
        nodes_expanded: 0,
        nodes_pruned: 0,
        smt_issued: 0,
        smt_cache_hits: 0,
        stuck_nodes: 0,
        wall_ms: 0,
    }
}

fn run_with(program: Option<&str>) -> Run {
    let program = program.map(|p| parse_program(p).unwrap());
    let outcome = if program.is_some() { Outcome::Solved } else { Outcome::Failed };
    Run { stats: stats(outcome), program, prunes: Vec::new() }
}

#[test]
fn expect_reads_outcome_and_golden() {
    let e = Expect::parse("outcome: solved\ngolden:\ny1 ← f (x);\nreturn y1\n").unwrap();
    assert!(e.solvable);
    assert_eq!(e.golden, Some(parse_program("y1 ← f (x);\nreturn y1").unwrap()));
    assert_eq!(Expect::parse("outcome: failed").unwrap(), Expect { solvable: false, golden: None });
}

#[test]
fn expect_rejects_malformed_sidecars() {
    assert!(Expect::parse("").is_err());
    assert!(Expect::parse("outcome: maybe").is_err());
    assert!(Expect::parse("result: solved").is_err());
    assert!(Expect::parse("outcome: failed\ngolden:\nreturn ()").is_err());
}

#[test]
fn golden_comparison_ignores_binder_names() {
    let e = Expect::parse("outcome: solved\ngolden:\ny1 ← f (x);\nreturn y1").unwrap();
    let same = run_with(Some("z ← f (x);\nreturn z"));
    let other = run_with(Some("z ← g (x);\nreturn z"));
    assert!(e.met_by(&[(Mode::Cobalt, &same)]));
    assert!(!e.met_by(&[(Mode::Cobalt, &other)]));
    assert!(!e.met_by(&[(Mode::Cobalt, &run_with(None))]));
}

#[test]
fn failing_entry_passes_only_when_every_mode_fails() {
    let e = Expect { solvable: false, golden: None };
    let none = run_with(None);
    let some = run_with(Some("return ()"));
    assert!(e.met_by(&[(Mode::Cobalt, &none), (Mode::FwAlone, &none)]));
    assert!(!e.met_by(&[(Mode::Cobalt, &none), (Mode::FwAlone, &some)]));
}

#[test]
fn empty_suite_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let rows = bench(dir.path(), &RunConfig::default(), 2).unwrap();
    assert!(rows.is_empty());
    assert_eq!(report_table(&rows).lines().count(), 1);
}

#[test]
fn unsatisfiable_query_row_passes() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["never.spec", "never.expect"] {
        std::fs::copy(bench_dir().join(f), dir.path().join(f)).unwrap();
    }
    let rows = bench(dir.path(), &RunConfig { depth: 3, ..RunConfig::default() }, 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].pass);
    assert_eq!(rows[0].modes.len(), Mode::ALL.len());
    assert!(rows[0].modes.iter().all(|m| m.stats.outcome == Outcome::Failed));
}

#[test]
fn stats_serialize_flat_with_snake_case_keys() {
    let run = run_file(&bench_dir().join("d1.spec"), &RunConfig::default()).unwrap();
    assert_eq!(run.stats.outcome, Outcome::Solved);
    let v = serde_json::to_value(&run.stats).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    for k in [
        "outcome",
        "program",
        "program_size",
        "nodes_expanded",
        "nodes_pruned",
        "smt_issued",
        "smt_cache_hits",
        "stuck_nodes",
        "wall_ms",
    ] {
        assert!(keys.contains(&k), "{}", k);
    }
    assert_eq!(v["outcome"], "solved");
    assert!(v.as_object().unwrap().values().all(|x| !x.is_object() && !x.is_array()));
}

#[test]
fn zero_budget_times_out() {
    let cfg = RunConfig { timeout: Duration::ZERO, mode: Mode::FwAlone, ..RunConfig::default() };
    let run = run_file(&bench_dir().join("goal2.spec"), &cfg).unwrap();
    assert_eq!(run.stats.outcome, Outcome::Timeout);
    assert!(run.program.is_none());
}

#[test]
fn verify_accepts_the_golden_and_rejects_a_wrong_program() {
    let p = load_problem(&read(&bench_dir().join("d1.spec")).unwrap()).unwrap();
    let ok = verify_program(&p, "_ ← confirm (n, u);\nu1 ← unsubscribe (n, u);\nreturn u1", SolverConfig::default());
    assert!(ok.unwrap().is_empty());
    let bad = verify_program(&p, "u1 ← unsubscribe (n, u);\nreturn u1", SolverConfig::default()).unwrap();
    assert!(!bad.is_empty());
}

#[test]
fn parse_errors_map_to_exit_two() {
    let err = load_problem("query q : garbage").unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert_eq!(RunError::Solver(SmtError::SolverNotFound("x".into())).exit_code(), 3);
}
