use super::*;
use crate::corelang::parse_program;
use crate::smt::SolverConfig;
use crate::speclang::{parse_prop, parse_spec_file};

fn load(name: &str) -> Problem {
    let path = format!("{}/benchmarks/{}", env!("CARGO_MANIFEST_DIR"), name);
    Problem::from_spec(&parse_spec_file(&std::fs::read_to_string(path).unwrap()).unwrap())
}

fn solver() -> Solver {
    Solver::new(SolverConfig::default()).unwrap()
}

const GOLDEN: &str = "\
b1 ← mem_tbl (tbl, s);
if (b1)
  then s1 ← fresh_str (tbl);
    _ ← add_tbl (tbl, s1);
    x1 ← avg_len_tbl (tbl);
    y1 ← size_tbl (tbl);
    return Pair (x1, y1)
  else _ ← add_tbl (tbl, s);
    x1 ← avg_len_tbl (tbl);
    y1 ← size_tbl (tbl);
    return Pair (x1, y1)";

#[test]
fn golden_table_program_checks() {
    let p = load("goal2.spec");
    let e = parse_program(GOLDEN).unwrap();
    let r = check_query(&p, &e, &mut solver()).unwrap();
    assert!(r.ok, "{:#?}", r.trace.iter().map(|t| (&t.what, &t.result)).collect::<Vec<_>>());
    // The true branch is checked under the guard's branch fact.
    let taken = parse_prop("[b1 = true]").unwrap();
    let branch_post = parse_prop("mem (Tbl1, s) /\\ [size (Tbl1) = size (Tbl0) + 1]").unwrap();
    let last_true = r.trace.iter().find(|t| t.goal == branch_post).expect("true-branch post");
    assert!(last_true.facts.conjuncts().contains(&taken));
    assert_eq!(r.trace.len(), 12);
}

#[test]
fn dropping_the_guard_breaks_add_tbl_pre() {
    let p = load("goal2.spec");
    let e = parse_program("_ ← add_tbl (tbl, s);\nx1 ← avg_len_tbl (tbl);\ny1 ← size_tbl (tbl);\nreturn Pair (x1, y1)").unwrap();
    let trace = vc_trace(&p, &p.goal, &e, &mut solver()).unwrap();
    assert_eq!(trace.len(), 1);
    assert!(matches!(trace[0].1, Validity::Invalid(_)));
}

#[test]
fn skip_against_trivial_goal() {
    let p = load("goal2.spec");
    let g = Goal {
        name: "triv".into(),
        params: vec![],
        pre: Prop::True,
        post: Prop::True,
        result_var: "v".into(),
        result: Sort::Unit,
    };
    let trace = vc_trace(&p, &g, &Expr::Skip, &mut solver()).unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0].1, Validity::Valid);
}

#[test]
fn holes_and_unknown_components_are_ill_typed() {
    let p = load("goal2.spec");
    let mut s = solver();
    let hole = parse_program("x ← (?? : float);\nreturn x").unwrap();
    assert!(matches!(check_query(&p, &hole, &mut s), Err(VerifyError::IllTyped { .. })));
    let bad = parse_program("x ← nope (tbl);\nreturn x").unwrap();
    assert!(matches!(check_query(&p, &bad, &mut s), Err(VerifyError::IllTyped { .. })));
    let wrong_sort = parse_program("x ← size_tbl (s);\nreturn x").unwrap();
    assert!(matches!(check_query(&p, &wrong_sort, &mut s), Err(VerifyError::IllTyped { .. })));
}

#[test]
fn wrong_result_fails_post() {
    let p = load("goal2.spec");
    let e = parse_program(
        "x1 ← avg_len_tbl (tbl);\ny1 ← size_tbl (tbl);\nreturn Pair (x1, y1)",
    )
    .unwrap();
    let r = check_query(&p, &e, &mut solver()).unwrap();
    assert!(!r.ok);
}

#[test]
fn checking_is_deterministic() {
    let p = load("goal2.spec");
    let e = parse_program(GOLDEN).unwrap();
    let a = vc_trace(&p, &p.goal, &e, &mut solver()).unwrap();
    let b = vc_trace(&p, &p.goal, &e, &mut solver()).unwrap();
    assert_eq!(a, b);
}

