use super::*;
use crate::corelang::{parse_program, sequence};
use crate::problem::Problem;
use crate::smt::{Solver, SolverConfig};
use crate::speclang::{parse_prop, parse_spec_file};

fn spec_text(name: &str) -> String {
    std::fs::read_to_string(format!("{}/benchmarks/{}", env!("CARGO_MANIFEST_DIR"), name)).unwrap()
}

fn load(name: &str) -> Problem {
    Problem::from_spec(&parse_spec_file(&spec_text(name)).unwrap())
}

fn table_with(query: &str) -> Problem {
    let text = spec_text("goal2.spec");
    let lib = &text[..text.find("query goal2").unwrap()];
    Problem::from_spec(&parse_spec_file(&format!("{}{}", lib, query)).unwrap())
}

fn solver() -> Solver {
    Solver::new(SolverConfig::default()).unwrap()
}

const COBALT: BwConfig = BwConfig { depth: BW_DEPTH, allow_fw: true };
const ALONE: BwConfig = BwConfig { depth: BW_DEPTH, allow_fw: false };

fn listing_shape() -> Shape {
    Shape {
        holes: vec![("x1".into(), Sort::Float), ("y1".into(), Sort::Int)],
        tail: Some(parse_program("return Pair (x1, y1)").unwrap()),
    }
}

#[test]
fn table_goal_yields_pair_hypothesis() {
    let p = load("goal2.spec");
    let mut s = solver();
    let mut ctx = Ctx::new(&p, &mut s);
    let out = bw_outcomes(&mut ctx, &p.goal, &BTreeSet::new(), COBALT).unwrap();
    match &out[0] {
        BwOutcome::Partial { shape, residual } => {
            assert_eq!(*shape, listing_shape());
            let want = parse_prop("size (sel (h', tbl)) = size (sel (h, tbl)) + 1 /\\ mem (sel (h', tbl), s)").unwrap();
            let mut got = residual.post.conjuncts();
            let mut exp = want.conjuncts();
            got.sort_by_key(|c| c.to_string());
            exp.sort_by_key(|c| c.to_string());
            assert_eq!(got, exp);
        }
        other => panic!("{:?}", other),
    }
    // The forward-only attempt comes last.
    assert!(matches!(out.last(), Some(BwOutcome::Partial { shape, .. }) if *shape == Shape::trivial()));
}

#[test]
fn partial_contract_on_table_goal() {
    let p = load("goal2.spec");
    let e_f = parse_program(
        "b1 ← mem_tbl (tbl, s);
if (b1)
  then s1 ← fresh_str (tbl);
    _ ← add_tbl (tbl, s1);
    x1 ← avg_len_tbl (tbl);
    y1 ← size_tbl (tbl);
    skip
  else _ ← add_tbl (tbl, s);
    x1 ← avg_len_tbl (tbl);
    y1 ← size_tbl (tbl);
    skip",
    )
    .unwrap();
    let whole = sequence(&e_f, listing_shape().tail.as_ref().unwrap());
    assert!(typecheck(&p, &p.goal, &whole, &mut solver()).unwrap().ok);
}

#[test]
fn single_call_goal_is_complete() {
    let p = table_with(
        "query count : (tbl : ref) ->
  State {\\(h : heap). true}
  v : int
  {\\(h : heap), (v : int), (h' : heap). \\ (Tbl : table). sel (h, tbl) = Tbl /\\ v == size (Tbl)};",
    );
    let mut s = solver();
    let mut ctx = Ctx::new(&p, &mut s);
    let out = bw_outcomes(&mut ctx, &p.goal, &BTreeSet::new(), ALONE).unwrap();
    match out.last() {
        Some(BwOutcome::Complete(e)) => {
            assert_eq!(alpha_normalize(e), alpha_normalize(&parse_program("y ← size_tbl (tbl);\nreturn y").unwrap()));
            assert!(typecheck(&p, &p.goal, e, ctx.solver).unwrap().ok);
        }
        other => panic!("{:?}", other),
    }
}

#[test]
fn no_producer_fails() {
    let mut p = load("goal2.spec");
    p.ctors.clear();
    p.library.retain(|c| c.result != Sort::Float);
    let mut s = solver();
    let mut ctx = Ctx::new(&p, &mut s);
    assert!(bw_outcomes(&mut ctx, &p.goal, &BTreeSet::new(), ALONE).unwrap().is_empty());
}

#[test]
fn failed_hypotheses_are_not_proposed_again() {
    let p = load("goal2.spec");
    let mut s = solver();
    let mut ctx = Ctx::new(&p, &mut s);
    let mut failed = BTreeSet::new();
    failed.insert(shape_key(&listing_shape()));
    let out = bw_outcomes(&mut ctx, &p.goal, &failed, COBALT).unwrap();
    assert!(out.iter().all(|o| !failed.contains(&o.key())));
    failed.insert(shape_key(&Shape::trivial()));
    assert!(bw_outcomes(&mut ctx, &p.goal, &failed, COBALT).unwrap().is_empty());
}

#[test]
fn two_backward_steps_complete_unsubscribe() {
    let p = load("d1.spec");
    let mut s = solver();
    let mut ctx = Ctx::new(&p, &mut s);
    let out = bw_outcomes(&mut ctx, &p.goal, &BTreeSet::new(), ALONE).unwrap();
    match out.last() {
        Some(BwOutcome::Complete(e)) => {
            assert_eq!(e.calls(), vec!["confirm".to_string(), "unsubscribe".to_string()], "{}", e);
            assert!(typecheck(&p, &p.goal, e, ctx.solver).unwrap().ok);
        }
        other => panic!("{:?}", other),
    }
}
