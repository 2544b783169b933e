mod common;

use cobalt::corelang::{expr_size, matches_hypothesis, parse_program, path_to_expr, pretty_print, Expr, Path, SortEnv, Step};
use cobalt::logic::{free_vars, substitute, ArithOp, CmpOp, GhostGen, Prop, Sort, Subst, Term};
use cobalt::speclang::{parse_prop, parse_spec_file, pretty};
use proptest::prelude::*;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

fn term() -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b", "c", "x", "y"]).prop_map(Term::var),
        (0i64..100).prop_map(Term::Int),
    ];
    leaf.prop_recursive(3, 12, 2, |t| {
        prop_oneof![
            (prop::sample::select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul]), t.clone(), t.clone())
                .prop_map(|(op, l, r)| Term::Arith(op, Box::new(l), Box::new(r))),
            t.prop_map(|a| Term::app("f", vec![a])),
        ]
    })
    .boxed()
}

fn not_and(p: &Prop) -> bool {
    !matches!(p, Prop::And(_))
}

fn not_or(p: &Prop) -> bool {
    !matches!(p, Prop::Or(_))
}

/// Well-sorted props over int variables, an int function `f` and a
/// predicate `p`. Nested same-operator conjunctions and disjunctions are
/// left out since the parser flattens them.
fn prop_strategy() -> impl Strategy<Value = Prop> {
    let cmp = prop::sample::select(vec![CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Ne]);
    let leaf = prop_oneof![
        Just(Prop::True),
        Just(Prop::False),
        (cmp, term(), term()).prop_map(|(op, l, r)| Prop::Cmp(op, l, r)),
        (term(), term()).prop_map(|(l, r)| Prop::Eq(l, r)),
        term().prop_map(|t| Prop::App("p".into(), vec![t])),
    ];
    leaf.prop_recursive(3, 16, 3, |q| {
        prop_oneof![
            q.clone().prop_map(Prop::not),
            prop::collection::vec(q.clone().prop_filter("flat", not_and), 2..4).prop_map(Prop::And),
            prop::collection::vec(q.clone().prop_filter("flat", not_or), 2..4).prop_map(Prop::Or),
            (q.clone(), q.clone()).prop_map(|(a, b)| Prop::implies(a, b)),
            (q.clone(), q.clone()).prop_map(|(a, b)| Prop::iff(a, b)),
            (prop::sample::select(vec!["z", "x"]), q.clone()).prop_map(|(z, b)| Prop::Forall(z.into(), Sort::Int, Box::new(b))),
            (prop::sample::select(vec!["w", "y"]), q).prop_map(|(z, b)| Prop::Exists(z.into(), Sort::Int, Box::new(b))),
        ]
    })
}

fn fv_term(t: &Term) -> BTreeSet<String> {
    free_vars(&Prop::Eq(t.clone(), Term::Int(0)))
}

/// A substitution from `{a, b}` into terms over `{c, x, y}`.
fn subst_strategy() -> impl Strategy<Value = Subst> {
    let range = term().prop_filter("range avoids domain", |t| {
        let fv = fv_term(t);
        !fv.contains("a") && !fv.contains("b")
    });
    (range.clone(), range).prop_map(|(ta, tb)| {
        let mut s = Subst::new();
        s.insert("a".into(), ta);
        s.insert("b".into(), tb);
        s
    })
}

const COMPS: [(&str, Sort); 4] = [("get", Sort::Int), ("flag", Sort::Bool), ("tick", Sort::Unit), ("put", Sort::Unit)];

fn step() -> impl Strategy<Value = Step> {
    (0..COMPS.len(), prop::collection::vec(prop::sample::select(vec!["n", "m"]), 0..3), prop::sample::select(vec!["_", "z1", "z2"]))
        .prop_map(|(i, args, b)| Step { component: COMPS[i].0.into(), args: args.into_iter().map(Expr::var).collect(), binder: b.into() })
}

fn path() -> impl Strategy<Value = Path> {
    prop::collection::vec(step(), 0..5).prop_map(|steps| Path { steps })
}

fn env() -> SortEnv {
    let mut env = SortEnv::default();
    for (c, s) in COMPS {
        env.comps.insert(c.into(), s);
    }
    env.vars.push(("n".into(), Sort::Int));
    env.vars.push(("m".into(), Sort::Int));
    env
}

/// Hole-free programs: call sequences ending in a return, possibly
/// branching on a variable.
fn program() -> impl Strategy<Value = Expr> {
    let ret = prop::sample::select(vec!["n", "m", "z1"]).prop_map(|x| Expr::ret(Expr::var(x)));
    ret.prop_recursive(4, 24, 2, |rest| {
        prop_oneof![
            (step(), rest.clone()).prop_map(|(s, r)| Expr::seq(&s.binder, Expr::Call(s.component, s.args), r)),
            (prop::sample::select(vec!["b1", "n"]), rest.clone(), rest).prop_map(|(c, t, e)| Expr::ite(Expr::var(c), t, e)),
        ]
    })
}

/// `t` with the calls at the chosen positions of its top-level call chain
/// replaced by holes of the call's sort.
fn punch(t: &Expr, mask: &[bool], next: &mut usize) -> Expr {
    match t {
        Expr::Seq(x, a, rest) => {
            let i = *next;
            *next += 1;
            let first = match &**a {
                Expr::Call(f, _) if mask.get(i).copied().unwrap_or(false) => {
                    Expr::hole(i, COMPS.iter().find(|(c, _)| c == f).map(|(_, s)| s.clone()).unwrap())
                }
                other => other.clone(),
            };
            Expr::seq(x, first, punch(rest, mask, next))
        }
        Expr::If(c, a, b) => Expr::ite((**c).clone(), punch(a, mask, next), punch(b, mask, next)),
        other => other.clone(),
    }
}

proptest! {
    #[test]
    fn prop_print_parse_round_trip(p in prop_strategy()) {
        let text = p.to_string();
        let back = parse_prop(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert_eq!(&back, &p, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn substitution_is_idempotent(p in prop_strategy(), s in subst_strategy()) {
        let once = substitute(&p, &s);
        prop_assert_eq!(substitute(&once, &s), once);
    }

    #[test]
    fn substitution_free_variables(p in prop_strategy(), s in subst_strategy()) {
        let mut allowed: BTreeSet<String> = free_vars(&p).into_iter().filter(|x| !s.contains_key(x)).collect();
        for t in s.values() {
            allowed.extend(fv_term(t));
        }
        prop_assert!(free_vars(&substitute(&p, &s)).is_subset(&allowed));
    }

    #[test]
    fn path_to_expr_is_injective(a in path(), b in path()) {
        if a != b {
            prop_assert_ne!(path_to_expr(&a), path_to_expr(&b));
        }
    }

    #[test]
    fn hypothesis_matching_is_reflexive(t in program()) {
        prop_assert!(matches_hypothesis(&t, &t, &env()), "{}", t);
    }

    #[test]
    fn punched_programs_match_and_are_no_larger(t in program(), mask in prop::collection::vec(any::<bool>(), 8)) {
        let h = punch(&t, &mask, &mut 0);
        prop_assert!(matches_hypothesis(&t, &h, &env()), "{}\n{}", t, h);
        prop_assert!(expr_size(&t) >= expr_size(&h));
    }

    #[test]
    fn matching_never_grows(t in program(), h in program()) {
        if matches_hypothesis(&t, &h, &env()) {
            prop_assert!(expr_size(&t) >= expr_size(&h));
        }
    }

    #[test]
    fn program_print_parse_round_trip(t in program()) {
        let text = pretty_print(&t);
        let back = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{}: {}", text, e)))?;
        prop_assert_eq!(&back, &t, "{}", text);
    }

    #[test]
    fn generated_libraries_round_trip(seed in 0u64..10_000, guards in any::<bool>()) {
        let m = common::micro(seed, guards);
        let once = pretty(&parse_spec_file(&m.text).unwrap());
        let again = pretty(&parse_spec_file(&once).unwrap());
        prop_assert_eq!(once, again);
    }
}

#[test]
fn ghost_names_stay_fresh_across_clones() {
    let g = GhostGen::new();
    let h = g.clone();
    let mut seen = BTreeSet::new();
    for i in 0..1000 {
        let name = if i % 2 == 0 { g.fresh("G") } else { h.fresh("G") };
        assert!(seen.insert(name));
    }
}

#[test]
fn encoded_props_are_accepted_by_the_solver() {
    let solver = RefCell::new(common::solver());
    let vocab = parse_spec_file("qualifier f : (int) -> int;\nqualifier p : (int) -> bool;\nquery q : State {\\(h : heap). true} v : unit {\\(h : heap), (v : unit), (h' : heap). true};")
        .unwrap()
        .vocab();
    let consts: BTreeMap<String, Sort> = ["a", "b", "c", "x", "y"].iter().map(|x| (x.to_string(), Sort::Int)).collect();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig { cases: 500, ..ProptestConfig::default() });
    runner
        .run(&(prop_strategy(), prop_strategy()), |(fact, goal)| {
            let r = solver.borrow_mut().check(&vocab, &consts, &[fact], &goal);
            prop_assert!(r.is_ok(), "{:?}", r);
            Ok(())
        })
        .unwrap();
}
