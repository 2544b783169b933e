use super::wf::ViolationKind;
use super::*;
use crate::logic::Term;

const GOAL2: &str = include_str!("../../benchmarks/goal2.spec");
const D1: &str = include_str!("../../benchmarks/d1.spec");

#[test]
fn add_tbl_pre_has_negated_membership() {
    let f = parse_spec_file(GOAL2).unwrap();
    let add = f.component("add_tbl").unwrap();
    let expected = Prop::not(Prop::App("mem".into(), vec![Term::var("Tbl"), Term::var("s")]));
    assert!(add.pre.conjuncts().contains(&expected), "{}", add.pre);
    assert_eq!(add.params.len(), 2);
    assert_eq!(add.result.sort, Sort::Unit);
}

#[test]
fn empty_input_has_no_query() {
    assert_eq!(parse_spec_file(""), Err(SpecError::MissingQuery));
    assert_eq!(parse_spec_file("(* only a comment *)"), Err(SpecError::MissingQuery));
}

#[test]
fn d1_query_shape() {
    let f = parse_spec_file(D1).unwrap();
    let q = f.query();
    let params: Vec<(&str, &Sort)> = q.params.iter().map(|(x, t)| (x.as_str(), &t.sort)).collect();
    assert_eq!(params, vec![("n", &Sort::Named("nl".into())), ("u", &Sort::Named("user".into()))]);
    assert_eq!(q.result.sort, Sort::Unit);
    let target = Prop::eq(
        Term::app("subscribed", vec![Term::var("D'"), Term::var("n"), Term::var("u")]),
        Term::Bool(false),
    );
    let Prop::Implies(_, rhs) = &q.post else { panic!("post is an implication: {}", q.post) };
    assert!(rhs.conjuncts().contains(&target));
}

#[test]
fn table_library_is_well_formed() {
    let f = parse_spec_unchecked(GOAL2).unwrap();
    assert_eq!(check_well_formed(&f), vec![]);
    let sel = f.qualifiers.iter().find(|q| q.name == "sel").unwrap();
    assert!(sel.interpreted);
    assert!(!f.qualifiers.iter().find(|q| q.name == "mem").unwrap().interpreted);
}

#[test]
fn wrong_arity_is_reported() {
    let bad = GOAL2.replacen("not (mem (Tbl, s))", "not (mem (Tbl, s, s))", 1);
    let f = parse_spec_unchecked(&bad).unwrap();
    let report = check_well_formed(&f);
    assert_eq!(report.len(), 1);
    assert_eq!(report[0].kind, ViolationKind::ArityMismatch { expected: 2, found: 3 });
    assert_eq!(report[0].symbol, "mem");
    assert!(matches!(parse_spec_file(&bad), Err(SpecError::ArityMismatch { .. })));
}

#[test]
fn ghost_outside_its_prefix_is_undeclared() {
    // Drop the Tbl' binder from clear_tbl's post quantifier prefix.
    let bad = GOAL2.replacen(
        "\\ (Tbl' : table).\n    sel (h', tbl) = Tbl' /\\ size (Tbl') = 0",
        "sel (h', tbl) = Tbl' /\\ size (Tbl') = 0",
        1,
    );
    assert_ne!(bad, GOAL2);
    let report = check_well_formed(&parse_spec_unchecked(&bad).unwrap());
    assert!(report.iter().any(|v| v.kind == ViolationKind::UndeclaredSymbol && v.symbol == "Tbl'"), "{:?}", report);
}

#[test]
fn unknown_qualifier_and_sort() {
    let bad = GOAL2.replacen("minmax (Tbl, v)", "spread (Tbl, v)", 1).replacen("sort table;", "", 1);
    let report = check_well_formed(&parse_spec_unchecked(&bad).unwrap());
    let syms: Vec<&str> = report.iter().map(|v| v.symbol.as_str()).collect();
    assert!(syms.contains(&"spread"));
    assert!(syms.contains(&"table"));
}

#[test]
fn duplicate_component_and_second_query() {
    let start = GOAL2.find("add_tbl :").unwrap();
    let end = start + GOAL2[start..].find("};").unwrap() + 2;
    let dup = format!("{}\n{}", GOAL2, &GOAL2[start..end]);
    let report = check_well_formed(&parse_spec_unchecked(&dup).unwrap());
    assert!(report.iter().any(|v| v.kind == ViolationKind::Duplicate && v.symbol == "add_tbl"));
    let two = format!("{}\n{}", GOAL2, &GOAL2[GOAL2.find("query").unwrap()..]);
    assert!(matches!(parse_spec_unchecked(&two), Err(SpecError::Invalid { .. })));
}

#[test]
fn malformed_interpreted_qualifier() {
    let bad = GOAL2.replacen("qualifier sel : (heap, ref) -> table;", "qualifier sel : (heap) -> table;", 1);
    let report = check_well_formed(&parse_spec_unchecked(&bad).unwrap());
    assert!(report.iter().any(|v| v.symbol == "sel" && v.kind == ViolationKind::ArityMismatch { expected: 2, found: 1 }));
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse_spec_file("sort table;\nqualifier mem : (table string) -> bool;").unwrap_err();
    match err {
        SpecError::Syntax { span, .. } => assert_eq!((span.line, span.col), (2, 24)),
        other => panic!("{:?}", other),
    }
}

#[test]
fn benchmark_files_round_trip() {
    for text in [GOAL2, D1] {
        let f = parse_spec_file(text).unwrap();
        let printed = pretty(&f);
        let again = parse_spec_file(&printed).unwrap();
        assert_eq!(again, f);
        assert_eq!(pretty(&again), printed);
    }
}

#[test]
fn parsing_is_deterministic() {
    assert_eq!(parse_spec_file(GOAL2).unwrap(), parse_spec_file(GOAL2).unwrap());
}

#[test]
fn props_and_terms() {
    let p = parse_prop("not (0 > qsize (Q)) /\\ [v = true] <=> (a (x) \\/ x + 1 <= y * 2)").unwrap();
    assert_eq!(format!("{}", p), "(not ([0 > qsize (Q)]) /\\ [v = true]) <=> (a (x) \\/ [x + 1 <= y * 2])");
    assert_eq!(parse_prop(&format!("{}", p)).unwrap(), p);
    assert_eq!(parse_term("f ()").unwrap(), Term::App("f".into(), vec![]));
    assert_eq!(parse_term("()").unwrap(), Term::Unit);
    assert_eq!(parse_sort("ref [int]").unwrap(), Sort::Ref(Some(Box::new(Sort::Named("list_int".into())))));
    assert!(parse_prop("x").is_err());
    assert_eq!(parse_prop("True").unwrap(), Prop::True);
    assert_eq!(
        parse_prop("forall (z : string). mem (T, z) => mem (T', z)").unwrap(),
        Prop::Forall(
            "z".into(),
            Sort::Str,
            Box::new(Prop::implies(
                Prop::App("mem".into(), vec![Term::var("T"), Term::var("z")]),
                Prop::App("mem".into(), vec![Term::var("T'"), Term::var("z")])
            ))
        )
    );
}
