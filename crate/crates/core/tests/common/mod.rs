//! Helpers shared by the integration tests: seeded micro-libraries over
//! two integer counters, a brute-force enumerate-and-verify oracle, and
//! single-call instances for the SP/WP comparison.

#![allow(dead_code)]

use cobalt::corelang::{parse_program, Expr};
use cobalt::problem::Problem;
use cobalt::run::load_problem;
use cobalt::logic::{instantiate, subst1, wp_call, GhostGen, Term};
use cobalt::smt::{Solver, SolverConfig, Validity};
use cobalt::verify::{typecheck, SymState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub fn bench_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks")
}

pub fn read_bench(name: &str) -> String {
    std::fs::read_to_string(bench_dir().join(name)).unwrap()
}

pub fn solver() -> Solver {
    Solver::new(SolverConfig::default()).expect("solver available")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One component over the counters `c` and `d`.
#[derive(Debug, Clone)]
pub struct Comp {
    pub name: String,
    /// Takes one int argument.
    pub takes_arg: bool,
    pub result_int: bool,
    pub text: String,
}

fn other(x: &str) -> &'static str {
    if x == "c" {
        "d"
    } else {
        "c"
    }
}

fn ghost(x: &str) -> &'static str {
    if x == "c" {
        "C"
    } else {
        "D"
    }
}

fn unit_comp(name: String, params: &str, pre: &str, post: &str) -> Comp {
    let text = format!(
        "{} : {}State {{\\(h : heap). {}}}\n  v : unit\n  {{\\(h : heap), (v : unit), (h' : heap). \\ (C : int), (D : int), (C' : int), (D' : int).\n    isel (h, c) = C /\\ isel (h, d) = D /\\ {}}};\n",
        name, params, pre, post
    );
    Comp { name, takes_arg: !params.is_empty(), result_int: false, text }
}

fn pre_on(x: &str, body: &str) -> String {
    format!("\\ ({} : int). isel (h, {}) = {} /\\ {}", ghost(x), x, ghost(x), body)
}

/// A random component; `guards` allows boolean tests on a counter.
pub fn random_comp(r: &mut impl Rng, guards: bool) -> Comp {
    let x = if r.gen_bool(0.5) { "c" } else { "d" };
    let (g, g2) = (ghost(x), format!("{}'", ghost(x)));
    let y = other(x);
    let k: i64 = r.gen_range(1..=2);
    let kinds = if guards { 8 } else { 7 };
    match r.gen_range(0..kinds) {
        0 => unit_comp(format!("inc{}_{}", k, x), "", "true", &format!("isel (h', {}) = {} /\\ {} == {} + {}", x, g2, g2, g, k)),
        1 => unit_comp(
            format!("dec{}_{}", k, x),
            "",
            &pre_on(x, &format!("{} >= {}", g, k)),
            &format!("isel (h', {}) = {} /\\ {} == {} - {}", x, g2, g2, g, k),
        ),
        2 => {
            let k = r.gen_range(0..=2);
            unit_comp(format!("set{}_{}", k, x), "", "true", &format!("isel (h', {}) = {} /\\ {} == {}", x, g2, g2, k))
        }
        3 => {
            let (h, h2) = (ghost(y), format!("{}'", ghost(y)));
            unit_comp(
                format!("move_{}{}", x, y),
                "",
                &pre_on(x, &format!("{} >= 1", g)),
                &format!("isel (h', {}) = {} /\\ isel (h', {}) = {} /\\ {} == {} - 1 /\\ {} == {} + 1", x, g2, y, h2, g2, g, h2, h),
            )
        }
        4 => {
            let name = format!("get_{}", x);
            let text = format!(
                "{} : State {{\\(h : heap). true}}\n  v : int\n  {{\\(h : heap), (v : int), (h' : heap). \\ ({} : int). isel (h, {}) = {} /\\ v == {}}};\n",
                name, g, x, g, g
            );
            Comp { name, takes_arg: false, result_int: true, text }
        }
        5 => unit_comp(
            format!("add_{}", x),
            "(m : {v : int | true}) -> ",
            "m >= 0",
            &format!("isel (h', {}) = {} /\\ {} == {} + m", x, g2, g2, g),
        ),
        6 => unit_comp(
            format!("copy_{}{}", y, x),
            "",
            "true",
            &format!("isel (h', {}) = {} /\\ {} == {}", x, g2, g2, ghost(y)),
        ),
        _ => {
            let name = format!("pos_{}", x);
            let text = format!(
                "{} : State {{\\(h : heap). true}}\n  v : bool\n  {{\\(h : heap), (v : bool), (h' : heap). \\ ({} : int). isel (h, {}) = {} /\\\n    ([v = true] <=> {} >= 1) /\\ ([v = false] <=> {} <= 0)}};\n",
                name, g, x, g, g, g
            );
            Comp { name, takes_arg: false, result_int: false, text }
        }
    }
}

/// A seeded micro-library with its query.
#[derive(Debug, Clone)]
pub struct Micro {
    pub seed: u64,
    pub comps: Vec<Comp>,
    pub result_int: bool,
    pub text: String,
}

const HEADER: &str = "global c : ref int;\nglobal d : ref int;\n\nqualifier isel : (heap, ref) -> int;\n\n";

fn pre_atom(r: &mut impl Rng) -> String {
    let x = if r.gen_bool(0.5) { "C" } else { "D" };
    match r.gen_range(0..4) {
        0 => format!("{} == {}", x, r.gen_range(0..=2)),
        1 => format!("{} >= {}", x, r.gen_range(0..=2)),
        2 => format!("{} == n", x),
        _ => "true".into(),
    }
}

fn post_atom(r: &mut impl Rng, result_int: bool) -> String {
    let x = if r.gen_bool(0.5) { "C" } else { "D" };
    let k = r.gen_range(0..=3);
    match r.gen_range(0..if result_int { 6 } else { 5 }) {
        0 => format!("{}' == {} + {}", x, x, k),
        1 => format!("{}' == {}", x, k),
        2 => format!("{}' >= {}", x, k),
        3 => format!("C' + D' == C + D + {}", k),
        4 => format!("{}' == {}", x, other(&x.to_lowercase()).to_uppercase()),
        _ => format!("v == {}'", x),
    }
}

fn dedup(comps: Vec<Comp>) -> Vec<Comp> {
    let mut seen = std::collections::BTreeSet::new();
    comps.into_iter().filter(|c| seen.insert(c.name.clone())).collect()
}

pub fn micro(seed: u64, guards: bool) -> Micro {
    let mut r = rng(seed);
    let n = r.gen_range(2..=4);
    let mut comps = Vec::new();
    while comps.len() < n {
        comps.push(random_comp(&mut r, guards));
        comps = dedup(comps);
    }
    let result_int = comps.iter().any(|c| c.result_int) && r.gen_bool(0.5);
    let pre = (0..r.gen_range(1..=2)).map(|_| pre_atom(&mut r)).collect::<Vec<_>>().join(" /\\ ");
    let post = (0..r.gen_range(1..=2)).map(|_| post_atom(&mut r, result_int)).collect::<Vec<_>>().join(" /\\ ");
    let res = if result_int { "int" } else { "unit" };
    let mut text = String::from(HEADER);
    for c in &comps {
        text.push_str(&c.text);
        text.push('\n');
    }
    text.push_str(&format!(
        "query goal : (n : {{v : int | v >= 0}}) ->\n  State {{\\(h : heap). \\ (C : int), (D : int). isel (h, c) = C /\\ isel (h, d) = D /\\ {}}}\n  v : {{v : {} | true}}\n  {{\\(h : heap), (v : {}), (h' : heap). \\ (C : int), (D : int), (C' : int), (D' : int).\n    isel (h, c) = C /\\ isel (h, d) = D /\\ isel (h', c) = C' /\\ isel (h', d) = D' /\\ {}}};\n",
        pre, res, res, post
    ));
    Micro { seed, comps, result_int, text }
}

impl Micro {
    pub fn problem(&self) -> Problem {
        load_problem(&self.text).unwrap_or_else(|e| panic!("seed {}: {}\n{}", self.seed, e, self.text))
    }
}

/// Every straight-line program with at most `k` calls, each ending in
/// every well-sorted return.
pub fn enumerate(m: &Micro, k: usize) -> Vec<Expr> {
    fn go(m: &Micro, k: usize, prefix: &mut Vec<String>, ints: &mut Vec<String>, out: &mut Vec<String>) {
        let rets: Vec<String> = if m.result_int { ints.clone() } else { vec!["()".into()] };
        for r in rets {
            let mut lines = prefix.clone();
            lines.push(format!("return {}", r));
            out.push(lines.join(";\n"));
        }
        if prefix.len() == k {
            return;
        }
        for c in &m.comps {
            let args: Vec<String> = if c.takes_arg { ints.clone() } else { vec![String::new()] };
            for a in args {
                let b = format!("z{}", prefix.len() + 1);
                prefix.push(format!("{} ← {} ({})", b, c.name, a));
                if c.result_int {
                    ints.push(b.clone());
                }
                go(m, k, prefix, ints, out);
                if c.result_int {
                    ints.pop();
                }
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(m, k, &mut Vec::new(), &mut vec!["n".into()], &mut out);
    out.iter().map(|t| parse_program(t).unwrap_or_else(|e| panic!("{}: {}", t, e))).collect()
}

/// The first enumerated program that verifies, if any.
pub fn oracle(m: &Micro, k: usize, solver: &mut Solver) -> Option<Expr> {
    let p = m.problem();
    enumerate(m, k).into_iter().find(|e| typecheck(&p, &p.goal, e, solver).map(|r| r.ok).unwrap_or(false))
}

/// A single-call instance: one component, a precondition P and a goal Q.
pub fn duality_instance(seed: u64) -> Micro {
    let mut r = rng(seed);
    let comp = random_comp(&mut r, false);
    let result_int = comp.result_int;
    let pre = pre_atom(&mut r);
    let post = post_atom(&mut r, result_int);
    let res = if result_int { "int" } else { "unit" };
    let text = format!(
        "{}{}\nquery goal : (n : {{v : int | v >= 0}}) ->\n  State {{\\(h : heap). \\ (C : int), (D : int). isel (h, c) = C /\\ isel (h, d) = D /\\ {}}}\n  v : {{v : {} | true}}\n  {{\\(h : heap), (v : {}), (h' : heap). \\ (C : int), (D : int), (C' : int), (D' : int).\n    isel (h, c) = C /\\ isel (h, d) = D /\\ isel (h', c) = C' /\\ isel (h', d) = D' /\\ {}}};\n",
        HEADER, comp.text, pre, res, res, post
    );
    Micro { seed, comps: vec![comp], result_int, text }
}

/// `P ⇒ WP(c, Q)` and `SP(P, c) ⇒ Q` for the lone call of a duality
/// instance, or `None` when the solver answered unknown on either side.
pub fn duality(m: &Micro, solver: &mut Solver) -> Option<(bool, bool)> {
    let p = m.problem();
    let comp = &p.library[0];
    let args: Vec<Term> = if m.comps[0].takes_arg { vec![Term::var("n")] } else { vec![] };
    let st = SymState::initial(&p, &p.goal, GhostGen::new());
    let inst = instantiate(comp, &args, Term::var("y"), st.hs.gen());
    let result = if m.result_int { Term::var("y") } else { Term::Unit };
    let q = subst1(&p.goal.post, &p.goal.result_var, result);
    let (w, hs) = wp_call(&inst, "y", &comp.result, &q, &st.hs, &p.vocab);
    let mut at_wp = st.clone();
    at_wp.hs = hs;
    let wp = match at_wp.entails(&p, solver, &w).expect("solver runs") {
        Validity::Valid => true,
        Validity::Invalid(_) => false,
        Validity::Unknown(_) => return None,
    };
    let arg = if m.comps[0].takes_arg { "n" } else { "" };
    let ret = if m.result_int { "y" } else { "()" };
    let e = parse_program(&format!("y ← {} ({});\nreturn {}", comp.name, arg, ret)).unwrap();
    let report = typecheck(&p, &p.goal, &e, solver).expect("well-typed call");
    if report.trace.iter().any(|t| matches!(t.result, Validity::Unknown(_))) {
        return None;
    }
    Some((wp, report.ok))
}

/// Expected program of a benchmark sidecar.
pub fn golden(name: &str) -> Expr {
    cobalt::run::Expect::parse(&read_bench(&format!("{}.expect", name))).unwrap().golden.expect("golden program")
}

/// The pinned solver scripts: three hand-built queries and the first
/// scripts issued while verifying the goal2 and d1 goldens.
pub fn snapshot_scripts() -> Vec<(String, String)> {
    use cobalt::smt::encode;
    use cobalt::speclang::{parse_prop, parse_spec_file};
    use std::collections::BTreeMap;
    let p = |s: &str| parse_prop(s).unwrap();
    let mut out = Vec::new();
    let none = BTreeMap::new();
    let plain = cobalt::logic::Vocab::default();
    out.push(("true".to_string(), encode(&plain, &none, &[], &cobalt::logic::Prop::True).unwrap()));
    out.push((
        "arith".to_string(),
        encode(&plain, &none, &[p("x >= 10"), p("x = 10"), p("i' = 10")], &p("x >= 5 /\\ i' <= 20")).unwrap(),
    ));
    let vocab = parse_spec_file(&read_bench("goal2.spec")).unwrap().vocab();
    out.push((
        "goal2_branch".to_string(),
        encode(
            &vocab,
            &none,
            &[p("not (mem (T0, s))"), p("mem (T1, s) /\\ size (T1) == size (T0) + 1")],
            &p("mem (T1, s) /\\ size (T1) = size (T0) + 1"),
        )
        .unwrap(),
    ));
    for (bench, take) in [("goal2", 4), ("d1", 3)] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SolverConfig { emit_dir: Some(dir.path().to_path_buf()), ..SolverConfig::default() };
        let problem = load_problem(&read_bench(&format!("{}.spec", bench))).unwrap();
        let mut s = Solver::new(cfg).unwrap();
        assert!(typecheck(&problem, &problem.goal, &golden(bench), &mut s).unwrap().ok);
        for i in 1..=take {
            let text = std::fs::read_to_string(dir.path().join(format!("q{}.smt2", i))).unwrap();
            out.push((format!("{}_q{}", bench, i), text));
        }
    }
    out
}

pub fn snapshot_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("snapshots")
}

/// Names of scripts that differ from their pinned copy. With
/// `COBALT_BLESS=1` the pinned copies are rewritten instead.
pub fn snapshot_mismatches() -> Vec<String> {
    let dir = snapshot_dir();
    let bless = std::env::var("COBALT_BLESS").is_ok_and(|v| v == "1");
    let mut bad = Vec::new();
    for (name, text) in snapshot_scripts() {
        let path = dir.join(format!("{}.smt2", name));
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &text).unwrap();
        } else if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
            bad.push(name);
        }
    }
    bad
}
