//! Strongest postconditions, weakest preconditions, heap resolution and frames.
//!
//! Component and query formulas stay symbolic in the heap variables `h`
//! (pre-heap) and `h'` (post-heap). Resolution replaces `sel (h, r)` by the
//! ghost that names `r` in the corresponding snapshot.

use super::heap::{GhostGen, HeapState};
use super::vocab::Vocab;
use super::*;

pub const PRE_HEAP: &str = "h";
pub const POST_HEAP: &str = "h'";

/// A library component after ghost elimination, ready for instantiation.
#[derive(Debug, Clone, PartialEq)]
pub struct CallSpec {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub pre: Prop,
    pub post: Prop,
    pub result_var: String,
    pub result: Sort,
    /// Ghosts with no defining select equation; renamed fresh per call.
    pub ghosts: Vec<(String, Sort)>,
}

/// A component applied to actual arguments with its result bound.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub pre: Prop,
    pub post: Prop,
    pub ghosts: Vec<(String, Sort)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSplit {
    pub frame: Prop,
    pub residual_pre: Prop,
    pub residual_post: Prop,
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c == '\'' { 'p' } else { c }).collect()
}

pub fn instantiate(c: &CallSpec, args: &[Term], result: Term, gen: &GhostGen) -> Instance {
    let mut s = Subst::new();
    for ((p, _), a) in c.params.iter().zip(args) {
        s.insert(p.clone(), a.clone());
    }
    s.insert(c.result_var.clone(), result);
    let mut ghosts = Vec::new();
    for (g, sort) in &c.ghosts {
        let name = gen.fresh(&format!("{}_", sanitize(g)));
        s.insert(g.clone(), Term::Var(name.clone()));
        ghosts.push((name, sort.clone()));
    }
    Instance {
        name: c.name.clone(),
        pre: substitute(&c.pre, &s),
        post: substitute(&c.post, &s),
        ghosts,
    }
}

pub fn visit_terms(p: &Prop, f: &mut dyn FnMut(&Term)) {
    fn vt(t: &Term, f: &mut dyn FnMut(&Term)) {
        f(t);
        match t {
            Term::App(_, args) => args.iter().for_each(|a| vt(a, f)),
            Term::Arith(_, a, b) => {
                vt(a, f);
                vt(b, f);
            }
            Term::Neg(a) => vt(a, f),
            _ => {}
        }
    }
    match p {
        Prop::True | Prop::False => {}
        Prop::App(g, args) => vt(&Term::App(g.clone(), args.clone()), f),
        Prop::Not(q) => visit_terms(q, f),
        Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|q| visit_terms(q, f)),
        Prop::Implies(a, b) | Prop::Iff(a, b) => {
            visit_terms(a, f);
            visit_terms(b, f);
        }
        Prop::Forall(_, _, b) | Prop::Exists(_, _, b) => visit_terms(b, f),
        Prop::Eq(a, b) | Prop::Cmp(_, a, b) => {
            vt(a, f);
            vt(b, f);
        }
    }
}

fn as_select<'t>(t: &'t Term, vocab: &Vocab) -> Option<(&'t str, &'t str, Sort)> {
    if let Term::App(f, args) = t {
        if let (Some(sort), [Term::Var(hv), Term::Var(loc)]) = (vocab.select_sort(f), args.as_slice()) {
            return Some((hv.as_str(), loc.as_str(), sort.clone()));
        }
    }
    None
}

/// Locations read through a select qualifier on heap variable `hv`.
pub fn sel_locs(p: &Prop, hv: &str, vocab: &Vocab) -> Vec<(String, Sort)> {
    let mut out: Vec<(String, Sort)> = Vec::new();
    visit_terms(p, &mut |t| {
        if let Some((h, loc, sort)) = as_select(t, vocab) {
            if h == hv && !out.iter().any(|(l, _)| l == loc) {
                out.push((loc.to_string(), sort));
            }
        }
    });
    out
}

/// True when heap variable `hv` occurs outside a select position.
pub fn heap_vars_in(p: &Prop, hv: &str, vocab: &Vocab) -> bool {
    let mut total = 0usize;
    let mut in_sel = 0usize;
    visit_terms(p, &mut |t| {
        if let Term::Var(x) = t {
            if x == hv {
                total += 1;
            }
        }
        if let Some((h, _, _)) = as_select(t, vocab) {
            if h == hv {
                in_sel += 1;
            }
        }
    });
    total > in_sel
}

/// A heap snapshot: the heap-variable name it replaces, the ghost of each
/// location in that snapshot, and the heap constant.
pub struct View<'a> {
    pub var: &'a str,
    pub ghosts: &'a BTreeMap<String, String>,
    pub heap: Option<&'a str>,
}

pub fn resolve(p: &Prop, vocab: &Vocab, views: &[View<'_>]) -> Prop {
    map_terms(p, &mut |t| {
        if let Some((hv, loc, _)) = as_select(t, vocab) {
            if let Some(v) = views.iter().find(|v| v.var == hv) {
                return Some(match v.ghosts.get(loc) {
                    Some(g) => Term::Var(g.clone()),
                    None => t.clone(),
                });
            }
        }
        if let Term::Var(x) = t {
            if let Some(v) = views.iter().find(|v| v.var == x) {
                if let Some(h) = v.heap {
                    return Some(Term::Var(h.to_string()));
                }
            }
        }
        None
    })
}

fn ensure_reads(hs: &mut HeapState, ps: &[&Prop], vocab: &Vocab) {
    for p in ps {
        for (loc, sort) in sel_locs(p, PRE_HEAP, vocab) {
            hs.ensure(&loc, &sort);
        }
    }
}

/// The instantiated precondition resolved against the current heap.
pub fn inst_pre(inst: &Instance, hs: &HeapState, vocab: &Vocab) -> (Prop, HeapState) {
    let mut hs0 = hs.clone();
    ensure_reads(&mut hs0, &[&inst.pre, &inst.post], vocab);
    let cur = hs0.current.clone();
    let heap = hs0.heap_current.clone();
    let pre = resolve(&inst.pre, vocab, &[View { var: PRE_HEAP, ghosts: &cur, heap: Some(&heap) }]);
    (simplify(&pre), hs0)
}

/// SP(P, c(args)) = P ∧ post, with fresh ghosts for every location the
/// post mentions through `h'`.
pub fn sp_call(p: &Prop, inst: &Instance, hs: &HeapState, vocab: &Vocab) -> (Prop, HeapState) {
    let mut hs0 = hs.clone();
    ensure_reads(&mut hs0, &[&inst.pre, &inst.post], vocab);
    let mut hs1 = hs0.clone();
    for (loc, sort) in sel_locs(&inst.post, POST_HEAP, vocab) {
        hs1.advance(&loc, &sort);
    }
    if heap_vars_in(&inst.post, POST_HEAP, vocab) {
        hs1.advance_heap();
    }
    for (g, s) in &inst.ghosts {
        hs1.record_sort(g, s);
    }
    let q = resolve(
        &inst.post,
        vocab,
        &[
            View { var: PRE_HEAP, ghosts: &hs0.current, heap: Some(&hs0.heap_current) },
            View { var: POST_HEAP, ghosts: &hs1.current, heap: Some(&hs1.heap_current) },
        ],
    );
    (and_all([p.clone(), simplify(&q)]), hs1)
}

fn rename_heap_var(p: &Prop, from: &str, to: &str) -> Prop {
    map_terms(p, &mut |t| match t {
        Term::Var(x) if x == from => Some(Term::Var(to.to_string())),
        _ => None,
    })
}

/// WP(c(args), Q) = pre ∧ ∀v, post-ghosts. (post ⇒ Q), staying symbolic:
/// in the result `h'` names the heap just before the call.
pub fn wp_sym(inst: &Instance, binder: &str, binder_sort: &Sort, q: &Prop, vocab: &Vocab, gen: &GhostGen) -> Prop {
    let modified = sel_locs(&inst.post, POST_HEAP, vocab);
    let heap_mod = heap_vars_in(&inst.post, POST_HEAP, vocab);
    let mut ghosts = BTreeMap::new();
    let mut bound: Vec<(String, Sort)> = vec![(binder.to_string(), binder_sort.clone())];
    for (loc, sort) in &modified {
        let g = gen.fresh(&format!("W{}", sanitize(loc)));
        ghosts.insert(loc.clone(), g.clone());
        bound.push((g, sort.clone()));
    }
    let hb = if heap_mod {
        let h = gen.fresh("HW");
        bound.push((h.clone(), Sort::Heap));
        Some(h)
    } else {
        None
    };
    for (g, s) in &inst.ghosts {
        if free_vars(&inst.post).contains(g) && !free_vars(&inst.pre).contains(g) {
            bound.push((g.clone(), s.clone()));
        }
    }
    let view = [View { var: POST_HEAP, ghosts: &ghosts, heap: hb.as_deref() }];
    let post_b = rename_heap_var(&resolve(&inst.post, vocab, &view), PRE_HEAP, POST_HEAP);
    let q_b = resolve(q, vocab, &view);
    let pre_b = rename_heap_var(&inst.pre, PRE_HEAP, POST_HEAP);
    let mut body = Prop::implies(post_b, q_b);
    for (x, s) in bound.into_iter().rev() {
        body = Prop::Forall(x, s, Box::new(body));
    }
    simplify(&and_all([pre_b, body]))
}

/// Resolve a goal formula: `h` is the initial heap, `h'` the current one.
pub fn resolve_goal(q: &Prop, hs: &HeapState, vocab: &Vocab) -> (Prop, HeapState) {
    let mut hs = hs.clone();
    for (loc, sort) in sel_locs(q, PRE_HEAP, vocab) {
        hs.initial_ghost(&loc, &sort);
    }
    for (loc, sort) in sel_locs(q, POST_HEAP, vocab) {
        hs.ensure(&loc, &sort);
    }
    let r = resolve(
        q,
        vocab,
        &[
            View { var: PRE_HEAP, ghosts: &hs.initial, heap: Some(&hs.heap_initial) },
            View { var: POST_HEAP, ghosts: &hs.current, heap: Some(&hs.heap_current) },
        ],
    );
    (simplify(&r), hs)
}

pub fn wp_call(
    inst: &Instance,
    binder: &str,
    binder_sort: &Sort,
    q: &Prop,
    hs: &HeapState,
    vocab: &Vocab,
) -> (Prop, HeapState) {
    let w = wp_sym(inst, binder, binder_sort, q, vocab, hs.gen());
    resolve_goal(&w, hs, vocab)
}

/// State formula with intermediate ghosts and path binders existentially
/// closed, and the final ghost of each location renamed `F_loc`; two states
/// reached by different paths become comparable.
pub fn canonical_state(facts: &Prop, hs: &HeapState, binders: &[(String, Sort)]) -> (Prop, Vec<(String, Sort)>) {
    let mut conj = vec![facts.clone()];
    let mut finals = Vec::new();
    for (loc, g) in &hs.current {
        let f = format!("F_{}", sanitize(loc));
        let s = hs.ghost_sorts.get(g).cloned().unwrap_or(Sort::Int);
        conj.push(Prop::eq(Term::Var(f.clone()), Term::Var(g.clone())));
        finals.push((f, s));
    }
    conj.push(Prop::eq(Term::var("H_F"), Term::Var(hs.heap_current.clone())));
    finals.push(("H_F".to_string(), Sort::Heap));
    let body = and_all(conj);
    let fv = free_vars(&body);
    let initial: BTreeSet<&String> = hs.initial.values().collect();
    let mut hidden: BTreeMap<String, Sort> = BTreeMap::new();
    for (g, s) in &hs.ghost_sorts {
        if !initial.contains(g) && *g != hs.heap_initial && fv.contains(g) {
            hidden.insert(g.clone(), s.clone());
        }
    }
    for (b, s) in binders {
        if fv.contains(b) {
            hidden.insert(b.clone(), s.clone());
        }
    }
    let mut out = body;
    for (x, s) in hidden.into_iter().rev() {
        out = Prop::Exists(x, s, Box::new(out));
    }
    (out, finals)
}

fn ghost_normal(p: &Prop, hs: &HeapState) -> Prop {
    let mut s = Subst::new();
    for (loc, gs) in &hs.history {
        for g in gs {
            s.insert(g.clone(), Term::Var(format!("{}@", loc)));
        }
    }
    for g in hs.initial.iter() {
        s.insert(g.1.clone(), Term::Var(format!("{}@", g.0)));
    }
    substitute(p, &s)
}

/// Greedy maximal syntactic frame: conjuncts of `q` that also occur in `p`
/// (modulo ghost renaming), mention no existential ghost, and share no
/// qualifier with the residual obligations.
pub fn frame_split(p: &Prop, q: &Prop, hs: &HeapState) -> Option<FrameSplit> {
    let pcs = p.conjuncts();
    let qcs = q.conjuncts();
    let pn: Vec<Prop> = pcs.iter().map(|c| ghost_normal(c, hs)).collect();
    let ev = hs.evars();
    let mut cand: Vec<usize> = (0..qcs.len())
        .filter(|&i| {
            let n = ghost_normal(&qcs[i], hs);
            pn.contains(&n) && free_vars(&qcs[i]).is_disjoint(&ev)
        })
        .collect();
    loop {
        let rn: Vec<Prop> = cand.iter().map(|&i| ghost_normal(&qcs[i], hs)).collect();
        let mut used = vec![false; pcs.len()];
        for r in &rn {
            if let Some(j) = (0..pcs.len()).find(|&j| !used[j] && pn[j] == *r) {
                used[j] = true;
            }
        }
        let res_p: Vec<Prop> = (0..pcs.len()).filter(|&j| !used[j]).map(|j| pcs[j].clone()).collect();
        let res_q: Vec<Prop> = (0..qcs.len()).filter(|i| !cand.contains(i)).map(|i| qcs[i].clone()).collect();
        let mut res_quals = BTreeSet::new();
        res_p.iter().chain(res_q.iter()).for_each(|c| res_quals.extend(qual_set(c)));
        let before = cand.len();
        cand.retain(|&i| qual_set(&qcs[i]).is_disjoint(&res_quals));
        if cand.len() == before {
            if cand.is_empty() {
                return None;
            }
            return Some(FrameSplit {
                frame: and_all(cand.iter().map(|&i| qcs[i].clone())),
                residual_pre: and_all(res_p),
                residual_post: and_all(res_q),
            });
        }
    }
}

fn collect_defs(p: &Prop, ghosts: &[(String, Sort)], vocab: &Vocab, defs: &mut Subst) {
    match p {
        Prop::And(ps) => ps.iter().for_each(|q| collect_defs(q, ghosts, vocab, defs)),
        Prop::Implies(a, _) => collect_defs(a, ghosts, vocab, defs),
        Prop::Eq(l, r) => {
            for (sel, g) in [(l, r), (r, l)] {
                if let (Some(_), Term::Var(x)) = (as_select(sel, vocab), g) {
                    if ghosts.iter().any(|(n, _)| n == x) && !defs.contains_key(x) {
                        defs.insert(x.clone(), sel.clone());
                    }
                }
            }
        }
        _ => {}
    }
}

/// Replace ghosts defined by `sel (h, r) = X` equations (top-level
/// conjuncts or implication antecedents) by the select term itself.
pub fn eliminate_ghosts(p: &Prop, ghosts: &[(String, Sort)], known: &Subst, vocab: &Vocab) -> (Prop, Subst) {
    let mut defs = known.clone();
    collect_defs(p, ghosts, vocab, &mut defs);
    (simplify(&substitute(p, &defs)), defs)
}

/// Branch conditions of a guard component: conjuncts `[v = true] <=> φt`
/// and `[v = false] <=> φf`.
pub fn guard_split(post: &Prop, v: &str) -> Option<(Prop, Prop)> {
    let mut t = None;
    let mut f = None;
    for c in simplify(post).conjuncts() {
        if let Prop::Iff(a, b) = &c {
            for (lhs, rhs) in [(a, b), (b, a)] {
                if let Prop::Eq(Term::Var(x), Term::Bool(val)) | Prop::Eq(Term::Bool(val), Term::Var(x)) = &**lhs {
                    if x == v {
                        if *val {
                            t.get_or_insert((**rhs).clone());
                        } else {
                            f.get_or_insert((**rhs).clone());
                        }
                    }
                }
            }
        }
    }
    Some((t?, f?))
}

#[cfg(test)]
mod tests {
    use super::super::vocab::QualSig;
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    fn table_vocab() -> Vocab {
        let mut voc = Vocab::default();
        let table = Sort::Named("table".into());
        voc.sorts.insert("table".into());
        voc.quals.insert(
            "sel".into(),
            QualSig { args: vec![Sort::Heap, Sort::Ref(None)], result: table.clone(), interpreted: true },
        );
        voc.quals.insert(
            "mem".into(),
            QualSig { args: vec![table.clone(), Sort::Str], result: Sort::Bool, interpreted: false },
        );
        voc.quals.insert("size".into(), QualSig { args: vec![table], result: Sort::Nat, interpreted: false });
        voc
    }

    fn sel(h: &str, r: &str) -> Term {
        Term::app("sel", vec![v(h), v(r)])
    }

    fn size(t: Term) -> Term {
        Term::app("size", vec![t])
    }

    fn add_tbl() -> CallSpec {
        CallSpec {
            name: "add_tbl".into(),
            params: vec![("tbl".into(), Sort::Ref(None)), ("s".into(), Sort::Str)],
            pre: Prop::not(Prop::App("mem".into(), vec![sel("h", "tbl"), v("s")])),
            post: and_all([
                Prop::App("mem".into(), vec![sel("h'", "tbl"), v("s")]),
                Prop::eq(
                    size(sel("h'", "tbl")),
                    Term::Arith(ArithOp::Add, Box::new(size(sel("h", "tbl"))), Box::new(Term::Int(1))),
                ),
            ]),
            result_var: "v".into(),
            result: Sort::Unit,
            ghosts: vec![],
        }
    }

    #[test]
    fn sp_of_add_tbl_advances_the_table_ghost() {
        let voc = table_vocab();
        let gen = GhostGen::new();
        let mut hs = HeapState::new(gen.clone());
        hs.ensure("tbl", &Sort::Named("table".into()));
        let p = Prop::not(Prop::App("mem".into(), vec![v("Tbl0"), v("s")]));
        let inst = instantiate(&add_tbl(), &[v("tbl"), v("s")], v("u1"), &gen);
        let (q, hs1) = sp_call(&p, &inst, &hs, &voc);
        let g = hs1.current["tbl"].clone();
        assert_ne!(g, "Tbl0");
        let expected = and_all([
            p.clone(),
            Prop::App("mem".into(), vec![v(&g), v("s")]),
            Prop::eq(size(v(&g)), Term::Arith(ArithOp::Add, Box::new(size(v("Tbl0"))), Box::new(Term::Int(1)))),
        ]);
        assert_eq!(q, expected);
        assert_eq!(hs1.evars().into_iter().collect::<Vec<_>>(), vec![g]);
    }

    #[test]
    fn wp_keeps_untouched_locations_symbolic() {
        let voc = table_vocab();
        let gen = GhostGen::new();
        let inst = instantiate(&add_tbl(), &[v("tbl"), v("s")], v("u1"), &gen);
        let q = Prop::App("mem".into(), vec![sel("h'", "other"), v("s")]);
        let w = wp_sym(&inst, "u1", &Sort::Unit, &q, &voc, &gen);
        let text = format!("{}", w);
        assert!(text.contains("sel (h', other)"), "{}", text);
        assert!(text.contains("not (mem (sel (h', tbl), s))"), "{}", text);
    }

    #[test]
    fn frame_split_separates_disjoint_qualifiers() {
        let hs = HeapState::new(GhostGen::new());
        let a = Prop::App("ready".into(), vec![v("k")]);
        let p = and_all([a.clone(), Prop::Cmp(CmpOp::Gt, size(v("X")), Term::Int(0))]);
        let q = and_all([a.clone(), Prop::App("minmax".into(), vec![v("X'"), v("v")])]);
        let fs = frame_split(&p, &q, &hs).expect("frame");
        assert_eq!(fs.frame, a);
        assert_eq!(fs.residual_post, Prop::App("minmax".into(), vec![v("X'"), v("v")]));
    }

    #[test]
    fn frame_split_rejects_shared_qualifiers_and_empty_frames() {
        let hs = HeapState::new(GhostGen::new());
        let p = and_all([Prop::App("m".into(), vec![v("a")]), Prop::App("m".into(), vec![v("b")])]);
        let q = and_all([Prop::App("m".into(), vec![v("a")]), Prop::App("m".into(), vec![v("c")])]);
        assert!(frame_split(&p, &q, &hs).is_none());
        assert!(frame_split(&Prop::True, &Prop::True, &hs).is_none());
    }

    #[test]
    fn ghost_definitions_are_substituted() {
        let voc = table_vocab();
        let ghosts = vec![("Tbl".to_string(), Sort::Named("table".into()))];
        let p = and_all([
            Prop::eq(sel("h", "tbl"), v("Tbl")),
            Prop::not(Prop::App("mem".into(), vec![v("Tbl"), v("s")])),
        ]);
        let (q, defs) = eliminate_ghosts(&p, &ghosts, &Subst::new(), &voc);
        assert_eq!(q, Prop::not(Prop::App("mem".into(), vec![sel("h", "tbl"), v("s")])));
        assert!(defs.contains_key("Tbl"));
    }

    #[test]
    fn guard_split_extracts_branch_facts() {
        let m = Prop::App("mem".into(), vec![v("T"), v("s")]);
        let post = and_all([
            Prop::iff(Prop::eq(v("v"), Term::Bool(true)), m.clone()),
            Prop::iff(Prop::eq(v("v"), Term::Bool(false)), Prop::not(m.clone())),
        ]);
        assert_eq!(guard_split(&post, "v"), Some((m.clone(), Prop::not(m))));
        assert_eq!(guard_split(&Prop::True, "v"), None);
    }
}
