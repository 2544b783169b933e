use crate::logic::{
    and_all, free_vars, inst_pre, instantiate, resolve_goal, sp_call, subst1, GhostGen, HeapState, Prop, Sort,
    Term, PRE_HEAP,
};
use crate::problem::{Goal, Problem};
use crate::smt::{SmtError, Solver, Validity};
use std::collections::BTreeMap;

/// Symbolic program state: path facts over ghost constants, the heap
/// timeline and the logical value of every program variable in scope.
#[derive(Debug, Clone)]
pub struct SymState {
    pub facts: Vec<Prop>,
    pub hs: HeapState,
    pub consts: BTreeMap<String, Sort>,
    /// Program variable to logical term, innermost binding last.
    pub vars: Vec<(String, Term, Sort)>,
}

impl SymState {
    /// State at the start of `goal`, with its precondition assumed.
    pub fn initial(problem: &Problem, goal: &Goal, gen: GhostGen) -> SymState {
        let mut st = SymState { facts: Vec::new(), hs: HeapState::new(gen), consts: BTreeMap::new(), vars: Vec::new() };
        for (x, s) in problem.globals.iter().chain(goal.params.iter()) {
            st.consts.insert(x.clone(), s.clone());
            st.vars.push((x.clone(), Term::var(x), s.clone()));
        }
        for (loc, sort) in crate::logic::sel_locs(&goal.pre, PRE_HEAP, &problem.vocab) {
            st.hs.ensure(&loc, &sort);
        }
        let (pre, hs) = resolve_goal(&goal.pre, &st.hs, &problem.vocab);
        st.hs = hs;
        if !pre.is_true() {
            st.facts.push(pre);
        }
        st
    }

    pub fn lookup(&self, x: &str) -> Option<(&Term, &Sort)> {
        self.vars.iter().rev().find(|(y, _, _)| y == x).map(|(_, t, s)| (t, s))
    }

    /// A logical constant name for program binder `x`, fresh in this state.
    pub fn fresh_const(&self, x: &str) -> String {
        let stem = if x == "_" || x.is_empty() { "u" } else { x };
        if !self.consts.contains_key(stem) && !self.hs.symbols().contains_key(stem) {
            return stem.to_string();
        }
        self.hs.gen().fresh(&format!("{}_", stem))
    }

    pub fn bind(&mut self, x: &str, t: Term, s: Sort) {
        if x != "_" {
            self.vars.push((x.to_string(), t, s));
        }
    }

    pub fn assume(&mut self, p: Prop) {
        if !p.is_true() {
            self.facts.push(p);
        }
    }

    /// Every symbol a query over this state may mention, with its sort.
    pub fn symbols(&self) -> BTreeMap<String, Sort> {
        let mut m = self.consts.clone();
        for (k, v) in self.hs.symbols() {
            m.entry(k.clone()).or_insert_with(|| v.clone());
        }
        m
    }

    pub fn entails(&self, problem: &Problem, solver: &mut Solver, goal: &Prop) -> Result<Validity, SmtError> {
        solver.check(&problem.vocab, &self.symbols(), &self.facts, goal)
    }

    pub fn fact(&self) -> Prop {
        and_all(self.facts.iter().cloned())
    }

    /// Precondition of `comp(args)` against this state, the state after the
    /// call and the constant naming its result. `hint` names that constant.
    pub fn call(&self, problem: &Problem, comp: &str, args: &[Term], hint: &str) -> Option<(Prop, SymState, Term)> {
        let c = problem.component(comp)?;
        if c.params.len() != args.len() {
            return None;
        }
        let r = self.fresh_const(hint);
        let inst = instantiate(c, args, Term::var(&r), self.hs.gen());
        let (pre, hs_pre) = inst_pre(&inst, &self.hs, &problem.vocab);
        let (post, hs1) = sp_call(&Prop::True, &inst, &hs_pre, &problem.vocab);
        let mut next = self.clone();
        next.hs = hs1;
        next.consts.insert(r.clone(), c.result.clone());
        for (g, s) in &inst.ghosts {
            next.consts.insert(g.clone(), s.clone());
        }
        next.assume(post);
        Some((pre, next, Term::var(&r)))
    }

    /// The goal's postcondition for result `result`, resolved against this state.
    /// Program variables the post mentions (hypothesis binders) read their
    /// current values.
    pub fn post_goal(&self, problem: &Problem, goal: &Goal, result: &Term) -> Prop {
        let mut q = subst1(&goal.post, &goal.result_var, result.clone());
        let fv = free_vars(&q);
        let mut s = crate::logic::Subst::new();
        for (x, t, _) in &self.vars {
            if fv.contains(x) && x != &goal.result_var {
                s.insert(x.clone(), t.clone());
            }
        }
        if !s.is_empty() {
            q = crate::logic::substitute(&q, &s);
        }
        let (q, _) = resolve_goal(&q, &self.hs, &problem.vocab);
        q
    }

    /// Program-variable terms of sort compatible with `s`, most recent first.
    pub fn vars_of_sort(&self, s: &Sort) -> Vec<(String, Term)> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for (x, t, vs) in self.vars.iter().rev() {
            if seen.insert(x.clone()) && sort_fits(vs, s) {
                out.push((x.clone(), t.clone()));
            }
        }
        out
    }
}

/// Sort compatibility with `a` as a wildcard type parameter.
pub fn sort_fits(actual: &Sort, expected: &Sort) -> bool {
    fn generic(s: &Sort) -> bool {
        match s {
            Sort::Named(n) => n == "a" || n.ends_with("_a"),
            Sort::Ref(Some(t)) => generic(t),
            _ => false,
        }
    }
    actual.compatible(expected) || generic(expected) || generic(actual)
}
