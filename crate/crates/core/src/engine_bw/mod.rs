//! Backward synthesis: weakest-precondition driven construction of the
//! tail of a program, either complete or as a shape for forward search.

use crate::corelang::{alpha_normalize, pretty_print, Expr};
use crate::engine_fw::{synth_pure, Ctx, Shape, SynthError};
use crate::logic::{
    and_all, free_vars, instantiate, map_terms, resolve, sel_locs, subst1, wp_sym, CallSpec, HeapState, Prop, Sort,
    Term, View, POST_HEAP, PRE_HEAP,
};
use crate::problem::Goal;
use crate::smt::Validity;
use crate::verify::{sort_fits, typecheck, SymState, VerifyError};
use std::collections::{BTreeMap, BTreeSet};

/// Backward steps taken before a tail is handed over as it is.
pub const BW_DEPTH: usize = 3;

/// Datatypes with more constructors are not split into holes.
const MAX_CTORS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum BwOutcome {
    Complete(Expr),
    /// Holes to fill and the tail after them, with the obligation the
    /// filled prefix has to meet.
    Partial { shape: Shape, residual: Goal },
}

impl BwOutcome {
    /// Identity of the outcome for the failed set.
    pub fn key(&self) -> String {
        match self {
            BwOutcome::Complete(e) => term_key(e),
            BwOutcome::Partial { shape, .. } => shape_key(shape),
        }
    }
}

/// Failed-set key of a term: its printed form up to binder names.
pub fn term_key(e: &Expr) -> String {
    pretty_print(&alpha_normalize(e))
}

/// The shape as one holed term: hole steps followed by the tail. The
/// trivial shape is `skip`, the marker for a forward-only attempt.
pub fn shape_key(shape: &Shape) -> String {
    let tail = shape.tail.clone().unwrap_or(Expr::Skip);
    let e = shape
        .holes
        .iter()
        .enumerate()
        .rev()
        .fold(tail, |rest, (i, (x, s))| Expr::seq(x, Expr::hole(i, s.clone()), rest));
    term_key(&e)
}

#[derive(Debug, Clone, Copy)]
pub struct BwConfig {
    pub depth: usize,
    /// Whether handing the whole goal to forward search is allowed.
    pub allow_fw: bool,
}

fn rename_heap(p: &Prop, from: &str, to: &str) -> Prop {
    map_terms(p, &mut |t| match t {
        Term::Var(x) if x == from => Some(Term::var(to)),
        _ => None,
    })
}

struct Bw<'c, 'a> {
    ctx: &'c mut Ctx<'a>,
    goal: &'c Goal,
    failed: &'c BTreeSet<String>,
    cfg: BwConfig,
    out: Vec<BwOutcome>,
    /// Sorts of program variables the formulas may mention.
    vars: BTreeMap<String, Sort>,
}

impl<'c, 'a> Bw<'c, 'a> {
    /// Validity of `hyps ⇒ concl` for every pair of heaps `h`, `h'`.
    fn relation_valid(&mut self, hyps: &[Prop], concl: &Prop, extra: &[(String, Sort)]) -> Result<bool, SynthError> {
        self.ctx.tick()?;
        let vocab = &self.ctx.problem.vocab;
        let mut hs = HeapState::new(self.ctx.gen.clone());
        let all: Vec<&Prop> = hyps.iter().chain([concl]).collect();
        for p in &all {
            for (loc, s) in sel_locs(p, PRE_HEAP, vocab) {
                hs.initial_ghost(&loc, &s);
            }
        }
        for p in &all {
            for (loc, s) in sel_locs(p, POST_HEAP, vocab) {
                if !hs.current.contains_key(&loc) {
                    hs.ensure(&loc, &s);
                    hs.advance(&loc, &s);
                }
            }
        }
        hs.advance_heap();
        let views = [
            View { var: PRE_HEAP, ghosts: &hs.initial, heap: Some(&hs.heap_initial) },
            View { var: POST_HEAP, ghosts: &hs.current, heap: Some(&hs.heap_current) },
        ];
        let facts: Vec<Prop> = hyps.iter().map(|p| resolve(p, vocab, &views)).collect();
        let goal = resolve(concl, vocab, &views);
        let mut consts = self.vars.clone();
        consts.extend(extra.iter().cloned());
        for (k, s) in hs.symbols() {
            consts.insert(k.clone(), s.clone());
        }
        let mut fv = free_vars(&goal);
        facts.iter().for_each(|f| fv.extend(free_vars(f)));
        consts.retain(|k, _| fv.contains(k));
        Ok(matches!(self.ctx.solver.check(vocab, &consts, &facts, &goal)?, Validity::Valid))
    }

    fn checks(&mut self, e: &Expr) -> Result<bool, SynthError> {
        self.ctx.tick()?;
        match typecheck(self.ctx.problem, self.goal, e, self.ctx.solver) {
            Ok(r) => Ok(r.ok),
            Err(VerifyError::IllTyped { .. }) => Ok(false),
            Err(VerifyError::Solver(e)) => Err(e.into()),
        }
    }

    fn is_failed(&self, e: &Expr) -> bool {
        self.failed.contains(&term_key(e))
    }

    fn arg_choices(&self, c: &CallSpec) -> Vec<Vec<Expr>> {
        let st = SymState::initial(self.ctx.problem, self.goal, self.ctx.gen.clone());
        let mut combos: Vec<Vec<Expr>> = vec![vec![]];
        for (_, s) in &c.params {
            let mut opts: Vec<Expr> = st.vars_of_sort(s).into_iter().map(|(x, _)| Expr::var(&x)).collect();
            if *s == Sort::Unit {
                opts.push(Expr::Const(crate::corelang::Literal::Unit));
            }
            combos = combos
                .iter()
                .flat_map(|c| opts.iter().map(move |o| [c.clone(), vec![o.clone()]].concat()))
                .collect();
        }
        combos
    }

    /// Frame for a call: conjuncts of `q` that also hold in the goal's
    /// precondition and read no location `c` writes.
    fn frame(&self, q: &Prop, inst_post: &Prop) -> Vec<Prop> {
        let vocab = &self.ctx.problem.vocab;
        let written: BTreeSet<String> = sel_locs(inst_post, POST_HEAP, vocab).into_iter().map(|(l, _)| l).collect();
        let pre = self.goal.pre.conjuncts();
        q.conjuncts()
            .into_iter()
            .filter(|c| {
                let reads: Vec<String> = sel_locs(c, POST_HEAP, vocab).into_iter().map(|(l, _)| l).collect();
                reads.iter().all(|l| !written.contains(l)) && pre.contains(&rename_heap(c, POST_HEAP, PRE_HEAP))
            })
            .map(|c| rename_heap(&c, POST_HEAP, PRE_HEAP))
            .collect()
    }

    /// BW_CALL (then BW_FRAME) for `c(args)` against post `q`: the call
    /// establishes `q` from any state satisfying its precondition. Returns
    /// the weakest precondition of the call for `q`.
    fn call_step(&mut self, c: &CallSpec, args: &[Expr], binder: &str, q: &Prop) -> Result<Option<Prop>, SynthError> {
        let terms: Vec<Term> = args.iter().map(|a| a.to_term().expect("variable argument")).collect();
        let inst = instantiate(c, &terms, Term::var(binder), &self.ctx.gen);
        let vocab = &self.ctx.problem.vocab;
        let mut trusting = inst.clone();
        trusting.pre = Prop::True;
        let w_true = wp_sym(&trusting, binder, &c.result, q, vocab, &self.ctx.gen);
        let pre_b = rename_heap(&inst.pre, PRE_HEAP, POST_HEAP);
        let full = wp_sym(&inst, binder, &c.result, q, vocab, &self.ctx.gen);
        let ghosts = inst.ghosts.clone();
        let hyps = vec![self.goal.pre.clone(), pre_b.clone()];
        if self.relation_valid(&hyps, &w_true, &ghosts)? {
            return Ok(Some(full));
        }
        let frame = self.frame(q, &inst.post);
        if !frame.is_empty() {
            let mut hyps = hyps;
            hyps.push(and_all(frame.into_iter().map(|f| rename_heap(&f, PRE_HEAP, POST_HEAP))));
            if self.relation_valid(&hyps, &w_true, &ghosts)? {
                return Ok(Some(full));
            }
        }
        Ok(None)
    }

    fn residual(&self, post: Prop) -> Goal {
        Goal {
            name: format!("{}'", self.goal.name),
            params: self.goal.params.clone(),
            pre: self.goal.pre.clone(),
            post,
            result_var: "_".into(),
            result: Sort::Unit,
        }
    }

    /// Extend the tail `e_b` backwards while calls keep establishing the
    /// obligation `w`; true once a complete program is found.
    fn backward(&mut self, e_b: Expr, w: Prop, depth: usize) -> Result<bool, SynthError> {
        if depth > 0 && self.checks(&e_b)? {
            self.out.push(BwOutcome::Complete(e_b));
            return Ok(true);
        }
        if depth < self.cfg.depth {
            for c in self.ctx.problem.library.clone() {
                for args in self.arg_choices(&c) {
                    let binder = self.ctx.fresh_binder();
                    let prefix = Expr::seq(&binder, Expr::Call(c.name.clone(), args.clone()), e_b.clone());
                    if self.is_failed(&prefix) {
                        continue;
                    }
                    if let Some(w1) = self.call_step(&c, &args, &binder, &w)? {
                        if self.backward(prefix, w1, depth + 1)? {
                            return Ok(true);
                        }
                    }
                }
            }
        }
        if depth > 0 {
            let shape = Shape { holes: Vec::new(), tail: Some(e_b) };
            if !self.failed.contains(&shape_key(&shape)) {
                self.out.push(BwOutcome::Partial { shape, residual: self.residual(w) });
            }
        }
        Ok(false)
    }

    fn post_for(&self, v: Term) -> Prop {
        subst1(&self.goal.post, &self.goal.result_var, v)
    }

    fn run(&mut self) -> Result<(), SynthError> {
        let problem = self.ctx.problem;
        // BW_SUB on a pure result.
        let st = SymState::initial(problem, self.goal, self.ctx.gen.clone());
        for e in synth_pure(problem, &st, &self.goal.result) {
            let e = Expr::ret(e);
            if !self.is_failed(&e) && self.checks(&e)? {
                self.out.push(BwOutcome::Complete(e));
                return Ok(());
            }
        }
        // BW_CALL / BW_FRAME for calls producing the result.
        for c in problem.library.clone() {
            if !sort_fits(&c.result, &self.goal.result) {
                continue;
            }
            for args in self.arg_choices(&c) {
                let x = self.ctx.fresh_binder();
                let e_b = Expr::seq(&x, Expr::Call(c.name.clone(), args.clone()), Expr::ret(Expr::var(&x)));
                if self.is_failed(&e_b) {
                    continue;
                }
                // The call alone from the precondition.
                if self.checks(&e_b)? {
                    self.out.push(BwOutcome::Complete(e_b));
                    return Ok(());
                }
                let q = self.post_for(Term::var(&x));
                if let Some(w) = self.call_step(&c, &args, &x, &q)? {
                    if self.backward(e_b, w, 1)? {
                        return Ok(());
                    }
                }
            }
        }
        // BW_HOLE: the result built from holes.
        self.holes();
        // BW_FW: the whole goal to forward search.
        let fw = Shape::trivial();
        if self.cfg.allow_fw && !self.failed.contains(&shape_key(&fw)) {
            self.out.push(BwOutcome::Partial { shape: fw, residual: self.goal.clone() });
        }
        Ok(())
    }

    fn hole_name(&self, stem: &str, taken: &BTreeSet<String>) -> String {
        let mut i = 1;
        while taken.contains(&format!("{}{}", stem, i)) {
            i += 1;
        }
        format!("{}{}", stem, i)
    }

    fn holes(&mut self) {
        let problem = self.ctx.problem;
        let mut taken: BTreeSet<String> =
            problem.globals.iter().chain(self.goal.params.iter()).map(|(x, _)| x.clone()).collect();
        let ctors: Vec<_> = problem
            .ctors
            .iter()
            .filter(|c| sort_fits(&Sort::Named(c.datatype.clone()), &self.goal.result))
            .cloned()
            .collect();
        let mut shapes = Vec::new();
        if !ctors.is_empty() && ctors.len() <= MAX_CTORS {
            for c in ctors {
                let mut t = taken.clone();
                let mut holes = Vec::new();
                let mut s = crate::logic::Subst::new();
                for (p, ps) in &c.params {
                    let x = self.hole_name(p, &t);
                    t.insert(x.clone());
                    s.insert(p.clone(), Term::var(&x));
                    holes.push((x, ps.clone()));
                }
                let value = Term::App(c.name.clone(), holes.iter().map(|(x, _)| Term::var(x)).collect());
                let post = and_all([self.post_for(value), crate::logic::substitute(&c.refinement, &s)]);
                let tail = Expr::ret(Expr::ConsApp(c.name.clone(), holes.iter().map(|(x, _)| Expr::var(x)).collect()));
                shapes.push((Shape { holes, tail: Some(tail) }, post));
            }
        } else if self.goal.result != Sort::Unit && !matches!(self.goal.result, Sort::Named(_)) {
            let x = self.hole_name("x", &taken);
            taken.insert(x.clone());
            let post = self.post_for(Term::var(&x));
            shapes.push((Shape { holes: vec![(x.clone(), self.goal.result.clone())], tail: Some(Expr::ret(Expr::var(&x))) }, post));
        }
        for (shape, post) in shapes {
            if !self.failed.contains(&shape_key(&shape)) {
                let residual = self.residual(post);
                self.out.push(BwOutcome::Partial { shape, residual });
            }
        }
    }
}

/// Backward outcomes for `goal` in rule order, skipping anything in
/// `failed` (alpha-normalized). Stops at the first complete program.
pub fn bw_outcomes(
    ctx: &mut Ctx<'_>,
    goal: &Goal,
    failed: &BTreeSet<String>,
    cfg: BwConfig,
) -> Result<Vec<BwOutcome>, SynthError> {
    let mut vars: BTreeMap<String, Sort> = ctx.problem.globals.iter().cloned().collect();
    vars.extend(goal.params.iter().cloned());
    let mut bw = Bw { ctx, goal, failed, cfg, out: Vec::new(), vars };
    bw.run()?;
    Ok(bw.out)
}

#[cfg(test)]
mod tests;
