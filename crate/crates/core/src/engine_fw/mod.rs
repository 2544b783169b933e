//! Forward synthesis: strongest-postcondition guided enumeration of
//! component calls, guard splits and pure result terms.

mod search;
mod tidy;

pub use search::{solve, Shape, StepRec};
pub use tidy::tidy;

use crate::cdcl::PruneRecord;
use crate::corelang::{Expr, Literal};
use crate::logic::{GhostGen, Prop, Sort, Term};
use crate::problem::{Goal, Problem};
use crate::smt::{SmtError, Solver, Validity};
use crate::verify::{sort_fits, SymState};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("synthesis timed out")]
    Timeout,
    #[error(transparent)]
    Solver(#[from] SmtError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub nodes_pruned: usize,
    pub stuck_nodes: usize,
    pub learned: usize,
}

/// Shared state of one synthesis run.
pub struct Ctx<'a> {
    pub problem: &'a Problem,
    pub solver: &'a mut Solver,
    pub gen: GhostGen,
    pub stats: SearchStats,
    pub deadline: Option<Instant>,
    /// Upper bound on guard splits in one program.
    pub max_guards: usize,
    pub prunes: Vec<PruneRecord>,
    /// Print hypotheses and prunes to stderr.
    pub trace: bool,
}

impl<'a> Ctx<'a> {
    pub fn new(problem: &'a Problem, solver: &'a mut Solver) -> Ctx<'a> {
        Ctx { problem, solver, gen: GhostGen::new(), stats: SearchStats::default(), deadline: None, max_guards: 2, prunes: Vec::new(), trace: false }
    }

    pub fn tick(&self) -> Result<(), SynthError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(SynthError::Timeout),
            _ => Ok(()),
        }
    }

    /// Validity of `goal` under the facts of `st`; unsolved queries count
    /// as failures.
    pub fn holds(&mut self, st: &SymState, goal: &Prop) -> Result<bool, SynthError> {
        self.tick()?;
        if goal.is_true() {
            return Ok(true);
        }
        Ok(matches!(st.entails(self.problem, self.solver, goal)?, Validity::Valid))
    }

    pub fn initial_state(&self, goal: &Goal) -> SymState {
        SymState::initial(self.problem, goal, self.gen.clone())
    }

    /// A program-variable name no other binder of this run uses.
    pub fn fresh_binder(&self) -> String {
        self.gen.fresh(tidy::ENGINE_PREFIX)
    }
}

/// An applicable call: the component, its arguments and the state after it.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub comp: String,
    pub args: Vec<Expr>,
    pub pre: Prop,
    pub next: SymState,
    pub result: Term,
    pub result_sort: Sort,
}

fn arg_choices(st: &SymState, params: &[(String, Sort)]) -> Vec<Vec<(Expr, Term)>> {
    let mut combos: Vec<Vec<(Expr, Term)>> = vec![vec![]];
    for (_, s) in params {
        let mut opts: Vec<(Expr, Term)> =
            st.vars_of_sort(s).into_iter().map(|(x, t)| (Expr::var(&x), t)).collect();
        if *s == Sort::Unit {
            opts.push((Expr::Const(Literal::Unit), Term::Unit));
        }
        let mut next = Vec::new();
        for c in &combos {
            for o in &opts {
                let mut c2 = c.clone();
                c2.push(o.clone());
                next.push(c2);
            }
        }
        combos = next;
    }
    combos
}

/// Every call whose instantiated precondition the state entails, in
/// library order; arguments prefer the most recently bound variables.
pub fn fw_candidates(
    ctx: &mut Ctx<'_>,
    st: &SymState,
    accept: &dyn Fn(&crate::logic::CallSpec) -> bool,
) -> Result<Vec<Candidate>, SynthError> {
    let mut out = Vec::new();
    for c in ctx.problem.library.clone() {
        if !accept(&c) {
            continue;
        }
        for combo in arg_choices(st, &c.params) {
            let terms: Vec<Term> = combo.iter().map(|(_, t)| t.clone()).collect();
            let hint = ctx.gen.fresh("r_");
            let (pre, next, result) = match st.call(ctx.problem, &c.name, &terms, &hint) {
                Some(x) => x,
                None => continue,
            };
            if ctx.holds(st, &pre)? {
                out.push(Candidate {
                    comp: c.name.clone(),
                    args: combo.into_iter().map(|(e, _)| e).collect(),
                    pre,
                    next,
                    result,
                    result_sort: c.result.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Pure terms of sort `s`: variables first (most recent first), then
/// constructor applications over variables, nested at most twice.
pub fn synth_pure(problem: &Problem, st: &SymState, s: &Sort) -> Vec<Expr> {
    fn go(problem: &Problem, st: &SymState, s: &Sort, depth: usize, out: &mut Vec<Expr>) {
        for (x, _) in st.vars_of_sort(s) {
            out.push(Expr::var(&x));
        }
        match s {
            Sort::Unit => out.push(Expr::Const(Literal::Unit)),
            Sort::Bool => {
                out.push(Expr::Const(Literal::Bool(true)));
                out.push(Expr::Const(Literal::Bool(false)));
            }
            _ => {}
        }
        if depth == 0 {
            return;
        }
        for c in &problem.ctors {
            if !sort_fits(&Sort::Named(c.datatype.clone()), s) {
                continue;
            }
            let mut combos: Vec<Vec<Expr>> = vec![vec![]];
            for (_, ps) in &c.params {
                let mut opts = Vec::new();
                go(problem, st, ps, depth - 1, &mut opts);
                let mut next = Vec::new();
                for combo in &combos {
                    for o in &opts {
                        let mut c2 = combo.clone();
                        c2.push(o.clone());
                        next.push(c2);
                    }
                }
                combos = next;
                if combos.len() > 64 {
                    combos.truncate(64);
                }
            }
            for args in combos {
                out.push(Expr::ConsApp(c.name.clone(), args));
            }
        }
    }
    let mut out = Vec::new();
    go(problem, st, s, 2, &mut out);
    out
}

/// Forward synthesis without learning, with guard splits.
pub fn fw_synthesize(ctx: &mut Ctx<'_>, goal: &Goal, k: usize) -> Result<Option<Expr>, SynthError> {
    let st = ctx.initial_state(goal);
    let shape = Shape::trivial();
    let mut stuck = Vec::new();
    Ok(solve(ctx, goal, &st, &shape, k, None, &mut stuck)?.map(|e| tidy(ctx.problem, goal, &e)))
}
