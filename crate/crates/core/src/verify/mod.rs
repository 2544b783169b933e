//! Checker for hole-free programs against a goal: forward symbolic
//! execution with every side condition discharged by the solver.

mod state;

pub use state::{sort_fits, SymState};

use crate::corelang::{pretty_print, Expr};
use crate::logic::{and_all, subst1, GhostGen, Prop, Sort, Term};
use crate::problem::{Goal, Problem};
use crate::smt::{SmtError, Solver, Validity};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("ill-typed: {reason} in `{subterm}`")]
    IllTyped { reason: String, subterm: String },
    #[error(transparent)]
    Solver(#[from] SmtError),
}

/// One discharged side condition.
#[derive(Debug, Clone)]
pub struct Entailment {
    pub what: String,
    pub facts: Prop,
    pub goal: Prop,
    pub result: Validity,
}

impl Entailment {
    pub fn as_prop(&self) -> Prop {
        Prop::implies(self.facts.clone(), self.goal.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub ok: bool,
    pub trace: Vec<Entailment>,
}

struct Checker<'a> {
    problem: &'a Problem,
    solver: &'a mut Solver,
    trace: Vec<Entailment>,
}

enum Stop {
    Failed,
    Error(VerifyError),
}

impl From<SmtError> for Stop {
    fn from(e: SmtError) -> Self {
        Stop::Error(VerifyError::Solver(e))
    }
}

fn ill(reason: impl Into<String>, e: &Expr) -> Stop {
    Stop::Error(VerifyError::IllTyped { reason: reason.into(), subterm: pretty_print(e) })
}

impl<'a> Checker<'a> {
    fn obligation(&mut self, st: &SymState, goal: &Prop, what: String) -> Result<(), Stop> {
        let result = st.entails(self.problem, self.solver, goal)?;
        let ok = result.is_valid();
        self.trace.push(Entailment { what, facts: st.fact(), goal: goal.clone(), result });
        if ok {
            Ok(())
        } else {
            Err(Stop::Failed)
        }
    }

    fn pure(&self, st: &SymState, e: &Expr) -> Result<(Term, Sort), Stop> {
        match e {
            Expr::Var(x) => match st.lookup(x) {
                Some((t, s)) => Ok((t.clone(), s.clone())),
                None => Err(ill(format!("unbound variable `{}`", x), e)),
            },
            Expr::Const(l) => Ok((e.to_term().expect("literal"), l.sort())),
            Expr::ConsApp(c, args) => {
                let ctor = self.problem.ctor(c).ok_or_else(|| ill(format!("unknown constructor `{}`", c), e))?;
                if ctor.params.len() != args.len() {
                    return Err(ill(format!("`{}` expects {} argument(s)", c, ctor.params.len()), e));
                }
                let mut ts = Vec::new();
                for (a, (_, ps)) in args.iter().zip(&ctor.params) {
                    let (t, s) = self.pure(st, a)?;
                    if !sort_fits(&s, ps) {
                        return Err(ill(format!("argument of sort {} where {} expected", s, ps), a));
                    }
                    ts.push(t);
                }
                Ok((Term::App(c.clone(), ts), Sort::Named(ctor.datatype.clone())))
            }
            Expr::Loc(n) => Ok((Term::Var(format!("loc{}", n)), Sort::Ref(None))),
            _ => Err(ill("expected a pure expression", e)),
        }
    }

    fn ctor_refinement(&self, c: &str, args: &[Term]) -> Prop {
        let ctor = self.problem.ctor(c).expect("checked");
        let mut p = ctor.refinement.clone();
        for ((x, _), t) in ctor.params.iter().zip(args) {
            p = subst1(&p, x, t.clone());
        }
        p
    }

    /// Execute `e` from `st`, returning every final state with its result.
    fn exec(&mut self, st: SymState, e: &Expr, hint: &str) -> Result<Vec<(SymState, Term, Sort)>, Stop> {
        match e {
            Expr::Seq(x, first, rest) => {
                let mut out = Vec::new();
                for (mut s1, t, sort) in self.exec(st, first, x)? {
                    s1.bind(x, t, sort);
                    out.extend(self.exec(s1, rest, hint)?);
                }
                Ok(out)
            }
            Expr::Call(f, args) => {
                let c = self.problem.component(f).ok_or_else(|| ill(format!("unknown component `{}`", f), e))?;
                if c.params.len() != args.len() {
                    return Err(ill(format!("`{}` expects {} argument(s)", f, c.params.len()), e));
                }
                let mut ts = Vec::new();
                for (a, (_, ps)) in args.iter().zip(&c.params) {
                    let (t, s) = self.pure(&st, a)?;
                    if !sort_fits(&s, ps) {
                        return Err(ill(format!("argument of sort {} where {} expected", s, ps), a));
                    }
                    ts.push(t);
                }
                let result_sort = c.result.clone();
                let (pre, next, r) = st.call(self.problem, f, &ts, hint).expect("arity checked");
                self.obligation(&st, &pre, format!("precondition of {}", pretty_print(e)))?;
                Ok(vec![(next, r, result_sort)])
            }
            Expr::If(c, t, f) => {
                let (ct, cs) = self.pure(&st, c)?;
                if cs != Sort::Bool {
                    return Err(ill("non-boolean condition", c));
                }
                let mut st_t = st.clone();
                st_t.assume(Prop::eq(ct.clone(), Term::Bool(true)));
                let mut st_f = st;
                st_f.assume(Prop::eq(ct, Term::Bool(false)));
                let mut out = self.exec(st_t, t, hint)?;
                out.extend(self.exec(st_f, f, hint)?);
                Ok(out)
            }
            Expr::Match(s, branches) => {
                let (scrut, _) = self.pure(&st, s)?;
                let mut out = Vec::new();
                for b in branches {
                    let ctor = self
                        .problem
                        .ctor(&b.ctor)
                        .ok_or_else(|| ill(format!("unknown constructor `{}`", b.ctor), e))?
                        .clone();
                    if ctor.params.len() != b.binders.len() {
                        return Err(ill(format!("`{}` binds {} field(s)", b.ctor, ctor.params.len()), e));
                    }
                    let mut bs = st.clone();
                    let mut fields = Vec::new();
                    for (x, (_, ps)) in b.binders.iter().zip(&ctor.params) {
                        let k = bs.fresh_const(x);
                        bs.consts.insert(k.clone(), ps.clone());
                        bs.bind(x, Term::var(&k), ps.clone());
                        fields.push(Term::var(&k));
                    }
                    bs.assume(Prop::eq(scrut.clone(), Term::App(b.ctor.clone(), fields.clone())));
                    bs.assume(self.ctor_refinement(&b.ctor, &fields));
                    out.extend(self.exec(bs, &b.body, hint)?);
                }
                Ok(out)
            }
            Expr::Return(v) => {
                let (t, s) = self.pure(&st, v)?;
                let mut st = st;
                if let Expr::ConsApp(c, _) = &**v {
                    if let Term::App(_, args) = &t {
                        let r = self.ctor_refinement(c, args);
                        self.obligation(&st, &r, format!("constructor refinement of {}", pretty_print(v)))?;
                        st.assume(r);
                    }
                }
                Ok(vec![(st, t, s)])
            }
            Expr::Skip => Ok(vec![(st, Term::Unit, Sort::Unit)]),
            Expr::Ref(init) => {
                let (t, s) = self.pure(&st, init)?;
                let mut st = st;
                let r = st.fresh_const("r");
                let others: Vec<Prop> = st
                    .consts
                    .iter()
                    .filter(|(_, s)| matches!(s, Sort::Ref(_)))
                    .map(|(x, _)| Prop::Cmp(crate::logic::CmpOp::Ne, Term::var(x), Term::var(&r)))
                    .collect();
                st.consts.insert(r.clone(), Sort::Ref(Some(Box::new(s))));
                st.assume(and_all(others));
                let _ = t;
                Ok(vec![(st, Term::var(&r), Sort::Ref(None))])
            }
            Expr::Hole(..) => Err(ill("program contains a hole", e)),
            Expr::Lambda(..) => Err(ill("functions are not checked", e)),
            Expr::Var(_) | Expr::Const(_) | Expr::ConsApp(..) | Expr::Loc(_) => {
                let (t, s) = self.pure(&st, e)?;
                Ok(vec![(st, t, s)])
            }
        }
    }
}

/// Check `e` against `goal`, starting from `goal`'s precondition.
pub fn typecheck(problem: &Problem, goal: &Goal, e: &Expr, solver: &mut Solver) -> Result<Report, VerifyError> {
    let st = SymState::initial(problem, goal, GhostGen::new());
    typecheck_from(problem, goal, st, e, solver)
}

/// Check `e` from an explicit starting state.
pub fn typecheck_from(problem: &Problem, goal: &Goal, st: SymState, e: &Expr, solver: &mut Solver) -> Result<Report, VerifyError> {
    let mut ck = Checker { problem, solver, trace: Vec::new() };
    let run = ck.exec(st, e, "r").and_then(|finals| {
        for (s, t, sort) in finals {
            if !sort_fits(&sort, &goal.result) {
                return Err(ill(format!("result of sort {} where {} expected", sort, goal.result), e));
            }
            let q = s.post_goal(problem, goal, &t);
            ck.obligation(&s, &q, format!("postcondition of {}", goal.name))?;
        }
        Ok(())
    });
    match run {
        Ok(()) => Ok(Report { ok: true, trace: ck.trace }),
        Err(Stop::Failed) => Ok(Report { ok: false, trace: ck.trace }),
        Err(Stop::Error(err)) => Err(err),
    }
}

/// Check a program against the problem's own query.
pub fn check_query(problem: &Problem, e: &Expr, solver: &mut Solver) -> Result<Report, VerifyError> {
    typecheck(problem, &problem.goal, e, solver)
}

/// The ordered entailments `typecheck` discharged.
pub fn vc_trace(problem: &Problem, goal: &Goal, e: &Expr, solver: &mut Solver) -> Result<Vec<(Prop, Validity)>, VerifyError> {
    let r = typecheck(problem, goal, e, solver)?;
    Ok(r.trace.iter().map(|t| (t.as_prop(), t.result.clone())).collect())
}

#[cfg(test)]
mod tests;
