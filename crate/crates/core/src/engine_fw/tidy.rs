use crate::corelang::{Branch, Expr};
use crate::logic::Sort;
use crate::problem::{Goal, Problem};
use std::collections::BTreeSet;

/// Engine binders start with this prefix; everything else is kept as is.
pub(crate) const ENGINE_PREFIX: &str = "t_";

fn stem(s: &Sort) -> &'static str {
    match s {
        Sort::Bool => "b",
        Sort::Str => "s",
        Sort::Float => "x",
        Sort::Int | Sort::Nat => "y",
        Sort::Unit => "u",
        Sort::Ref(_) => "r",
        _ => "z",
    }
}

fn mentions(e: &Expr, x: &str) -> bool {
    let mut found = false;
    e.walk(&mut |s| {
        if let Expr::Var(y) = s {
            found |= y == x;
        }
    });
    found
}

fn rename(e: &Expr, from: &str, to: &str) -> Expr {
    let r = |a: &Expr| rename(a, from, to);
    match e {
        Expr::Var(x) if x == from => Expr::var(to),
        Expr::Var(_) | Expr::Const(_) | Expr::Loc(_) | Expr::Hole(..) | Expr::Skip => e.clone(),
        Expr::Lambda(ps, b) => Expr::Lambda(ps.clone(), Box::new(r(b))),
        Expr::ConsApp(c, args) => Expr::ConsApp(c.clone(), args.iter().map(r).collect()),
        Expr::Call(c, args) => Expr::Call(c.clone(), args.iter().map(r).collect()),
        Expr::Ref(a) => Expr::Ref(Box::new(r(a))),
        Expr::Return(a) => Expr::ret(r(a)),
        Expr::If(c, t, f) => Expr::ite(r(c), r(t), r(f)),
        Expr::Match(s, bs) => Expr::Match(
            Box::new(r(s)),
            bs.iter().map(|b| Branch { body: r(&b.body), ..b.clone() }).collect(),
        ),
        Expr::Seq(x, a, b) => Expr::seq(x, r(a), r(b)),
    }
}

fn binders(e: &Expr, out: &mut BTreeSet<String>) {
    e.walk(&mut |s| match s {
        Expr::Seq(x, _, _) => {
            out.insert(x.clone());
        }
        Expr::Match(_, bs) => bs.iter().for_each(|b| out.extend(b.binders.iter().cloned())),
        _ => {}
    });
}

/// Give engine binders readable names: unused ones become `_`, the rest
/// a sort letter and the first free index (`b1`, `s1`, `x1`, ...).
pub fn tidy(problem: &Problem, goal: &Goal, e: &Expr) -> Expr {
    let mut taken: BTreeSet<String> = problem.globals.iter().chain(goal.params.iter()).map(|(x, _)| x.clone()).collect();
    binders(e, &mut taken);
    let mut env = problem.sort_env();
    env.vars = problem.globals.iter().chain(goal.params.iter()).cloned().collect();
    go(e, &env, &mut taken)
}

fn go(e: &Expr, env: &crate::corelang::SortEnv, taken: &mut BTreeSet<String>) -> Expr {
    match e {
        Expr::Seq(x, a, b) => {
            let sort = env.infer(a);
            let a2 = go(a, env, taken);
            let mut name = x.clone();
            let mut rest = (**b).clone();
            if x.starts_with(ENGINE_PREFIX) {
                if !mentions(&rest, x) {
                    name = "_".into();
                } else {
                    let st = stem(sort.as_ref().unwrap_or(&Sort::Int));
                    let mut i = 1;
                    while taken.contains(&format!("{}{}", st, i)) {
                        i += 1;
                    }
                    name = format!("{}{}", st, i);
                    taken.insert(name.clone());
                    rest = rename(&rest, x, &name);
                }
            }
            let inner = match sort {
                Some(s) if name != "_" => env.with(&name, s),
                _ => env.clone(),
            };
            Expr::seq(&name, a2, go(&rest, &inner, taken))
        }
        // Branches are separate scopes and may reuse names.
        Expr::If(c, t, f) => Expr::ite((**c).clone(), go(t, env, &mut taken.clone()), go(f, env, &mut taken.clone())),
        Expr::Match(s, bs) => Expr::Match(
            s.clone(),
            bs.iter().map(|b| Branch { body: go(&b.body, env, &mut taken.clone()), ..b.clone() }).collect(),
        ),
        _ => e.clone(),
    }
}
