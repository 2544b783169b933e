//! The target calculus: monadic expressions with typed holes.

mod parse;
mod print;

pub use parse::parse_program;
pub use print::pretty_print;

use crate::logic::{Prop, Sort, Term};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Unit,
    Float(String),
    Str(String),
}

impl Literal {
    pub fn sort(&self) -> Sort {
        match self {
            Literal::Int(_) => Sort::Int,
            Literal::Bool(_) => Sort::Bool,
            Literal::Unit => Sort::Unit,
            Literal::Float(_) => Sort::Float,
            Literal::Str(_) => Sort::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeExpr {
    Refinement { sort: Sort, var: String, prop: Prop },
    DepFun(Vec<(String, TypeExpr)>, Box<TypeExpr>),
    Computation { pre: Prop, var: String, sort: Sort, post: Prop },
}

impl TypeExpr {
    pub fn base(sort: Sort) -> TypeExpr {
        TypeExpr::Refinement { sort, var: "v".into(), prop: Prop::True }
    }

    pub fn base_sort(&self) -> Option<&Sort> {
        match self {
            TypeExpr::Refinement { sort, .. } | TypeExpr::Computation { sort, .. } => Some(sort),
            TypeExpr::DepFun(..) => None,
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Refinement { sort, var, prop } if var == "v" && *prop == Prop::True => write!(f, "{}", sort),
            TypeExpr::Refinement { sort, var, prop } => write!(f, "{{{} : {} | {}}}", var, sort, prop),
            TypeExpr::DepFun(params, res) => {
                for (x, t) in params {
                    write!(f, "({} : {}) -> ", x, t)?;
                }
                write!(f, "{}", res)
            }
            TypeExpr::Computation { pre, var, sort, post } => write!(f, "{{{}}} {} : {} {{{}}}", pre, var, sort, post),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub ctor: String,
    pub binders: Vec<String>,
    pub body: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Const(Literal),
    Loc(usize),
    Lambda(Vec<(String, Sort)>, Box<Expr>),
    ConsApp(String, Vec<Expr>),
    Call(String, Vec<Expr>),
    Ref(Box<Expr>),
    Match(Box<Expr>, Vec<Branch>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Return(Box<Expr>),
    /// `x ← first; rest`; `x` scopes over `rest` only.
    Seq(String, Box<Expr>, Box<Expr>),
    Hole(usize, TypeExpr),
    Skip,
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }

    pub fn call(f: &str, args: Vec<Expr>) -> Expr {
        Expr::Call(f.to_string(), args)
    }

    pub fn ret(e: Expr) -> Expr {
        Expr::Return(Box::new(e))
    }

    pub fn seq(x: &str, first: Expr, rest: Expr) -> Expr {
        Expr::Seq(x.to_string(), Box::new(first), Box::new(rest))
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn hole(id: usize, sort: Sort) -> Expr {
        Expr::Hole(id, TypeExpr::base(sort))
    }

    /// Values: variables, constants, locations and constructor applications of values.
    pub fn is_pure(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) | Expr::Loc(_) => true,
            Expr::ConsApp(_, args) => args.iter().all(Expr::is_pure),
            _ => false,
        }
    }

    /// The logical term denoted by a pure expression.
    pub fn to_term(&self) -> Option<Term> {
        Some(match self {
            Expr::Var(x) => Term::Var(x.clone()),
            Expr::Const(Literal::Int(n)) => Term::Int(*n),
            Expr::Const(Literal::Bool(b)) => Term::Bool(*b),
            Expr::Const(Literal::Unit) => Term::Unit,
            Expr::Const(Literal::Float(r)) => Term::Real(r.clone()),
            Expr::Const(Literal::Str(s)) => Term::Str(s.clone()),
            Expr::Loc(n) => Term::Var(format!("loc{}", n)),
            Expr::ConsApp(c, args) => Term::App(c.clone(), args.iter().map(Expr::to_term).collect::<Option<_>>()?),
            _ => return None,
        })
    }

    pub fn holes(&self) -> Vec<(usize, TypeExpr)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Hole(i, t) = e {
                out.push((*i, t.clone()));
            }
        });
        out
    }

    pub fn is_hole_free(&self) -> bool {
        self.holes().is_empty()
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Lambda(_, b) | Expr::Ref(b) | Expr::Return(b) => b.walk(f),
            Expr::ConsApp(_, args) | Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            Expr::Match(s, bs) => {
                s.walk(f);
                bs.iter().for_each(|b| b.body.walk(f));
            }
            Expr::If(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            Expr::Seq(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Var(_) | Expr::Const(_) | Expr::Loc(_) | Expr::Hole(..) | Expr::Skip => {}
        }
    }

    /// Component names called, in pre-order.
    pub fn calls(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Call(f, _) = e {
                out.push(f.clone());
            }
        });
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", pretty_print(self))
    }
}

/// A possibly holed term handed from backward to forward search.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub shape: Expr,
}

impl Hypothesis {
    pub fn new(shape: Expr) -> Hypothesis {
        Hypothesis { shape }
    }

    /// The empty prefix: every path is compatible.
    pub fn trivial() -> Hypothesis {
        Hypothesis { shape: Expr::Skip }
    }

    pub fn is_trivial(&self) -> bool {
        self.shape == Expr::Skip
    }

    /// Holed steps of a straight-line prefix, in order: (binder, hole sort).
    pub fn hole_steps(&self) -> Vec<(String, Sort)> {
        let mut out = Vec::new();
        let mut e = &self.shape;
        while let Expr::Seq(x, a, rest) = e {
            if let Expr::Hole(_, t) = &**a {
                if let Some(s) = t.base_sort() {
                    out.push((x.clone(), s.clone()));
                }
            }
            e = rest;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub component: String,
    pub args: Vec<Expr>,
    pub binder: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// AST node count; holes count as one node.
pub fn expr_size(e: &Expr) -> usize {
    let mut n = 0;
    e.walk(&mut |_| n += 1);
    n
}

/// Right-nested sequence of the path's calls ending in `skip`.
pub fn path_to_expr(p: &Path) -> Expr {
    p.steps
        .iter()
        .rev()
        .fold(Expr::Skip, |rest, s| Expr::seq(&s.binder, Expr::Call(s.component.clone(), s.args.clone()), rest))
}

/// `e_f; e_b`: the trailing `skip` of every leaf of `first` continues with `rest`.
pub fn sequence(first: &Expr, rest: &Expr) -> Expr {
    match first {
        Expr::Skip => rest.clone(),
        Expr::Seq(x, a, b) => Expr::seq(x, (**a).clone(), sequence(b, rest)),
        Expr::If(c, t, e) => Expr::ite((**c).clone(), sequence(t, rest), sequence(e, rest)),
        Expr::Match(s, bs) => Expr::Match(
            s.clone(),
            bs.iter().map(|b| Branch { body: sequence(&b.body, rest), ..b.clone() }).collect(),
        ),
        other => Expr::seq("_", other.clone(), rest.clone()),
    }
}

/// Result sorts of components and constructors plus the sorts of bound
/// variables, for inferring the base sort of a subterm.
#[derive(Debug, Clone, Default)]
pub struct SortEnv {
    pub vars: Vec<(String, Sort)>,
    pub comps: BTreeMap<String, Sort>,
    pub ctors: BTreeMap<String, Sort>,
}

impl SortEnv {
    pub fn lookup(&self, x: &str) -> Option<&Sort> {
        self.vars.iter().rev().find(|(y, _)| y == x).map(|(_, s)| s)
    }

    pub fn with(&self, x: &str, s: Sort) -> SortEnv {
        let mut e = self.clone();
        e.vars.push((x.to_string(), s));
        e
    }

    pub fn infer(&self, e: &Expr) -> Option<Sort> {
        match e {
            Expr::Var(x) => self.lookup(x).cloned(),
            Expr::Const(l) => Some(l.sort()),
            Expr::Loc(_) => Some(Sort::Ref(None)),
            Expr::Lambda(..) => None,
            Expr::ConsApp(c, _) => self.ctors.get(c).cloned(),
            Expr::Call(f, _) => self.comps.get(f).cloned(),
            Expr::Ref(init) => Some(Sort::Ref(self.infer(init).map(Box::new))),
            Expr::Match(_, bs) => bs.first().and_then(|b| self.infer(&b.body)),
            Expr::If(_, t, _) => self.infer(t),
            Expr::Return(v) => self.infer(v),
            Expr::Seq(x, a, b) => match self.infer(a) {
                Some(s) => self.with(x, s).infer(b),
                None => self.infer(b),
            },
            Expr::Hole(_, t) => t.base_sort().cloned(),
            Expr::Skip => Some(Sort::Unit),
        }
    }
}

/// `t ≺ H`: same shape, each hole of `H` matched by a subterm of `t` whose
/// inferred base sort is the hole's.
pub fn matches_hypothesis(t: &Expr, h: &Expr, env: &SortEnv) -> bool {
    match (t, h) {
        (_, Expr::Hole(_, ty)) => match (env.infer(t), ty.base_sort()) {
            (Some(a), Some(b)) => a.compatible(b),
            _ => false,
        },
        (Expr::Seq(x, a, r), Expr::Seq(y, b, s)) => {
            if x != y || !matches_hypothesis(a, b, env) {
                return false;
            }
            let inner = match env.infer(a) {
                Some(sort) => env.with(x, sort),
                None => env.clone(),
            };
            matches_hypothesis(r, s, &inner)
        }
        (Expr::Lambda(p, a), Expr::Lambda(q, b)) => {
            p == q && {
                let mut inner = env.clone();
                inner.vars.extend(p.iter().cloned());
                matches_hypothesis(a, b, &inner)
            }
        }
        (Expr::ConsApp(c, xs), Expr::ConsApp(d, ys)) | (Expr::Call(c, xs), Expr::Call(d, ys)) => {
            c == d && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| matches_hypothesis(x, y, env))
        }
        (Expr::Ref(a), Expr::Ref(b)) | (Expr::Return(a), Expr::Return(b)) => matches_hypothesis(a, b, env),
        (Expr::If(c, t1, e1), Expr::If(d, t2, e2)) => {
            matches_hypothesis(c, d, env) && matches_hypothesis(t1, t2, env) && matches_hypothesis(e1, e2, env)
        }
        (Expr::Match(s1, b1), Expr::Match(s2, b2)) => {
            matches_hypothesis(s1, s2, env)
                && b1.len() == b2.len()
                && b1.iter().zip(b2).all(|(x, y)| {
                    x.ctor == y.ctor && x.binders == y.binders && matches_hypothesis(&x.body, &y.body, env)
                })
        }
        _ => t == h,
    }
}

/// Rename binders to `x1, x2, ...` in binding order (`_` is kept), so that
/// terms equal up to bound-variable names compare equal.
pub fn alpha_normalize(e: &Expr) -> Expr {
    fn go(e: &Expr, env: &BTreeMap<String, String>, next: &mut usize) -> Expr {
        let bind = |x: &str, env: &BTreeMap<String, String>, next: &mut usize| -> (String, BTreeMap<String, String>) {
            let mut inner = env.clone();
            if x == "_" {
                return ("_".into(), inner);
            }
            *next += 1;
            let fresh = format!("x{}", next);
            inner.insert(x.to_string(), fresh.clone());
            (fresh, inner)
        };
        match e {
            Expr::Var(x) => Expr::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Expr::Const(_) | Expr::Loc(_) | Expr::Hole(..) | Expr::Skip => e.clone(),
            Expr::Lambda(ps, b) => {
                let mut inner = env.clone();
                let mut nps = Vec::new();
                for (x, s) in ps {
                    let (n, i2) = bind(x, &inner, next);
                    inner = i2;
                    nps.push((n, s.clone()));
                }
                Expr::Lambda(nps, Box::new(go(b, &inner, next)))
            }
            Expr::ConsApp(c, args) => Expr::ConsApp(c.clone(), args.iter().map(|a| go(a, env, next)).collect()),
            Expr::Call(c, args) => Expr::Call(c.clone(), args.iter().map(|a| go(a, env, next)).collect()),
            Expr::Ref(a) => Expr::Ref(Box::new(go(a, env, next))),
            Expr::Return(a) => Expr::Return(Box::new(go(a, env, next))),
            Expr::If(c, t, f) => Expr::ite(go(c, env, next), go(t, env, next), go(f, env, next)),
            Expr::Match(s, bs) => {
                let s = go(s, env, next);
                let bs = bs
                    .iter()
                    .map(|b| {
                        let mut inner = env.clone();
                        let mut names = Vec::new();
                        for x in &b.binders {
                            let (n, i2) = bind(x, &inner, next);
                            inner = i2;
                            names.push(n);
                        }
                        Branch { ctor: b.ctor.clone(), binders: names, body: go(&b.body, &inner, next) }
                    })
                    .collect();
                Expr::Match(Box::new(s), bs)
            }
            Expr::Seq(x, a, b) => {
                let a = go(a, env, next);
                let (n, inner) = bind(x, env, next);
                Expr::Seq(n, Box::new(a), Box::new(go(b, &inner, next)))
            }
        }
    }
    go(e, &BTreeMap::new(), &mut 0)
}
