//! Propositions, terms and the predicate transformers used by both engines.

mod heap;
mod transform;
mod vocab;

pub use heap::{GhostGen, HeapState};
pub use vocab::{is_interpreted_name, QualSig, Vocab};
pub use transform::{
    canonical_state, eliminate_ghosts, frame_split, guard_split, heap_vars_in, inst_pre, instantiate, resolve,
    resolve_goal, sel_locs, sp_call, visit_terms, wp_call, wp_sym, CallSpec, FrameSplit, Instance, View, POST_HEAP, PRE_HEAP,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Base sorts of the specification language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    /// Integer-valued and known to be non-negative.
    Nat,
    Bool,
    Unit,
    Float,
    Str,
    Heap,
    Ref(Option<Box<Sort>>),
    Named(String),
}

impl Sort {
    /// Sort compatibility used for argument matching: `ref` matches any `ref T`.
    pub fn compatible(&self, other: &Sort) -> bool {
        match (self, other) {
            (Sort::Ref(None), Sort::Ref(_)) | (Sort::Ref(_), Sort::Ref(None)) => true,
            (Sort::Int, Sort::Nat) | (Sort::Nat, Sort::Int) => true,
            (a, b) => a == b,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Sort::Int | Sort::Nat | Sort::Float)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "int"),
            Sort::Nat => write!(f, "nat"),
            Sort::Bool => write!(f, "bool"),
            Sort::Unit => write!(f, "unit"),
            Sort::Float => write!(f, "float"),
            Sort::Str => write!(f, "string"),
            Sort::Heap => write!(f, "heap"),
            Sort::Ref(None) => write!(f, "ref"),
            Sort::Ref(Some(s)) => write!(f, "ref {}", s),
            Sort::Named(n) => write!(f, "{}", n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
        }
    }
}

/// First-order terms. Floats keep their literal text so terms stay `Eq`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Int(i64),
    Real(String),
    Bool(bool),
    Str(String),
    Unit,
    App(String, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

impl Term {
    pub fn var(s: &str) -> Term {
        Term::Var(s.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Term {
        Term::App(f.to_string(), args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    True,
    False,
    App(String, Vec<Term>),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Iff(Box<Prop>, Box<Prop>),
    Forall(String, Sort, Box<Prop>),
    Exists(String, Sort, Box<Prop>),
    Eq(Term, Term),
    Cmp(CmpOp, Term, Term),
}

impl Prop {
    pub fn not(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }

    pub fn implies(a: Prop, b: Prop) -> Prop {
        Prop::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Prop, b: Prop) -> Prop {
        Prop::Iff(Box::new(a), Box::new(b))
    }

    pub fn eq(a: Term, b: Term) -> Prop {
        Prop::Eq(a, b)
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<Prop> {
        let mut out = Vec::new();
        fn go(p: &Prop, out: &mut Vec<Prop>) {
            match p {
                Prop::And(ps) => ps.iter().for_each(|q| go(q, out)),
                Prop::True => {}
                q => out.push(q.clone()),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn is_true(&self) -> bool {
        matches!(simplify(self), Prop::True)
    }
}

/// Conjunction with flattening and unit elimination.
pub fn and_all<I: IntoIterator<Item = Prop>>(ps: I) -> Prop {
    let mut out = Vec::new();
    for p in ps {
        match p {
            Prop::True => {}
            Prop::False => return Prop::False,
            Prop::And(qs) => out.extend(qs),
            q => out.push(q),
        }
    }
    match out.len() {
        0 => Prop::True,
        1 => out.pop().unwrap(),
        _ => Prop::And(out),
    }
}

pub fn or_all<I: IntoIterator<Item = Prop>>(ps: I) -> Prop {
    let mut out = Vec::new();
    for p in ps {
        match p {
            Prop::False => {}
            Prop::True => return Prop::True,
            Prop::Or(qs) => out.extend(qs),
            q => out.push(q),
        }
    }
    match out.len() {
        0 => Prop::False,
        1 => out.pop().unwrap(),
        _ => Prop::Or(out),
    }
}

/// Light boolean simplification: units, syntactic reflexivity, double negation.
pub fn simplify(p: &Prop) -> Prop {
    match p {
        Prop::And(ps) => and_all(ps.iter().map(simplify)),
        Prop::Or(ps) => or_all(ps.iter().map(simplify)),
        Prop::Not(q) => match simplify(q) {
            Prop::True => Prop::False,
            Prop::False => Prop::True,
            Prop::Not(r) => *r,
            r => Prop::not(r),
        },
        Prop::Implies(a, b) => match (simplify(a), simplify(b)) {
            (Prop::True, b) => b,
            (Prop::False, _) | (_, Prop::True) => Prop::True,
            (a, Prop::False) => Prop::not(a),
            (a, b) => Prop::implies(a, b),
        },
        Prop::Iff(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b {
                Prop::True
            } else {
                Prop::iff(a, b)
            }
        }
        Prop::Eq(a, b) if a == b => Prop::True,
        Prop::Forall(x, s, b) => match simplify(b) {
            Prop::True => Prop::True,
            b => Prop::Forall(x.clone(), s.clone(), Box::new(b)),
        },
        Prop::Exists(x, s, b) => match simplify(b) {
            Prop::False => Prop::False,
            b => Prop::Exists(x.clone(), s.clone(), Box::new(b)),
        },
        q => q.clone(),
    }
}

// ---------------------------------------------------------------------------
// Traversals

pub fn term_free_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::App(_, args) => args.iter().for_each(|a| term_free_vars(a, out)),
        Term::Arith(_, a, b) => {
            term_free_vars(a, out);
            term_free_vars(b, out);
        }
        Term::Neg(a) => term_free_vars(a, out),
        _ => {}
    }
}

pub fn free_vars(p: &Prop) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(p: &Prop, out: &mut BTreeSet<String>) {
        match p {
            Prop::True | Prop::False => {}
            Prop::App(_, args) => args.iter().for_each(|a| term_free_vars(a, out)),
            Prop::Not(q) => go(q, out),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|q| go(q, out)),
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                go(a, out);
                go(b, out);
            }
            Prop::Forall(x, _, b) | Prop::Exists(x, _, b) => {
                let mut inner = BTreeSet::new();
                go(b, &mut inner);
                inner.remove(x);
                out.extend(inner);
            }
            Prop::Eq(a, b) | Prop::Cmp(_, a, b) => {
                term_free_vars(a, out);
                term_free_vars(b, out);
            }
        }
    }
    go(p, &mut out);
    out
}

fn term_quals(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::App(f, args) => {
            out.insert(f.clone());
            args.iter().for_each(|a| term_quals(a, out));
        }
        Term::Arith(_, a, b) => {
            term_quals(a, out);
            term_quals(b, out);
        }
        Term::Neg(a) => term_quals(a, out),
        _ => {}
    }
}

/// Names of every function symbol applied in `p`.
pub fn qual_set(p: &Prop) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn go(p: &Prop, out: &mut BTreeSet<String>) {
        match p {
            Prop::True | Prop::False => {}
            Prop::App(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| term_quals(a, out));
            }
            Prop::Not(q) => go(q, out),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|q| go(q, out)),
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                go(a, out);
                go(b, out);
            }
            Prop::Forall(_, _, b) | Prop::Exists(_, _, b) => go(b, out),
            Prop::Eq(a, b) | Prop::Cmp(_, a, b) => {
                term_quals(a, out);
                term_quals(b, out);
            }
        }
    }
    go(p, &mut out);
    out
}

/// Top-down term rewriting over every term position of a proposition: `f`
/// is tried on a term before its children; a replacement is not revisited.
/// Bound variables are not renamed; callers use this only for symbols that
/// are never bound (heap variables, ghosts).
pub fn map_terms(p: &Prop, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Prop {
    fn mt(t: &Term, f: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
        if let Some(r) = f(t) {
            return r;
        }
        match t {
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| mt(a, f)).collect()),
            Term::Arith(op, a, b) => Term::Arith(*op, Box::new(mt(a, f)), Box::new(mt(b, f))),
            Term::Neg(a) => Term::Neg(Box::new(mt(a, f))),
            t => t.clone(),
        }
    }
    match p {
        Prop::True | Prop::False => p.clone(),
        Prop::App(g, args) => match mt(&Term::App(g.clone(), args.clone()), f) {
            Term::Bool(true) => Prop::True,
            Term::Bool(false) => Prop::False,
            Term::App(g2, a2) => Prop::App(g2, a2),
            other => Prop::Eq(other, Term::Bool(true)),
        },
        Prop::Not(q) => Prop::not(map_terms(q, f)),
        Prop::And(ps) => Prop::And(ps.iter().map(|q| map_terms(q, f)).collect()),
        Prop::Or(ps) => Prop::Or(ps.iter().map(|q| map_terms(q, f)).collect()),
        Prop::Implies(a, b) => Prop::implies(map_terms(a, f), map_terms(b, f)),
        Prop::Iff(a, b) => Prop::iff(map_terms(a, f), map_terms(b, f)),
        Prop::Forall(x, s, b) => Prop::Forall(x.clone(), s.clone(), Box::new(map_terms(b, f))),
        Prop::Exists(x, s, b) => Prop::Exists(x.clone(), s.clone(), Box::new(map_terms(b, f))),
        Prop::Eq(a, b) => Prop::Eq(mt(a, f), mt(b, f)),
        Prop::Cmp(op, a, b) => Prop::Cmp(*op, mt(a, f), mt(b, f)),
    }
}

// ---------------------------------------------------------------------------
// Substitution

pub type Subst = BTreeMap<String, Term>;

pub fn subst_term(t: &Term, s: &Subst) -> Term {
    match t {
        Term::Var(x) => s.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_term(a, s)).collect()),
        Term::Arith(op, a, b) => {
            Term::Arith(*op, Box::new(subst_term(a, s)), Box::new(subst_term(b, s)))
        }
        Term::Neg(a) => Term::Neg(Box::new(subst_term(a, s))),
        t => t.clone(),
    }
}

/// Simultaneous capture-avoiding substitution of free variables.
pub fn substitute(p: &Prop, s: &Subst) -> Prop {
    if s.is_empty() {
        return p.clone();
    }
    match p {
        Prop::True | Prop::False => p.clone(),
        Prop::App(f, args) => Prop::App(f.clone(), args.iter().map(|a| subst_term(a, s)).collect()),
        Prop::Not(q) => Prop::not(substitute(q, s)),
        Prop::And(ps) => Prop::And(ps.iter().map(|q| substitute(q, s)).collect()),
        Prop::Or(ps) => Prop::Or(ps.iter().map(|q| substitute(q, s)).collect()),
        Prop::Implies(a, b) => Prop::implies(substitute(a, s), substitute(b, s)),
        Prop::Iff(a, b) => Prop::iff(substitute(a, s), substitute(b, s)),
        Prop::Forall(x, sort, b) | Prop::Exists(x, sort, b) => {
            let is_forall = matches!(p, Prop::Forall(..));
            let body_fv = free_vars(b);
            let mut inner: Subst = s
                .iter()
                .filter(|(k, _)| *k != x && body_fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            let mut range_fv = BTreeSet::new();
            inner.values().for_each(|t| term_free_vars(t, &mut range_fv));
            let (x2, body) = if range_fv.contains(x) {
                let mut fresh = format!("{}'", x);
                while range_fv.contains(&fresh) || body_fv.contains(&fresh) || inner.contains_key(&fresh) {
                    fresh.push('\'');
                }
                inner.insert(x.clone(), Term::Var(fresh.clone()));
                (fresh, substitute(b, &inner))
            } else {
                (x.clone(), substitute(b, &inner))
            };
            if is_forall {
                Prop::Forall(x2, sort.clone(), Box::new(body))
            } else {
                Prop::Exists(x2, sort.clone(), Box::new(body))
            }
        }
        Prop::Eq(a, b) => Prop::Eq(subst_term(a, s), subst_term(b, s)),
        Prop::Cmp(op, a, b) => Prop::Cmp(*op, subst_term(a, s), subst_term(b, s)),
    }
}

pub fn subst1(p: &Prop, x: &str, t: Term) -> Prop {
    let mut s = Subst::new();
    s.insert(x.to_string(), t);
    substitute(p, &s)
}

// ---------------------------------------------------------------------------
// Printing in the specification syntax

fn atomic_term(t: &Term) -> bool {
    !matches!(t, Term::Arith(..) | Term::Neg(_))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{}", x),
            Term::Int(n) if *n < 0 => write!(f, "(0 - {})", -n),
            Term::Int(n) => write!(f, "{}", n),
            Term::Real(r) => write!(f, "{}", r),
            Term::Bool(b) => write!(f, "{}", b),
            Term::Str(s) => write!(f, "\"{}\"", s),
            Term::Unit => write!(f, "()"),
            Term::App(g, args) => {
                write!(f, "{} (", g)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", a)?;
                }
                write!(f, ")")
            }
            Term::Arith(op, a, b) => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                let wrap = |t: &Term| {
                    if atomic_term(t) {
                        format!("{}", t)
                    } else {
                        format!("({})", t)
                    }
                };
                write!(f, "{} {} {}", wrap(a), sym, wrap(b))
            }
            Term::Neg(a) => write!(f, "(0 - {})", a),
        }
    }
}

fn atomic_prop(p: &Prop) -> bool {
    matches!(p, Prop::True | Prop::False | Prop::App(..) | Prop::Not(_) | Prop::Eq(..) | Prop::Cmp(..))
}

fn wrap_prop(p: &Prop) -> String {
    if atomic_prop(p) {
        format!("{}", p)
    } else {
        format!("({})", p)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::True => write!(f, "true"),
            Prop::False => write!(f, "false"),
            Prop::App(g, args) => write!(f, "{}", Term::App(g.clone(), args.clone())),
            Prop::Not(q) => write!(f, "not ({})", q),
            Prop::And(ps) if ps.is_empty() => write!(f, "true"),
            Prop::Or(ps) if ps.is_empty() => write!(f, "false"),
            Prop::And(ps) => {
                let parts: Vec<String> = ps.iter().map(wrap_prop).collect();
                write!(f, "{}", parts.join(" /\\ "))
            }
            Prop::Or(ps) => {
                let parts: Vec<String> = ps.iter().map(wrap_prop).collect();
                write!(f, "{}", parts.join(" \\/ "))
            }
            Prop::Implies(a, b) => write!(f, "{} => {}", wrap_prop(a), wrap_prop(b)),
            Prop::Iff(a, b) => write!(f, "{} <=> {}", wrap_prop(a), wrap_prop(b)),
            Prop::Forall(x, s, b) => write!(f, "forall ({} : {}). {}", x, s, wrap_prop(b)),
            Prop::Exists(x, s, b) => write!(f, "exists ({} : {}). {}", x, s, wrap_prop(b)),
            Prop::Eq(a, b) => write!(f, "[{} = {}]", a, b),
            Prop::Cmp(op, a, b) => write!(f, "[{} {} {}]", a, op.symbol(), b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::var(x)
    }

    #[test]
    fn substitute_single_occurrence() {
        let p = Prop::App("mem".into(), vec![v("Tbl"), v("s")]);
        let q = subst1(&p, "s", v("s1"));
        assert_eq!(q, Prop::App("mem".into(), vec![v("Tbl"), v("s1")]));
    }

    #[test]
    fn substitute_avoids_capture() {
        let p = Prop::Forall("x".into(), Sort::Int, Box::new(Prop::eq(v("x"), v("y"))));
        let q = subst1(&p, "y", v("x"));
        assert_eq!(
            q,
            Prop::Forall("x'".into(), Sort::Int, Box::new(Prop::eq(v("x'"), v("x"))))
        );
    }

    #[test]
    fn substitute_skips_bound_variable() {
        let p = Prop::Exists("x".into(), Sort::Int, Box::new(Prop::eq(v("x"), v("z"))));
        assert_eq!(subst1(&p, "x", Term::Int(3)), p);
    }

    #[test]
    fn qual_set_collects_nested_applications() {
        let p = Prop::And(vec![
            Prop::eq(Term::app("sel", vec![v("h"), v("tbl")]), v("Tbl")),
            Prop::App("mem".into(), vec![v("Tbl'"), v("s")]),
            Prop::eq(
                Term::app("size", vec![v("Tbl'")]),
                Term::Arith(ArithOp::Add, Box::new(Term::app("size", vec![v("Tbl")])), Box::new(Term::Int(1))),
            ),
        ]);
        let qs: Vec<String> = qual_set(&p).into_iter().collect();
        assert_eq!(qs, vec!["mem", "sel", "size"]);
    }

    #[test]
    fn free_vars_excludes_bound() {
        let p = Prop::Forall("z".into(), Sort::Int, Box::new(Prop::eq(v("z"), v("w"))));
        assert_eq!(free_vars(&p).into_iter().collect::<Vec<_>>(), vec!["w".to_string()]);
    }

    #[test]
    fn simplify_units() {
        let p = Prop::And(vec![Prop::True, Prop::implies(Prop::True, Prop::eq(v("a"), v("a")))]);
        assert_eq!(simplify(&p), Prop::True);
        assert_eq!(simplify(&Prop::not(Prop::not(Prop::False))), Prop::False);
    }
}
