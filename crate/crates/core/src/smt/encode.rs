use super::SmtError;
use crate::logic::{ArithOp, CmpOp, Prop, Sort, Term, Vocab};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

const RESERVED: &[&str] = &[
    "abs", "and", "as", "assert", "Array", "Bool", "char", "declare-fun", "distinct", "div", "exists", "false",
    "forall", "Int", "is_int", "ite", "let", "match", "mod", "not", "or", "par", "Real", "rem", "select", "store",
    "String", "to_int", "to_real", "true", "Unit", "unit_val", "xor",
];

/// SMT-LIB symbol for an identifier: simple symbols pass through, anything
/// else (primes, clashes with built-ins) is quoted or prefixed.
pub fn symbol(x: &str) -> String {
    if RESERVED.contains(&x) {
        return format!("u_{}", x);
    }
    let simple = x.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && x.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple {
        x.to_string()
    } else {
        format!("|{}|", x.replace('|', "_"))
    }
}

pub fn sort_name(s: &Sort) -> String {
    match s {
        Sort::Int | Sort::Nat => "Int".into(),
        Sort::Bool => "Bool".into(),
        Sort::Unit => "Unit".into(),
        Sort::Float => "Real".into(),
        Sort::Str => "String".into(),
        Sort::Heap => "heap".into(),
        Sort::Ref(_) => "ref".into(),
        Sort::Named(n) => symbol(n),
    }
}

fn user_sort(s: &Sort) -> Option<String> {
    match s {
        Sort::Unit | Sort::Heap | Sort::Ref(_) | Sort::Named(_) => Some(sort_name(s)),
        _ => None,
    }
}

struct Enc<'a> {
    vocab: &'a Vocab,
    consts: BTreeMap<String, Sort>,
    funcs: BTreeSet<String>,
    sorts: BTreeSet<String>,
    /// Nat-valued functions in use; each gets a non-negativity axiom.
    nat_funcs: BTreeSet<String>,
    unit_used: bool,
}

fn term_sort(t: &Term, vocab: &Vocab, env: &BTreeMap<String, Sort>) -> Option<Sort> {
    match t {
        Term::Var(x) => env.get(x).cloned(),
        Term::Int(_) => Some(Sort::Int),
        Term::Real(_) => Some(Sort::Float),
        Term::Bool(_) => Some(Sort::Bool),
        Term::Str(_) => Some(Sort::Str),
        Term::Unit => Some(Sort::Unit),
        Term::App(f, _) => vocab.func(f).map(|s| s.result.clone()),
        Term::Arith(_, a, b) => match (term_sort(a, vocab, env), term_sort(b, vocab, env)) {
            (Some(Sort::Float), _) | (_, Some(Sort::Float)) => Some(Sort::Float),
            _ => Some(Sort::Int),
        },
        Term::Neg(a) => term_sort(a, vocab, env).or(Some(Sort::Int)),
    }
}

/// Assign sorts to free variables missing from `env` from the positions
/// they occur in. Unconstrained variables default to int.
fn infer_sorts(props: &[&Prop], vocab: &Vocab, env: &mut BTreeMap<String, Sort>) {
    fn expect(t: &Term, s: &Sort, vocab: &Vocab, env: &mut BTreeMap<String, Sort>, bound: &BTreeSet<String>) {
        match t {
            Term::Var(x) if !bound.contains(x) && !env.contains_key(x) => {
                env.insert(x.clone(), s.clone());
            }
            Term::App(..) | Term::Arith(..) | Term::Neg(_) => visit_term(t, vocab, env, bound),
            _ => {}
        }
    }
    fn visit_term(t: &Term, vocab: &Vocab, env: &mut BTreeMap<String, Sort>, bound: &BTreeSet<String>) {
        match t {
            Term::App(f, args) => {
                if let Some(sig) = vocab.func(f) {
                    for (a, s) in args.iter().zip(sig.args.clone()) {
                        expect(a, &s, vocab, env, bound);
                    }
                }
            }
            Term::Arith(_, a, b) => {
                let s = term_sort(t, vocab, env).unwrap_or(Sort::Int);
                expect(a, &s, vocab, env, bound);
                expect(b, &s, vocab, env, bound);
            }
            Term::Neg(a) => expect(a, &Sort::Int, vocab, env, bound),
            _ => {}
        }
    }
    fn pair(a: &Term, b: &Term, vocab: &Vocab, env: &mut BTreeMap<String, Sort>, bound: &BTreeSet<String>) {
        visit_term(a, vocab, env, bound);
        visit_term(b, vocab, env, bound);
        let mut scoped = env.clone();
        for x in bound {
            scoped.entry(x.clone()).or_insert(Sort::Int);
        }
        if let Some(s) = term_sort(a, vocab, &scoped) {
            expect(b, &s, vocab, env, bound);
        }
        if let Some(s) = term_sort(b, vocab, &scoped) {
            expect(a, &s, vocab, env, bound);
        }
    }
    fn go(p: &Prop, vocab: &Vocab, env: &mut BTreeMap<String, Sort>, bound: &BTreeSet<String>) {
        match p {
            Prop::True | Prop::False => {}
            Prop::App(f, args) => visit_term(&Term::App(f.clone(), args.clone()), vocab, env, bound),
            Prop::Not(q) => go(q, vocab, env, bound),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|q| go(q, vocab, env, bound)),
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                go(a, vocab, env, bound);
                go(b, vocab, env, bound);
            }
            Prop::Forall(x, _, b) | Prop::Exists(x, _, b) => {
                let mut inner = bound.clone();
                inner.insert(x.clone());
                go(b, vocab, env, &inner);
            }
            Prop::Eq(a, b) => pair(a, b, vocab, env, bound),
            Prop::Cmp(_, a, b) => {
                pair(a, b, vocab, env, bound);
                expect(a, &Sort::Int, vocab, env, bound);
                expect(b, &Sort::Int, vocab, env, bound);
            }
        }
    }
    for _ in 0..3 {
        for p in props {
            go(p, vocab, env, &BTreeSet::new());
        }
    }
    for p in props {
        for x in crate::logic::free_vars(p) {
            env.entry(x).or_insert(Sort::Int);
        }
    }
}

impl<'a> Enc<'a> {
    fn note_sort(&mut self, s: &Sort) {
        if let Some(n) = user_sort(s) {
            self.sorts.insert(n);
        }
    }

    fn term(&mut self, t: &Term, bound: &BTreeSet<String>) -> Result<String, SmtError> {
        Ok(match t {
            Term::Var(x) => symbol(x),
            Term::Int(n) if *n < 0 => format!("(- {})", -(*n as i128)),
            Term::Int(n) => n.to_string(),
            Term::Real(r) => match r.strip_prefix('-') {
                Some(pos) => format!("(- {})", pos),
                None => r.clone(),
            },
            Term::Bool(b) => b.to_string(),
            Term::Str(s) => format!("\"{}\"", s.replace('"', "\"\"")),
            Term::Unit => {
                self.unit_used = true;
                self.sorts.insert("Unit".into());
                "unit_val".into()
            }
            Term::App(f, args) => {
                let sig = self
                    .vocab
                    .func(f)
                    .ok_or_else(|| SmtError::Unsupported(format!("undeclared function `{}`", f)))?
                    .clone();
                if sig.args.len() != args.len() {
                    return Err(SmtError::Unsupported(format!("`{}` applied to {} argument(s)", f, args.len())));
                }
                for s in sig.args.iter().chain(std::iter::once(&sig.result)) {
                    if *s == Sort::Unit {
                        self.unit_used = true;
                    }
                    self.note_sort(s);
                }
                self.funcs.insert(f.clone());
                let text = if args.is_empty() {
                    symbol(f)
                } else {
                    let parts: Result<Vec<String>, SmtError> = args.iter().map(|a| self.term(a, bound)).collect();
                    format!("({} {})", symbol(f), parts?.join(" "))
                };
                if sig.result == Sort::Nat {
                    self.nat_funcs.insert(f.clone());
                }
                text
            }
            Term::Arith(op, a, b) => {
                let s = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                format!("({} {} {})", s, self.term(a, bound)?, self.term(b, bound)?)
            }
            Term::Neg(a) => format!("(- {})", self.term(a, bound)?),
        })
    }

    fn prop(&mut self, p: &Prop, bound: &BTreeSet<String>) -> Result<String, SmtError> {
        Ok(match p {
            Prop::True => "true".into(),
            Prop::False => "false".into(),
            Prop::App(f, args) => self.term(&Term::App(f.clone(), args.clone()), bound)?,
            Prop::Not(q) => format!("(not {})", self.prop(q, bound)?),
            Prop::And(ps) if ps.is_empty() => "true".into(),
            Prop::Or(ps) if ps.is_empty() => "false".into(),
            Prop::And(ps) | Prop::Or(ps) => {
                let op = if matches!(p, Prop::And(_)) { "and" } else { "or" };
                let parts: Result<Vec<String>, SmtError> = ps.iter().map(|q| self.prop(q, bound)).collect();
                format!("({} {})", op, parts?.join(" "))
            }
            Prop::Implies(a, b) => format!("(=> {} {})", self.prop(a, bound)?, self.prop(b, bound)?),
            Prop::Iff(a, b) => format!("(= {} {})", self.prop(a, bound)?, self.prop(b, bound)?),
            Prop::Forall(x, s, b) | Prop::Exists(x, s, b) => {
                let q = if matches!(p, Prop::Forall(..)) { "forall" } else { "exists" };
                self.note_sort(s);
                if *s == Sort::Unit {
                    self.unit_used = true;
                }
                let mut inner = bound.clone();
                inner.insert(x.clone());
                let body = self.prop(b, &inner)?;
                let body = match (*s == Sort::Nat, q) {
                    (true, "forall") => format!("(=> (>= {} 0) {})", symbol(x), body),
                    (true, _) => format!("(and (>= {} 0) {})", symbol(x), body),
                    _ => body,
                };
                format!("({} (({} {})) {})", q, symbol(x), sort_name(s), body)
            }
            Prop::Eq(a, b) => format!("(= {} {})", self.term(a, bound)?, self.term(b, bound)?),
            Prop::Cmp(op, a, b) => {
                let (a, b) = (self.term(a, bound)?, self.term(b, bound)?);
                match op {
                    CmpOp::Ne => format!("(distinct {} {})", a, b),
                    CmpOp::Lt => format!("(< {} {})", a, b),
                    CmpOp::Le => format!("(<= {} {})", a, b),
                    CmpOp::Gt => format!("(> {} {})", a, b),
                    CmpOp::Ge => format!("(>= {} {})", a, b),
                }
            }
        })
    }
}

/// The solver input for `facts ⇒ goal`, without `set-logic`: sorted
/// declarations, the facts, the negated goal and `check-sat`.
pub fn encode_body(vocab: &Vocab, consts: &BTreeMap<String, Sort>, facts: &[Prop], goal: &Prop) -> Result<String, SmtError> {
    let mut env = consts.clone();
    let mut all: Vec<&Prop> = facts.iter().collect();
    all.push(goal);
    infer_sorts(&all, vocab, &mut env);
    let mut used = BTreeSet::new();
    for p in &all {
        used.extend(crate::logic::free_vars(p));
    }
    let mut enc = Enc {
        vocab,
        consts: env.into_iter().filter(|(x, _)| used.contains(x)).collect(),
        funcs: BTreeSet::new(),
        sorts: BTreeSet::new(),
        nat_funcs: BTreeSet::new(),
        unit_used: false,
    };
    let none = BTreeSet::new();
    let mut asserts = Vec::new();
    for f in facts {
        if *f != Prop::True {
            asserts.push(format!("(assert {})", enc.prop(f, &none)?));
        }
    }
    let g = enc.prop(goal, &none)?;
    asserts.push(format!("(assert (not {}))", g));
    for s in enc.consts.values().cloned().collect::<Vec<_>>() {
        if s == Sort::Unit {
            enc.unit_used = true;
        }
        enc.note_sort(&s);
    }
    if enc.unit_used {
        enc.sorts.insert("Unit".into());
    }

    let mut out = String::new();
    for s in &enc.sorts {
        let _ = writeln!(out, "(declare-sort {} 0)", s);
    }
    for f in &enc.funcs {
        let sig = vocab.func(f).expect("recorded from vocab");
        let args: Vec<String> = sig.args.iter().map(sort_name).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) {})", symbol(f), args.join(" "), sort_name(&sig.result));
    }
    let mut consts: Vec<(String, String, bool)> =
        enc.consts.iter().map(|(x, s)| (symbol(x), sort_name(s), *s == Sort::Nat)).collect();
    if enc.unit_used {
        consts.push(("unit_val".into(), "Unit".into(), false));
    }
    consts.sort();
    for (x, s, _) in &consts {
        let _ = writeln!(out, "(declare-const {} {})", x, s);
    }
    for (x, _, nat) in &consts {
        if *nat {
            let _ = writeln!(out, "(assert (>= {} 0))", x);
        }
    }
    if enc.unit_used {
        let _ = writeln!(out, "(assert (forall ((u Unit)) (= u unit_val)))");
    }
    for f in &enc.nat_funcs {
        let sig = vocab.func(f).expect("recorded from vocab");
        if sig.args.is_empty() {
            let _ = writeln!(out, "(assert (>= {} 0))", symbol(f));
        } else {
            let binders: Vec<String> =
                sig.args.iter().enumerate().map(|(i, s)| format!("(a{} {})", i, sort_name(s))).collect();
            let names: Vec<String> = (0..sig.args.len()).map(|i| format!("a{}", i)).collect();
            let app = format!("({} {})", symbol(f), names.join(" "));
            let _ = writeln!(out, "(assert (forall ({}) (! (>= {} 0) :pattern ({}))))", binders.join(" "), app, app);
        }
    }
    for a in asserts {
        let _ = writeln!(out, "{}", a);
    }
    out.push_str("(check-sat)\n");
    Ok(out)
}

/// A standalone script for `facts ⇒ goal`; byte-stable for identical inputs.
pub fn encode(vocab: &Vocab, consts: &BTreeMap<String, Sort>, facts: &[Prop], goal: &Prop) -> Result<String, SmtError> {
    Ok(format!("(set-logic ALL)\n{}", encode_body(vocab, consts, facts, goal)?))
}
