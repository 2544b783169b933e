use super::*;
use crate::logic::{free_vars, visit_terms, Term};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    UndeclaredSymbol,
    ArityMismatch { expected: usize, found: usize },
    Duplicate,
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub symbol: String,
    pub span: Span,
}

impl Violation {
    pub fn into_error(self) -> SpecError {
        match self.kind {
            ViolationKind::UndeclaredSymbol => SpecError::UndeclaredSymbol { name: self.symbol, span: self.span },
            ViolationKind::ArityMismatch { expected, found } => {
                SpecError::ArityMismatch { name: self.symbol, expected, found, span: self.span }
            }
            ViolationKind::Duplicate => {
                SpecError::Invalid { msg: format!("`{}` declared more than once", self.symbol), span: self.span }
            }
            ViolationKind::Invalid(msg) => SpecError::Invalid { msg: format!("`{}`: {}", self.symbol, msg), span: self.span },
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.clone().into_error())
    }
}

struct Checker<'a> {
    file: &'a SpecFile,
    /// name -> arity, for qualifiers and constructors
    funcs: BTreeMap<&'a str, usize>,
    sorts: BTreeSet<&'a str>,
    out: Vec<Violation>,
}

fn is_capitalized(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

impl<'a> Checker<'a> {
    fn report(&mut self, kind: ViolationKind, symbol: &str, span: Span) {
        self.out.push(Violation { kind, symbol: symbol.to_string(), span });
    }

    fn sort(&mut self, s: &Sort, span: Span) {
        match s {
            Sort::Named(n) => {
                let known = self.sorts.contains(n.as_str()) || n.starts_with("list_") || n == "a";
                if !known {
                    self.report(ViolationKind::UndeclaredSymbol, n, span);
                }
            }
            Sort::Ref(Some(inner)) => self.sort(inner, span),
            _ => {}
        }
    }

    fn prop(&mut self, p: &Prop, scope: &BTreeSet<String>, span: Span) {
        for x in free_vars(p) {
            if !scope.contains(&x) {
                self.report(ViolationKind::UndeclaredSymbol, &x, span);
            }
        }
        let mut apps: Vec<(String, usize)> = Vec::new();
        visit_terms(p, &mut |t| {
            if let Term::App(f, args) = t {
                apps.push((f.clone(), args.len()));
            }
        });
        for (f, n) in apps {
            match self.funcs.get(f.as_str()) {
                None => self.report(ViolationKind::UndeclaredSymbol, &f, span),
                Some(&m) if m != n => self.report(ViolationKind::ArityMismatch { expected: m, found: n }, &f, span),
                _ => {}
            }
        }
        self.quantified_sorts(p, span);
    }

    fn quantified_sorts(&mut self, p: &Prop, span: Span) {
        match p {
            Prop::Forall(_, s, b) | Prop::Exists(_, s, b) => {
                self.sort(s, span);
                self.quantified_sorts(b, span);
            }
            Prop::Not(q) => self.quantified_sorts(q, span),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|q| self.quantified_sorts(q, span)),
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                self.quantified_sorts(a, span);
                self.quantified_sorts(b, span);
            }
            _ => {}
        }
    }

    fn rtype(&mut self, t: &RefinementType, scope: &BTreeSet<String>, span: Span) {
        self.sort(&t.sort, span);
        let mut inner = scope.clone();
        inner.insert(t.var.clone());
        self.prop(&t.prop, &inner, span);
    }

    fn ghost_list(&mut self, gs: &[(String, Sort)], span: Span) {
        for (g, s) in gs {
            self.sort(s, span);
            if !is_capitalized(g) {
                self.report(ViolationKind::Invalid("ghost variables must be capitalized".into()), g, span);
            }
        }
    }

    fn signature(&mut self, c: &ComponentSpec) {
        let mut scope: BTreeSet<String> = self.file.globals.iter().map(|g| g.name.clone()).collect();
        for (x, t) in &c.params {
            self.rtype(t, &scope, c.span);
            if is_capitalized(x) {
                self.report(ViolationKind::Invalid("parameters must not be capitalized".into()), x, c.span);
            }
            scope.insert(x.clone());
        }
        self.ghost_list(&c.pre_ghosts, c.span);
        self.ghost_list(&c.post_ghosts, c.span);
        let mut pre_scope = scope.clone();
        pre_scope.insert(c.pre_heap.clone());
        pre_scope.extend(c.pre_ghosts.iter().map(|(g, _)| g.clone()));
        self.prop(&c.pre, &pre_scope, c.span);
        let mut post_scope = scope;
        post_scope.insert(c.post_pre_heap.clone());
        post_scope.insert(c.post_heap.clone());
        post_scope.insert(c.result_var.clone());
        post_scope.extend(c.pre_ghosts.iter().map(|(g, _)| g.clone()));
        post_scope.extend(c.post_ghosts.iter().map(|(g, _)| g.clone()));
        self.rtype(&c.result, &post_scope, c.span);
        self.prop(&c.post, &post_scope, c.span);
        if c.post_pre_heap == c.post_heap {
            self.report(ViolationKind::Invalid("pre- and post-heap must differ".into()), &c.post_heap, c.span);
        }
    }

    fn interpreted(&mut self, q: &QualifierDecl) {
        let ok_select = q.name.ends_with("sel")
            && q.args.len() == 2
            && q.args[0] == Sort::Heap
            && matches!(q.args[1], Sort::Ref(_));
        let ok_update = q.name.ends_with("update")
            && q.args.len() == 3
            && q.args[0] == Sort::Heap
            && matches!(q.args[1], Sort::Ref(_))
            && q.result == Sort::Heap;
        if !(ok_select || ok_update) {
            let expected = if q.name.ends_with("sel") { 2 } else { 3 };
            if q.args.len() != expected {
                self.report(ViolationKind::ArityMismatch { expected, found: q.args.len() }, &q.name, q.span);
            } else {
                self.report(ViolationKind::Invalid("select/update must range over heap and ref".into()), &q.name, q.span);
            }
        }
    }
}

fn duplicates<'a>(names: impl IntoIterator<Item = (&'a str, Span)>, out: &mut Vec<Violation>) {
    let mut seen = BTreeSet::new();
    for (n, span) in names {
        if !seen.insert(n) {
            out.push(Violation { kind: ViolationKind::Duplicate, symbol: n.to_string(), span });
        }
    }
}

/// All violations, in declaration order. Empty iff the file is well formed.
pub fn check_well_formed(file: &SpecFile) -> Vec<Violation> {
    let mut sorts: BTreeSet<&str> = file.sorts.iter().map(|(s, _)| s.as_str()).collect();
    sorts.extend(file.datatypes.iter().map(|d| d.name.as_str()));
    let mut funcs: BTreeMap<&str, usize> = BTreeMap::new();
    for q in &file.qualifiers {
        funcs.insert(&q.name, q.args.len());
    }
    for d in &file.datatypes {
        for c in &d.ctors {
            funcs.insert(&c.name, c.params.len());
        }
    }
    let mut ck = Checker { file, funcs, sorts, out: Vec::new() };

    let mut dup = Vec::new();
    duplicates(file.sorts.iter().map(|(s, sp)| (s.as_str(), *sp)).chain(file.datatypes.iter().map(|d| (d.name.as_str(), d.span))), &mut dup);
    duplicates(
        file.qualifiers
            .iter()
            .map(|q| (q.name.as_str(), q.span))
            .chain(file.datatypes.iter().flat_map(|d| d.ctors.iter().map(|c| (c.name.as_str(), c.span)))),
        &mut dup,
    );
    duplicates(
        file.library.iter().map(|c| (c.name.as_str(), c.span)).chain(file.query.iter().map(|q| (q.name.as_str(), q.span))),
        &mut dup,
    );
    duplicates(file.globals.iter().map(|g| (g.name.as_str(), g.span)), &mut dup);
    ck.out.extend(dup);

    for q in &file.qualifiers {
        for s in &q.args {
            ck.sort(s, q.span);
        }
        ck.sort(&q.result, q.span);
        if q.interpreted {
            ck.interpreted(q);
        }
    }
    for d in &file.datatypes {
        for c in &d.ctors {
            let mut scope = BTreeSet::new();
            for (x, t) in &c.params {
                ck.rtype(t, &scope, c.span);
                scope.insert(x.clone());
            }
            scope.insert("v".to_string());
            ck.prop(&c.refinement, &scope, c.span);
            if !is_capitalized(&c.name) {
                ck.report(ViolationKind::Invalid("constructors must be capitalized".into()), &c.name, c.span);
            }
        }
    }
    for g in &file.globals {
        ck.sort(&g.sort, g.span);
        if !matches!(g.sort, Sort::Ref(_)) {
            ck.report(ViolationKind::Invalid("globals must be references".into()), &g.name, g.span);
        }
    }
    for c in &file.library {
        ck.signature(c);
    }
    if let Some(q) = &file.query {
        ck.signature(q);
    }
    ck.out
}
