use super::lexer::{lex, Tok, Token};
use super::*;
use crate::logic::{is_interpreted_name, ArithOp, CmpOp, Term};

const KEYWORDS: &[&str] = &[
    "not", "forall", "exists", "true", "false", "True", "False", "State", "query", "qualifier", "type", "sort",
    "global", "of",
];

type PResult<T> = Result<T, SpecError>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pub(crate) pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(SpecError::Syntax { span: self.span(), msg: msg.into() })
    }

    pub(crate) fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(n) => format!("`{}`", n),
            Tok::Real(r) => format!("`{}`", r),
            Tok::Str(s) => format!("\"{}\"", s),
            Tok::Sym(s) => format!("`{}`", s),
            Tok::Eof => "end of input".into(),
        }
    }

    pub(crate) fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub(crate) fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    pub(crate) fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", s, self.describe()))
        }
    }

    pub(crate) fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", k, self.describe()))
        }
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    pub(crate) fn arrow(&mut self) -> PResult<()> {
        if self.eat_sym("->") || self.eat_sym("→") {
            Ok(())
        } else {
            self.err(format!("expected `->`, found {}", self.describe()))
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn finish(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    // ---- sorts ----

    pub(crate) fn sort(&mut self) -> PResult<Sort> {
        if self.eat_sym("[") {
            let inner = self.sort()?;
            self.expect_sym("]")?;
            return Ok(Sort::Named(format!("list_{}", inner)));
        }
        let name = self.ident()?;
        Ok(match name.as_str() {
            "int" => Sort::Int,
            "nat" => Sort::Nat,
            "bool" => Sort::Bool,
            "unit" => Sort::Unit,
            "float" => Sort::Float,
            "string" => Sort::Str,
            "heap" => Sort::Heap,
            "ref" => {
                let next_is_sort =
                    matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) || self.is_sym("[");
                if next_is_sort {
                    Sort::Ref(Some(Box::new(self.sort()?)))
                } else {
                    Sort::Ref(None)
                }
            }
            _ => Sort::Named(name),
        })
    }

    /// `{v : S | φ}` or a bare sort.
    pub(crate) fn rtype(&mut self) -> PResult<RefinementType> {
        if self.eat_sym("{") {
            let var = self.ident()?;
            self.expect_sym(":")?;
            let sort = self.sort()?;
            self.expect_sym("|")?;
            let prop = self.prop()?;
            self.expect_sym("}")?;
            Ok(RefinementType { var, sort, prop })
        } else {
            Ok(RefinementType::trivial(self.sort()?))
        }
    }

    // ---- terms ----

    pub(crate) fn term(&mut self) -> PResult<Term> {
        let mut t = self.mul()?;
        loop {
            let op = if self.is_sym("+") {
                ArithOp::Add
            } else if self.is_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(t);
            };
            self.bump();
            let r = self.mul()?;
            t = Term::Arith(op, Box::new(t), Box::new(r));
        }
    }

    fn mul(&mut self) -> PResult<Term> {
        let mut t = self.neg()?;
        while self.eat_sym("*") {
            let r = self.neg()?;
            t = Term::Arith(ArithOp::Mul, Box::new(t), Box::new(r));
        }
        Ok(t)
    }

    fn neg(&mut self) -> PResult<Term> {
        if self.eat_sym("-") {
            let t = self.neg()?;
            return Ok(Term::Arith(ArithOp::Sub, Box::new(Term::Int(0)), Box::new(t)));
        }
        self.term_atom()
    }

    fn term_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Term::Real(r))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Str(s))
            }
            Tok::Ident(s) if matches!(s.as_str(), "true" | "True") => {
                self.bump();
                Ok(Term::Bool(true))
            }
            Tok::Ident(s) if matches!(s.as_str(), "false" | "False") => {
                self.bump();
                Ok(Term::Bool(false))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat_sym(")") {
                        loop {
                            args.push(self.term()?);
                            if self.eat_sym(")") {
                                break;
                            }
                            self.expect_sym(",")?;
                        }
                    }
                    Ok(Term::App(name, args))
                } else {
                    Ok(Term::Var(name))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Term::Unit);
                }
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.err(format!("expected term, found {}", self.describe())),
        }
    }

    // ---- propositions ----

    pub(crate) fn prop(&mut self) -> PResult<Prop> {
        let mut p = self.implication()?;
        while self.eat_sym("<=>") {
            let r = self.implication()?;
            p = Prop::Iff(Box::new(p), Box::new(r));
        }
        Ok(p)
    }

    fn implication(&mut self) -> PResult<Prop> {
        let p = self.disjunction()?;
        if self.eat_sym("=>") {
            let r = self.implication()?;
            return Ok(Prop::Implies(Box::new(p), Box::new(r)));
        }
        Ok(p)
    }

    fn disjunction(&mut self) -> PResult<Prop> {
        let mut ps = vec![self.conjunction()?];
        while self.eat_sym("\\/") {
            ps.push(self.conjunction()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Prop::Or(ps) })
    }

    fn conjunction(&mut self) -> PResult<Prop> {
        let mut ps = vec![self.unary()?];
        while self.eat_sym("/\\") {
            ps.push(self.unary()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Prop::And(ps) })
    }

    fn unary(&mut self) -> PResult<Prop> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Prop::Not(Box::new(self.unary()?)));
        }
        for (kw, exists) in [("forall", false), ("exists", true)] {
            if self.is_kw(kw) {
                self.bump();
                self.expect_sym("(")?;
                let x = self.ident()?;
                self.expect_sym(":")?;
                let s = self.sort()?;
                self.expect_sym(")")?;
                self.expect_sym(".")?;
                let body = Box::new(self.prop()?);
                return Ok(if exists { Prop::Exists(x, s, body) } else { Prop::Forall(x, s, body) });
            }
        }
        self.prop_atom()
    }

    fn cmp_op(&self) -> Option<Option<CmpOp>> {
        match self.peek() {
            Tok::Sym("=") | Tok::Sym("==") => Some(None),
            Tok::Sym("!=") => Some(Some(CmpOp::Ne)),
            Tok::Sym("<") => Some(Some(CmpOp::Lt)),
            Tok::Sym("<=") => Some(Some(CmpOp::Le)),
            Tok::Sym(">") => Some(Some(CmpOp::Gt)),
            Tok::Sym(">=") => Some(Some(CmpOp::Ge)),
            _ => None,
        }
    }

    fn comparison(&mut self, lhs: Term) -> PResult<Prop> {
        let op = self.cmp_op().expect("caller checked");
        self.bump();
        let rhs = self.term()?;
        Ok(match op {
            None => Prop::Eq(lhs, rhs),
            Some(op) => Prop::Cmp(op, lhs, rhs),
        })
    }

    fn prop_atom(&mut self) -> PResult<Prop> {
        if self.eat_sym("[") {
            let lhs = self.term()?;
            if self.cmp_op().is_none() {
                return self.err(format!("expected comparison, found {}", self.describe()));
            }
            let p = self.comparison(lhs)?;
            self.expect_sym("]")?;
            return Ok(p);
        }
        let start = self.pos;
        let starts_paren = self.is_sym("(");
        let as_term = self.term();
        if let Ok(t) = &as_term {
            if self.cmp_op().is_some() {
                return self.comparison(t.clone());
            }
        }
        if starts_paren {
            self.pos = start;
            self.bump();
            let p = self.prop()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        match as_term? {
            Term::App(f, args) => Ok(Prop::App(f, args)),
            Term::Bool(true) => Ok(Prop::True),
            Term::Bool(false) => Ok(Prop::False),
            _ => {
                self.pos = start;
                self.err(format!("expected proposition, found {}", self.describe()))
            }
        }
    }

    // ---- declarations ----

    fn ghosts(&mut self) -> PResult<Vec<(String, Sort)>> {
        let mut out = Vec::new();
        if !self.eat_sym("\\") {
            return Ok(out);
        }
        loop {
            self.expect_sym("(")?;
            let g = self.ident()?;
            self.expect_sym(":")?;
            let s = self.sort()?;
            self.expect_sym(")")?;
            out.push((g, s));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(".")?;
        Ok(out)
    }

    fn heap_binder(&mut self) -> PResult<String> {
        self.expect_sym("(")?;
        let h = self.ident()?;
        self.expect_sym(":")?;
        if self.sort()? != Sort::Heap {
            return self.err("heap binder must have sort heap");
        }
        self.expect_sym(")")?;
        Ok(h)
    }

    fn signature(&mut self, name: String, span: Span) -> PResult<ComponentSpec> {
        let mut params = Vec::new();
        while self.is_sym("(") {
            self.bump();
            let x = self.ident()?;
            self.expect_sym(":")?;
            let t = self.rtype()?;
            self.expect_sym(")")?;
            self.arrow()?;
            params.push((x, t));
        }
        self.expect_kw("State")?;
        self.expect_sym("{")?;
        self.expect_sym("\\")?;
        let pre_heap = self.heap_binder()?;
        self.expect_sym(".")?;
        let pre_ghosts = self.ghosts()?;
        let pre = self.prop()?;
        self.expect_sym("}")?;
        let result_var = self.ident()?;
        self.expect_sym(":")?;
        let result = self.rtype()?;
        self.expect_sym("{")?;
        self.expect_sym("\\")?;
        let post_pre_heap = self.heap_binder()?;
        self.expect_sym(",")?;
        self.expect_sym("(")?;
        let rv_span = self.span();
        let rv = self.ident()?;
        self.expect_sym(":")?;
        let rv_sort = self.sort()?;
        self.expect_sym(")")?;
        if rv != result_var || rv_sort != result.sort {
            return Err(SpecError::Syntax {
                span: rv_span,
                msg: format!("postcondition binder `{} : {}` must repeat the result `{} : {}`", rv, rv_sort, result_var, result.sort),
            });
        }
        self.expect_sym(",")?;
        let post_heap = self.heap_binder()?;
        self.expect_sym(".")?;
        let post_ghosts = self.ghosts()?;
        let post = self.prop()?;
        self.expect_sym("}")?;
        Ok(ComponentSpec {
            name,
            params,
            pre_heap,
            pre_ghosts,
            pre,
            result_var,
            result,
            post_pre_heap,
            post_heap,
            post_ghosts,
            post,
            span,
        })
    }

    fn qualifier(&mut self, span: Span) -> PResult<QualifierDecl> {
        let name = self.ident()?;
        self.expect_sym(":")?;
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if !self.eat_sym(")") {
            loop {
                args.push(self.sort()?);
                if self.eat_sym(")") {
                    break;
                }
                self.expect_sym(",")?;
            }
        }
        self.arrow()?;
        let result = self.sort()?;
        let interpreted = is_interpreted_name(&name);
        Ok(QualifierDecl { name, args, result, interpreted, span })
    }

    fn ctor_param(&mut self, index: usize) -> PResult<(String, RefinementType)> {
        let named = self.is_sym("(") && matches!(self.peek_at(2), Tok::Sym(":"));
        if named {
            self.bump();
            let x = self.ident()?;
            self.expect_sym(":")?;
            let t = self.rtype()?;
            self.expect_sym(")")?;
            Ok((x, t))
        } else {
            Ok((format!("p{}", index + 1), self.rtype()?))
        }
    }

    fn datatype(&mut self, span: Span) -> PResult<DatatypeDecl> {
        let name = self.ident()?;
        self.expect_sym("=")?;
        self.eat_sym("|");
        let mut ctors = Vec::new();
        loop {
            let cspan = self.span();
            let cname = self.ident()?;
            let mut params = Vec::new();
            if self.is_kw("of") {
                self.bump();
                params.push(self.ctor_param(0)?);
                while self.eat_sym("*") {
                    let i = params.len();
                    params.push(self.ctor_param(i)?);
                }
            }
            let refinement = if self.eat_sym("{") {
                let p = self.prop()?;
                self.expect_sym("}")?;
                p
            } else {
                Prop::True
            };
            ctors.push(CtorDecl { name: cname, params, refinement, span: cspan });
            if !self.eat_sym("|") {
                break;
            }
        }
        Ok(DatatypeDecl { name, ctors, span })
    }

    pub(crate) fn file(&mut self) -> PResult<SpecFile> {
        let mut f = SpecFile::default();
        while !self.at_eof() {
            let span = self.span();
            if self.is_kw("sort") {
                self.bump();
                let n = self.ident()?;
                f.sorts.push((n, span));
            } else if self.is_kw("qualifier") {
                self.bump();
                f.qualifiers.push(self.qualifier(span)?);
            } else if self.is_kw("type") {
                self.bump();
                f.datatypes.push(self.datatype(span)?);
            } else if self.is_kw("global") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym(":")?;
                let sort = self.sort()?;
                f.globals.push(GlobalDecl { name, sort, span });
            } else if self.is_kw("query") {
                self.bump();
                let name = self.ident()?;
                self.expect_sym(":")?;
                let q = self.signature(name, span)?;
                if f.query.is_some() {
                    return Err(SpecError::Invalid { msg: "more than one query declared".into(), span });
                }
                f.query = Some(q);
            } else {
                let name = self.ident()?;
                self.expect_sym(":")?;
                f.library.push(self.signature(name, span)?);
            }
            self.expect_sym(";")?;
        }
        Ok(f)
    }
}

pub(crate) fn parse_file(text: &str) -> PResult<SpecFile> {
    Parser::new(text)?.file()
}

pub fn parse_prop(text: &str) -> PResult<Prop> {
    let mut p = Parser::new(text)?;
    let r = p.prop()?;
    p.finish()?;
    Ok(r)
}

pub fn parse_term(text: &str) -> PResult<Term> {
    let mut p = Parser::new(text)?;
    let r = p.term()?;
    p.finish()?;
    Ok(r)
}

pub fn parse_sort(text: &str) -> PResult<Sort> {
    let mut p = Parser::new(text)?;
    let r = p.sort()?;
    p.finish()?;
    Ok(r)
}
