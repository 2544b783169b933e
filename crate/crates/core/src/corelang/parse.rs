use super::{Branch, Expr, Literal, TypeExpr};
use crate::speclang::lexer::Tok;
use crate::speclang::parser::Parser;
use crate::speclang::SpecError;

const KEYWORDS: &[&str] = &["if", "then", "else", "match", "with", "end", "fun", "return", "skip", "ref"];

struct ProgParser {
    p: Parser,
    holes: usize,
}

type PResult<T> = Result<T, SpecError>;

fn capitalized(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_uppercase())
}

impl ProgParser {
    fn kw(&self, k: &str) -> bool {
        self.p.is_kw(k)
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        self.p.expect_kw(k)
    }

    fn name(&mut self) -> PResult<String> {
        if let Tok::Ident(s) = self.p.peek() {
            if KEYWORDS.contains(&s.as_str()) {
                return self.p.err(format!("unexpected keyword `{}`", s));
            }
        }
        self.p.ident()
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.kw("if") {
            self.p.bump();
            self.p.expect_sym("(")?;
            let c = self.atom()?;
            self.p.expect_sym(")")?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Expr::ite(c, t, e));
        }
        if self.kw("match") {
            self.p.bump();
            let s = self.atom()?;
            self.expect_kw("with")?;
            let mut bs = Vec::new();
            while self.p.eat_sym("|") {
                let ctor = self.name()?;
                let mut binders = Vec::new();
                if self.p.eat_sym("(") {
                    loop {
                        binders.push(self.name()?);
                        if self.p.eat_sym(")") {
                            break;
                        }
                        self.p.expect_sym(",")?;
                    }
                }
                self.p.arrow()?;
                let body = self.expr()?;
                bs.push(Branch { ctor, binders, body });
            }
            self.expect_kw("end")?;
            return Ok(Expr::Match(Box::new(s), bs));
        }
        if self.kw("fun") {
            self.p.bump();
            let mut ps = Vec::new();
            while self.p.eat_sym("(") {
                let x = self.name()?;
                self.p.expect_sym(":")?;
                let s = self.p.sort()?;
                self.p.expect_sym(")")?;
                ps.push((x, s));
            }
            self.p.arrow()?;
            let body = self.expr()?;
            return Ok(Expr::Lambda(ps, Box::new(body)));
        }
        let is_seq = matches!(self.p.peek(), Tok::Ident(_)) && matches!(self.p.peek_at(1), Tok::Sym("←"));
        if is_seq {
            let x = self.name()?;
            self.p.bump();
            let first = self.first()?;
            self.p.expect_sym(";")?;
            let rest = self.expr()?;
            return Ok(Expr::seq(&x, first, rest));
        }
        self.first()
    }

    fn first(&mut self) -> PResult<Expr> {
        if self.kw("return") {
            self.p.bump();
            return Ok(Expr::ret(self.atom()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.p.peek().clone() {
            Tok::Int(n) => {
                self.p.bump();
                Ok(Expr::Const(Literal::Int(n)))
            }
            Tok::Sym("-") => {
                self.p.bump();
                match self.p.bump() {
                    Tok::Int(n) => Ok(Expr::Const(Literal::Int(-n))),
                    Tok::Real(r) => Ok(Expr::Const(Literal::Float(format!("-{}", r)))),
                    _ => self.p.err("expected number after `-`"),
                }
            }
            Tok::Real(r) => {
                self.p.bump();
                Ok(Expr::Const(Literal::Float(r)))
            }
            Tok::Str(s) => {
                self.p.bump();
                Ok(Expr::Const(Literal::Str(s)))
            }
            Tok::Sym("@") => {
                self.p.bump();
                match self.p.bump() {
                    Tok::Int(n) if n >= 0 => Ok(Expr::Loc(n as usize)),
                    _ => self.p.err("expected location number after `@`"),
                }
            }
            Tok::Sym("(") => {
                self.p.bump();
                if self.p.eat_sym(")") {
                    return Ok(Expr::Const(Literal::Unit));
                }
                if self.p.eat_sym("??") {
                    self.p.expect_sym(":")?;
                    let t = self.p.rtype()?;
                    self.p.expect_sym(")")?;
                    self.holes += 1;
                    return Ok(Expr::Hole(self.holes, TypeExpr::Refinement { sort: t.sort, var: t.var, prop: t.prop }));
                }
                let e = self.expr()?;
                self.p.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.p.bump();
                Ok(Expr::Const(Literal::Bool(s == "true")))
            }
            Tok::Ident(s) if s == "skip" => {
                self.p.bump();
                Ok(Expr::Skip)
            }
            Tok::Ident(s) if s == "ref" => {
                self.p.bump();
                self.p.expect_sym("(")?;
                let e = self.expr()?;
                self.p.expect_sym(")")?;
                Ok(Expr::Ref(Box::new(e)))
            }
            Tok::Ident(_) => {
                let f = self.name()?;
                if self.p.eat_sym("(") {
                    let mut xs = Vec::new();
                    if !self.p.eat_sym(")") {
                        loop {
                            xs.push(self.atom()?);
                            if self.p.eat_sym(")") {
                                break;
                            }
                            self.p.expect_sym(",")?;
                        }
                    }
                    Ok(if capitalized(&f) { Expr::ConsApp(f, xs) } else { Expr::Call(f, xs) })
                } else if capitalized(&f) {
                    Ok(Expr::ConsApp(f, vec![]))
                } else {
                    Ok(Expr::Var(f))
                }
            }
            _ => self.p.err(format!("expected expression, found {}", self.p.describe())),
        }
    }
}

/// Parse program text as printed by `pretty_print`. Holes are numbered
/// from 1 in textual order.
pub fn parse_program(text: &str) -> Result<Expr, SpecError> {
    let mut pp = ProgParser { p: Parser::new(text)?, holes: 0 };
    let e = pp.expr()?;
    pp.p.finish()?;
    Ok(e)
}
