use super::{Expr, Literal};

fn pad(n: usize) -> String {
    " ".repeat(n)
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(n) => n.to_string(),
        Literal::Bool(b) => b.to_string(),
        Literal::Unit => "()".into(),
        Literal::Float(r) => r.clone(),
        Literal::Str(s) => format!("\"{}\"", s),
    }
}

fn args(xs: &[Expr]) -> String {
    let parts: Vec<String> = xs.iter().map(atom).collect();
    format!("({})", parts.join(", "))
}

fn atom(e: &Expr) -> String {
    match e {
        Expr::Var(x) => x.clone(),
        Expr::Const(l) => literal(l),
        Expr::Loc(n) => format!("@{}", n),
        Expr::ConsApp(c, xs) if xs.is_empty() => c.clone(),
        Expr::ConsApp(c, xs) | Expr::Call(c, xs) => format!("{} {}", c, args(xs)),
        Expr::Ref(init) => format!("ref ({})", block(init, 0)),
        Expr::Hole(_, t) => format!("(?? : {})", t),
        Expr::Skip => "skip".into(),
        other => format!("({})", block(other, 0)),
    }
}

fn simple(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Var(_)
            | Expr::Const(_)
            | Expr::Loc(_)
            | Expr::ConsApp(..)
            | Expr::Call(..)
            | Expr::Ref(_)
            | Expr::Hole(..)
            | Expr::Skip
            | Expr::Return(_)
    )
}

fn block(e: &Expr, ind: usize) -> String {
    match e {
        Expr::Seq(x, a, b) => {
            let first = if simple(a) { block(a, ind) } else { format!("({})", block(a, ind + 2)) };
            format!("{} ← {};\n{}{}", x, first, pad(ind), block(b, ind))
        }
        Expr::If(c, t, f) => format!(
            "if ({})\n{}then {}\n{}else {}",
            atom(c),
            pad(ind + 2),
            block(t, ind + 4),
            pad(ind + 2),
            block(f, ind + 4)
        ),
        Expr::Match(s, bs) => {
            let mut out = format!("match {} with", atom(s));
            for b in bs {
                let binders = if b.binders.is_empty() { String::new() } else { format!(" ({})", b.binders.join(", ")) };
                out.push_str(&format!("\n{}| {}{} -> {}", pad(ind + 2), b.ctor, binders, block(&b.body, ind + 4)));
            }
            out.push_str(&format!("\n{}end", pad(ind)));
            out
        }
        Expr::Lambda(ps, b) => {
            let params: Vec<String> = ps.iter().map(|(x, s)| format!("({} : {})", x, s)).collect();
            format!("fun {} -> {}", params.join(" "), block(b, ind))
        }
        Expr::Return(v) => format!("return {}", atom(v)),
        other => atom(other),
    }
}

/// Concrete syntax in the style `b1 ← mem_tbl (tbl, s); if (b1) then ... else ...`.
pub fn pretty_print(e: &Expr) -> String {
    block(e, 0)
}
