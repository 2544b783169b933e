use super::{Span, SpecError};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(String),
    Str(String),
    /// Punctuation and operators, spelled as in the source.
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest first so that `<=>` wins over `<=` and `/\` over `/`.
const SYMBOLS: &[&str] = &[
    "<=>", "??", "←", "/\\", "\\/", "=>", "==", "!=", "<=", ">=", "->", "→", "(", ")", "{", "}", "[", "]", ",", ":", ";",
    ".", "|", "@", "\\", "=", "<", ">", "+", "-", "*",
];

pub fn lex(src: &str) -> Result<Vec<Token>, SpecError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let bump = |i: &mut usize, line: &mut usize, col: &mut usize, chars: &[char]| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col, &chars);
            continue;
        }
        let span = Span { line, col };
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(SpecError::Syntax { span, msg: "unterminated comment".into() });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    bump(&mut i, &mut line, &mut col, &chars);
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    bump(&mut i, &mut line, &mut col, &chars);
                    if depth == 0 {
                        bump(&mut i, &mut line, &mut col, &chars);
                        break;
                    }
                }
                bump(&mut i, &mut line, &mut col, &chars);
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                bump(&mut i, &mut line, &mut col, &chars);
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump(&mut i, &mut line, &mut col, &chars);
            }
            let is_real = i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
            if is_real {
                bump(&mut i, &mut line, &mut col, &chars);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump(&mut i, &mut line, &mut col, &chars);
                }
                out.push(Token { tok: Tok::Real(chars[start..i].iter().collect()), span });
            } else {
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| SpecError::Syntax { span, msg: format!("integer literal out of range: {}", text) })?;
                out.push(Token { tok: Tok::Int(n), span });
            }
            continue;
        }
        if c == '"' {
            bump(&mut i, &mut line, &mut col, &chars);
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(SpecError::Syntax { span, msg: "unterminated string literal".into() });
                }
                bump(&mut i, &mut line, &mut col, &chars);
            }
            if i >= chars.len() {
                return Err(SpecError::Syntax { span, msg: "unterminated string literal".into() });
            }
            let s: String = chars[start..i].iter().collect();
            bump(&mut i, &mut line, &mut col, &chars);
            out.push(Token { tok: Tok::Str(s), span });
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                for _ in 0..s.chars().count() {
                    bump(&mut i, &mut line, &mut col, &chars);
                }
                out.push(Token { tok: Tok::Sym(s), span });
            }
            None => return Err(SpecError::Syntax { span, msg: format!("unexpected character `{}`", c) }),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_primes() {
        assert_eq!(
            toks("sel (h', tbl) /\\ a <=> b"),
            vec![
                Tok::Ident("sel".into()),
                Tok::Sym("("),
                Tok::Ident("h'".into()),
                Tok::Sym(","),
                Tok::Ident("tbl".into()),
                Tok::Sym(")"),
                Tok::Sym("/\\"),
                Tok::Ident("a".into()),
                Tok::Sym("<=>"),
                Tok::Ident("b".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn nested_comments_are_skipped() {
        assert_eq!(toks("(* a (* b *) c *) x"), vec![Tok::Ident("x".into()), Tok::Eof]);
    }

    #[test]
    fn positions_track_lines() {
        let t = lex("a\n  b").unwrap();
        assert_eq!((t[1].span.line, t[1].span.col), (2, 3));
    }

    #[test]
    fn literals() {
        assert_eq!(toks("3 2.5 \"ab\""), vec![Tok::Int(3), Tok::Real("2.5".into()), Tok::Str("ab".into()), Tok::Eof]);
    }
}
