use super::{Loc, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) enum Tok {
    Ident(String),
    Int(i64),
    Newline,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Assign,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Question,
    AndAnd,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(k) => format!("`{k}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Question => "?",
            Tok::AndAnd => "&&",
            _ => "",
        }
    }
}

pub(super) fn tokenize(src: &str) -> Result<Vec<(Tok, Loc)>, ParseError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        let loc = |i: usize| Loc {
            line: ln + 1,
            col: i + 1,
        };
        while i < chars.len() {
            let c = chars[i];
            let start = i;
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Ident(s), loc(start)));
                continue;
            }
            if c.is_ascii_digit() {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let k = s.parse::<i64>().map_err(|_| ParseError::Lexical {
                    loc: loc(start),
                    msg: format!("integer literal `{s}` out of range"),
                })?;
                out.push((Tok::Int(k), loc(start)));
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('&', Some('&')) => (Tok::AndAnd, 2),
                ('≤', _) => (Tok::Le, 1),
                ('≥', _) => (Tok::Ge, 1),
                ('≠', _) => (Tok::Ne, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                (';', _) => (Tok::Semi, 1),
                (':', _) => (Tok::Colon, 1),
                ('=', _) => (Tok::Assign, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('?', _) => (Tok::Question, 1),
                _ => {
                    return Err(ParseError::Lexical {
                        loc: loc(start),
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push((tok, loc(start)));
            i += len;
        }
        out.push((Tok::Newline, loc(chars.len())));
    }
    let end = Loc {
        line: src.lines().count() + 1,
        col: 1,
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_comments() {
        let toks: Vec<Tok> = tokenize("x = A[i] # read\nif (x <= 3) a b")
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(toks[1], Tok::Assign);
        assert_eq!(toks[6], Tok::Newline);
        assert!(toks.contains(&Tok::Le));
        assert_eq!(toks.last(), Some(&Tok::Eof));
    }

    #[test]
    fn bad_character_has_location() {
        let e = tokenize("x = 1\n  y = $").unwrap_err();
        assert_eq!(e.loc(), Loc { line: 2, col: 7 });
        assert_eq!(e.category(), "lexical");
    }
}
