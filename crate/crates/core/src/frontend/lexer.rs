//! Tokeniser. Unicode aliases are folded into their ASCII forms here.

use super::{ParseError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Str(String),
    /// `#clocks`, `#include`.
    Directive(String),
    /// A `-- needs-reflection` comment.
    NeedsReflection,
    Backslash,
    Dot,
    Comma,
    Semi,
    Colon,
    Define,
    Arrow,
    LArrow,
    FatArrow,
    Star,
    CStar,
    Plus,
    Ap,
    At,
    EqEq,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn ident_start(c: char) -> bool {
    c == '_' || (c.is_alphabetic() && c != 'λ' && c != 'Λ')
}

fn ident_char(c: char) -> bool {
    ident_start(c) || c.is_ascii_digit() || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    macro_rules! adv {
        ($n:expr) => {
            for _ in 0..$n {
                if chars[i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let at = |s: &str| {
            chars[i..]
                .iter()
                .take(s.chars().count())
                .copied()
                .eq(s.chars())
        };
        if c.is_whitespace() {
            adv!(1);
            continue;
        }
        if at("--") {
            let start = i + 2;
            let mut end = start;
            while end < chars.len() && chars[end] != '\n' {
                end += 1;
            }
            let text: String = chars[start..end].iter().collect();
            if text.trim() == "needs-reflection" {
                toks.push(Token {
                    tok: Tok::NeedsReflection,
                    pos,
                });
            }
            adv!(end - i);
            continue;
        }
        let (tok, len) = if c == '#' {
            let mut end = i + 1;
            while end < chars.len() && chars[end].is_ascii_alphabetic() {
                end += 1;
            }
            let d: String = chars[i + 1..end].iter().collect();
            if d.is_empty() {
                return Err(ParseError::new(pos, "expected a directive after `#`"));
            }
            (Tok::Directive(d), end - i)
        } else if c == '"' {
            let mut end = i + 1;
            while end < chars.len() && chars[end] != '"' && chars[end] != '\n' {
                end += 1;
            }
            if end >= chars.len() || chars[end] != '"' {
                return Err(ParseError::new(pos, "unterminated string"));
            }
            (Tok::Str(chars[i + 1..end].iter().collect()), end + 1 - i)
        } else if c.is_ascii_digit() {
            let mut end = i;
            while end < chars.len() && chars[end].is_ascii_digit() {
                end += 1;
            }
            let s: String = chars[i..end].iter().collect();
            let n = s
                .parse()
                .map_err(|_| ParseError::new(pos, "numeral out of range"))?;
            (Tok::Num(n), end - i)
        } else if c == 'c' && chars.get(i + 1) == Some(&'*') {
            (Tok::CStar, 2)
        } else if ident_start(c) {
            let mut end = i;
            while end < chars.len() && ident_char(chars[end]) {
                end += 1;
            }
            (Tok::Ident(chars[i..end].iter().collect()), end - i)
        } else if at(":=") {
            (Tok::Define, 2)
        } else if at("->") {
            (Tok::Arrow, 2)
        } else if at("<-") {
            (Tok::LArrow, 2)
        } else if at("=>") {
            (Tok::FatArrow, 2)
        } else if at("<*>") {
            (Tok::Ap, 3)
        } else if at("==") {
            (Tok::EqEq, 2)
        } else {
            let t = match c {
                '\\' | 'λ' => Tok::Backslash,
                'Λ' => Tok::Ident("clam".into()),
                '∀' => Tok::Ident("forall".into()),
                '▶' => Tok::Ident("Later".into()),
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                ':' => Tok::Colon,
                '→' => Tok::Arrow,
                '←' => Tok::LArrow,
                '⇒' => Tok::FatArrow,
                '*' | '×' => Tok::Star,
                '+' => Tok::Plus,
                '⊛' => Tok::Ap,
                '@' => Tok::At,
                '≡' => Tok::EqEq,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                _ => return Err(ParseError::new(pos, format!("unexpected character `{c}`"))),
            };
            (t, 1)
        };
        toks.push(Token { tok, pos });
        adv!(len);
    }
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn unicode_aliases_fold() {
        assert_eq!(kinds("λx. x"), kinds("\\x. x"));
        assert_eq!(kinds("∀k. ▶[k] A → B"), kinds("forall k. Later[k] A -> B"));
        assert_eq!(kinds("f ⊛[k] t"), kinds("f <*>[k] t"));
    }

    #[test]
    fn code_product_and_comments() {
        assert_eq!(
            kinds("a c* b -- note\n-- needs-reflection\n"),
            vec![
                Tok::Ident("a".into()),
                Tok::CStar,
                Tok::Ident("b".into()),
                Tok::NeedsReflection
            ]
        );
        assert_eq!(kinds("cons")[0], Tok::Ident("cons".into()));
    }

    #[test]
    fn positions_track_lines() {
        let t = lex("a\n  b").unwrap();
        assert_eq!((t[1].pos.line, t[1].pos.col), (2, 3));
    }
}
