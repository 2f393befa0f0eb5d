use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Meta(u32),
    Fun,
    TFun,
    Callcc,
    Shift,
    Reset,
    Throw,
    Forall,
    Cont,
    Not,
    LParen,
    RParen,
    LBrack,
    RBrack,
    /// `^[`, opening a reified context.
    CtxOpen,
    LBrace,
    RBrace,
    Arrow,
    Colon,
    Comma,
    Dot,
    Semi,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(x) => return write!(f, "identifier `{x}`"),
            Tok::Meta(n) => return write!(f, "`?{n}`"),
            Tok::Fun => "`fun`",
            Tok::TFun => "`tfun`",
            Tok::Callcc => "`callcc`",
            Tok::Shift => "`shift`",
            Tok::Reset => "`reset`",
            Tok::Throw => "`throw`",
            Tok::Forall => "`forall`",
            Tok::Cont => "`cont`",
            Tok::Not => "`not`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::CtxOpen => "`^[`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Arrow => "`->`",
            Tok::Colon => "`:`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Semi => "`;`",
            Tok::At => "`@`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn is_keyword(s: &str) -> bool {
    keyword(s).is_some()
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "fun" => Tok::Fun,
        "tfun" => Tok::TFun,
        "callcc" => Tok::Callcc,
        "shift" => Tok::Shift,
        "reset" => Tok::Reset,
        "throw" => Tok::Throw,
        "forall" => Tok::Forall,
        "cont" => Tok::Cont,
        "not" => Tok::Not,
        _ => return None,
    })
}

/// Tokenize `src`. Line and column numbers are 1-based and offset by
/// `first_line - 1` so that errors point into the enclosing file.
pub fn lex(src: &str, first_line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, first_line, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '^' if chars.get(i + 1) == Some(&'[') => push(Tok::CtxOpen, 2, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBrack, 1, &mut i, &mut col),
            ']' => push(Tok::RBrack, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '?' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[start..j].iter().collect();
                let n = digits
                    .parse::<u32>()
                    .map_err(|_| ParseError::new(tl, tc, "expected a number after `?`"))?;
                push(Tok::Meta(n), j - i, &mut i, &mut col);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = keyword(&word).unwrap_or(Tok::Ident(word));
                push(tok, j - i, &mut i, &mut col);
            }
            other => return Err(ParseError::new(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, 1).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("fun (x':a) -> x -- comment\n ^[ ?3"),
            vec![
                Tok::Fun,
                Tok::LParen,
                Tok::Ident("x'".into()),
                Tok::Colon,
                Tok::Ident("a".into()),
                Tok::RParen,
                Tok::Arrow,
                Tok::Ident("x".into()),
                Tok::CtxOpen,
                Tok::Meta(3),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let ts = lex("a\n  b", 1).unwrap();
        assert_eq!((ts[1].line, ts[1].col), (2, 3));
    }

    #[test]
    fn bad_char() {
        let e = lex("a $", 1).unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
    }
}
