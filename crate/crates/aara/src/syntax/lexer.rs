//! Tokenizer with line/column tracking; `(* ... *)` comments nest.

use super::ast::Span;
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    /// Raw text between `{-#` and `#-}`.
    Pragma(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "::", "->", "<=", ">=", "=", "<", ">", "(", ")", "*", "|", "~", "[", "]", ",", ":", "@", "/",
    "-",
];

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    let starts = |i: usize, s: &str| -> bool {
        let s: Vec<char> = s.chars().collect();
        i + s.len() <= chars.len() && chars[i..i + s.len()] == s[..]
    };

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if starts(i, "(*") {
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(SyntaxError::new(span, "unterminated comment"));
                }
                if starts(i, "(*") {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col, 2);
                } else if starts(i, "*)") {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col, 2);
                    if depth == 0 {
                        break;
                    }
                } else {
                    advance(&mut i, &mut line, &mut col, 1);
                }
            }
        } else if starts(i, "--") {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if starts(i, "{-#") {
            advance(&mut i, &mut line, &mut col, 3);
            let begin = i;
            while i < chars.len() && !starts(i, "#-}") {
                advance(&mut i, &mut line, &mut col, 1);
            }
            if i >= chars.len() {
                return Err(SyntaxError::new(span, "unterminated pragma"));
            }
            let body: String = chars[begin..i].iter().collect();
            advance(&mut i, &mut line, &mut col, 3);
            toks.push(Token { tok: Tok::Pragma(body.trim().to_string()), span });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                advance(&mut i, &mut line, &mut col, 1);
            }
            toks.push(Token { tok: Tok::Ident(chars[begin..i].iter().collect()), span });
        } else if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            toks.push(Token { tok: Tok::Number(chars[begin..i].iter().collect()), span });
        } else if let Some(sym) = SYMBOLS.iter().find(|s| starts(i, s)) {
            advance(&mut i, &mut line, &mut col, sym.len());
            toks.push(Token { tok: Tok::Sym(sym), span });
        } else {
            return Err(SyntaxError::new(span, format!("unexpected character '{c}'")));
        }
    }
    toks.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_positions_and_skips_nested_comments() {
        let toks = lex("(* a (* b *) *)\nf x = ~ x").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("f".into()));
        assert_eq!(toks[0].span, Span { line: 2, col: 1 });
        assert_eq!(toks[3].tok, Tok::Sym("~"));
    }

    #[test]
    fn reads_pragmas_verbatim() {
        let toks = lex("{-# MODE worst_case #-}").unwrap();
        assert_eq!(toks[0].tok, Tok::Pragma("MODE worst_case".into()));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = lex("f x = $").unwrap_err();
        assert_eq!(err.span, Span { line: 1, col: 7 });
    }
}
