//! Just enough s-expression reading for solver replies.

use crate::rat::Rat;
use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

pub fn parse_all(src: &str) -> Result<Vec<Sexp>, String> {
    let toks = tokenize(src);
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < toks.len() {
        out.push(parse_at(&toks, &mut pos)?);
    }
    Ok(out)
}

fn tokenize(src: &str) -> Vec<String> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            '|' => {
                cur.push(c);
                for d in chars.by_ref() {
                    cur.push(d);
                    if d == '|' {
                        break;
                    }
                }
            }
            '"' => {
                cur.push(c);
                for d in chars.by_ref() {
                    cur.push(d);
                    if d == '"' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    toks
}

fn parse_at(toks: &[String], pos: &mut usize) -> Result<Sexp, String> {
    let t = toks.get(*pos).ok_or("unexpected end of input")?;
    *pos += 1;
    match t.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos).map(String::as_str) {
                    None => return Err("unbalanced parentheses".into()),
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_at(toks, pos)?),
                }
            }
        }
        ")" => Err("unexpected )".into()),
        s => Ok(Sexp::Atom(s.to_string())),
    }
}

/// A numeral like `3`, `3.0` or `2.50`. Inexact forms are refused.
fn numeral(s: &str) -> Result<Rat, String> {
    if s.ends_with('?') {
        return Err(format!("approximate value {s}"));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if !frac.chars().all(|c| c == '0') {
        return Err(format!("decimal value {s}; exact rationals expected"));
    }
    let n: BigInt = int.parse().map_err(|_| format!("not a numeral: {s}"))?;
    Ok(Rat::from_integer(n))
}

/// Reads `n`, `(- e)`, `(/ a b)` and nests of those.
pub fn to_rat(e: &Sexp) -> Result<Rat, String> {
    match e {
        Sexp::Atom(s) => numeral(s),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(op), a] if op == "-" => Ok(-to_rat(a)?),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let d = to_rat(b)?;
                if d.is_zero() {
                    return Err("division by zero".into());
                }
                Ok(to_rat(a)? / d)
            }
            [Sexp::Atom(op), rest @ ..] if op == "+" => rest.iter().try_fold(Rat::zero(), |acc, x| Ok(acc + to_rat(x)?)),
            [Sexp::Atom(op), rest @ ..] if op == "*" => rest.iter().try_fold(Rat::one(), |acc, x| Ok(acc * to_rat(x)?)),
            _ => Err(format!("unsupported value {e:?}")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn reads_z3_values() {
        let v = parse_all("((x 0.0) (y (/ 1.0 2.0)) (z (- (/ 105.0 163.0))) (|w'1| (- 3.0)))").unwrap();
        let Sexp::List(pairs) = &v[0] else { panic!() };
        let got: Vec<Rat> = pairs
            .iter()
            .map(|p| match p {
                Sexp::List(xs) => to_rat(&xs[1]).unwrap(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(got, vec![rat(0, 1), rat(1, 2), rat(-105, 163), rat(-3, 1)]);
    }

    #[test]
    fn refuses_decimals() {
        assert!(to_rat(&Sexp::Atom("0.3333".into())).is_err());
        assert!(to_rat(&Sexp::Atom("0.5?".into())).is_err());
    }
}
