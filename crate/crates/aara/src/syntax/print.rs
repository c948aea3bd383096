//! Pretty printer producing source that parses back to the same AST.

use super::ast::*;
use crate::rat::fmt_rat;
use std::fmt::Write;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    /// let / if / match: extend as far right as possible.
    Open,
    Cmp,
    App,
    Atom,
}

fn prec(e: &Expr) -> Prec {
    match &e.kind {
        ExprKind::Let(..) | ExprKind::If(..) | ExprKind::Match(..) => Prec::Open,
        ExprKind::Cmp(..) => Prec::Cmp,
        ExprKind::App(..) | ExprKind::Node(..) | ExprKind::Builtin(..) | ExprKind::Tick(..) => {
            Prec::App
        }
        ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => Prec::Atom,
    }
}

fn at(out: &mut String, e: &Expr, min: Prec) {
    if prec(e) < min {
        out.push('(');
        go(out, e);
        out.push(')');
    } else {
        go(out, e);
    }
}

fn go(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Var(x) => out.push_str(x),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Leaf => out.push_str("leaf"),
        ExprKind::Error => out.push_str("error"),
        ExprKind::Node(a, b, c) => {
            out.push_str("node");
            for x in [a, b, c] {
                out.push(' ');
                at(out, x, Prec::Atom);
            }
        }
        ExprKind::App(f, args) => {
            out.push_str(f);
            for x in args {
                out.push(' ');
                at(out, x, Prec::Atom);
            }
        }
        ExprKind::Builtin(m, a) => {
            out.push_str(m.builtin_name());
            out.push(' ');
            at(out, a, Prec::Atom);
        }
        ExprKind::Tick(q, inner) => {
            if *q == crate::rat::one() {
                out.push_str("~ ");
            } else {
                let _ = write!(out, "~[{}] ", fmt_rat(q));
            }
            at(out, inner, Prec::App);
        }
        ExprKind::Cmp(op, a, b) => {
            at(out, a, Prec::App);
            let _ = write!(out, " {} ", op.symbol());
            at(out, b, Prec::App);
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if ");
            at(out, c, Prec::Cmp);
            out.push_str(" then ");
            at(out, t, Prec::Cmp);
            out.push_str(" else ");
            go(out, f);
        }
        ExprKind::Let(x, e1, e2) => {
            let _ = write!(out, "let {x} = ");
            at(out, e1, Prec::Cmp);
            out.push_str(" in ");
            go(out, e2);
        }
        ExprKind::Match(s, arms) => {
            out.push_str("match ");
            at(out, s, Prec::Cmp);
            out.push_str(" with");
            for (i, arm) in arms.iter().enumerate() {
                match &arm.pat {
                    Pattern::Leaf => out.push_str(" | leaf -> "),
                    Pattern::Node(t, a, u) => {
                        let _ = write!(out, " | node {t} {a} {u} -> ");
                    }
                }
                if i + 1 < arms.len() {
                    at(out, &arm.body, Prec::Cmp);
                } else {
                    go(out, &arm.body);
                }
            }
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    go(&mut out, e);
    out
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    if let Some(pot) = &p.potential {
        let _ = writeln!(out, "{{-# POTENTIAL ({}: {}) #-}}", pot.ty, pot.lang);
    }
    for f in &p.funs {
        match f.mode {
            Mode::Default => {}
            Mode::WorstCase => out.push_str("{-# MODE worst_case #-}\n"),
            Mode::Hybrid => out.push_str("{-# MODE hybrid #-}\n"),
        }
        if let Some(n) = f.num_cf_sigs {
            let _ = writeln!(out, "{{-# NUM_CF_SIGS {n} #-}}");
        }
        if let Some(sig) = &f.sig {
            let _ = writeln!(out, "{} :: {}", f.name, sig);
        }
        out.push_str(&f.name);
        for p in &f.params {
            out.push(' ');
            out.push_str(p);
        }
        out.push_str(" = ");
        go(&mut out, &f.body);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_expr};

    #[test]
    fn round_trips_nested_matches() {
        let src = "match x with | leaf -> (match y with | leaf -> leaf | node a b c -> a) | node t a u -> ~[1/2] f (g t) u";
        let e = parse_expr(src).unwrap();
        let printed = print_expr(&e);
        assert_eq!(parse_expr(&printed).unwrap(), e);
    }

    #[test]
    fn round_trips_programs() {
        let src = "{-# POTENTIAL (Tree Base: logr) #-}\n{-# MODE hybrid #-}\nbal :: (Tree Base @rank * Base * Tree Base @rank) -> Tree Base @rank\nbal t a u = if rank t <= rank u then node u a t else node t a u\n";
        let p = parse(src).unwrap();
        assert_eq!(print_program(&p), src);
    }
}
