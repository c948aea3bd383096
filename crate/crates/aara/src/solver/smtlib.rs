//! SMT-LIB 2 emission.

use crate::constraints::{Atom, Constraint, ConstraintSet, LinExpr, Rel, VarPool};
use crate::rat::Rat;
use num_traits::{One, Signed, Zero};
use std::fmt::Write;

/// What the script asks for after `check-sat`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    /// Optimize and print every variable's value.
    Values,
    /// No objectives; print the unsat core.
    Core,
}

pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

pub fn label(i: usize) -> String {
    format!("a{i}")
}

fn nat(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}.0", r.numer())
    } else {
        format!("(/ {}.0 {}.0)", r.numer(), r.denom())
    }
}

pub fn number(r: &Rat) -> String {
    if r.is_negative() {
        format!("(- {})", nat(&-r))
    } else {
        nat(r)
    }
}

pub fn linexpr(e: &LinExpr, pool: &VarPool) -> String {
    let mut parts: Vec<String> = e
        .terms
        .iter()
        .map(|(v, c)| {
            let s = symbol(pool.name(*v));
            if c.is_one() {
                s
            } else {
                format!("(* {} {s})", number(c))
            }
        })
        .collect();
    if !e.constant.is_zero() || parts.is_empty() {
        parts.push(number(&e.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn atom(a: &Atom, pool: &VarPool) -> String {
    let op = match a.rel {
        Rel::Eq => "=",
        Rel::Le => "<=",
        Rel::Ge => ">=",
    };
    format!("({op} {} 0.0)", linexpr(&a.expr, pool))
}

pub fn constraint(c: &Constraint, pool: &VarPool) -> String {
    match c {
        Constraint::Atom(a) => atom(a, pool),
        Constraint::Implies(p, q) => format!("(=> {} {})", atom(p, pool), atom(q, pool)),
        Constraint::Or(xs) => {
            let parts: Vec<String> = xs.iter().map(|a| atom(a, pool)).collect();
            format!("(or {})", parts.join(" "))
        }
    }
}

/// The full script. Objectives are minimized lexicographically.
pub fn emit(cs: &ConstraintSet, objectives: &[LinExpr], query: Query) -> String {
    let mut out = String::new();
    out.push_str("(set-option :pp.decimal false)\n");
    if query == Query::Core {
        out.push_str("(set-option :produce-unsat-cores true)\n");
        out.push_str("(set-option :smt.core.minimize true)\n");
    }
    out.push_str("(set-logic QF_LRA)\n");
    for v in cs.pool.ids() {
        let _ = writeln!(out, "(declare-fun {} () Real)", symbol(cs.pool.name(v)));
    }
    for (i, (c, p)) in cs.items.iter().enumerate() {
        let _ = writeln!(out, "; node {} {} {}", p.node, p.rule, p.tag.replace('\n', " "));
        let _ = writeln!(out, "(assert (! {} :named {}))", constraint(c, &cs.pool), label(i));
    }
    match query {
        Query::Values => {
            for o in objectives {
                let _ = writeln!(out, "(minimize {})", linexpr(o, &cs.pool));
            }
            out.push_str("(check-sat)\n");
            let names: Vec<String> = cs.pool.ids().map(|v| symbol(cs.pool.name(v))).collect();
            if !names.is_empty() {
                let _ = writeln!(out, "(get-value ({}))", names.join(" "));
            }
        }
        Query::Core => {
            out.push_str("(check-sat)\n(get-unsat-core)\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Provenance, VarKind};
    use crate::rat::rat;

    #[test]
    fn numbers_are_exact() {
        assert_eq!(number(&rat(-105, 163)), "(- (/ 105.0 163.0))");
        assert_eq!(number(&rat(3, 1)), "3.0");
    }

    #[test]
    fn quotes_odd_symbols() {
        assert_eq!(symbol("q12_3"), "q12_3");
        assert_eq!(symbol("t'1"), "|t'1|");
        assert_eq!(symbol("3x"), "|3x|");
    }

    #[test]
    fn toy_script() {
        let mut cs = ConstraintSet::new();
        let q = cs.fresh("q".into(), VarKind::Coeff, 0);
        cs.eq(LinExpr::var(q), &LinExpr::constant(rat(1, 2)), Provenance::new(0, "T", "half"));
        let s = emit(&cs, &[LinExpr::var(q)], Query::Values);
        assert!(s.contains("(declare-fun q () Real)"));
        assert!(s.contains("(assert (! (= (+ q (- (/ 1.0 2.0))) 0.0) :named a0))"));
        assert!(s.contains("(minimize q)"));
    }
}
