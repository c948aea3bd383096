//! Let-normal form: arguments of applications and constructors, match
//! scrutinees and comparison operands become variables. Calls in tail
//! position stay unbound.

use super::ast::*;
use std::collections::HashSet;

struct Fresh {
    used: HashSet<Name>,
    next: usize,
}

impl Fresh {
    fn new(used: HashSet<Name>) -> Fresh {
        Fresh { used, next: 0 }
    }

    fn name(&mut self, hint: &str) -> Name {
        loop {
            self.next += 1;
            let n = format!("{hint}{}", self.next);
            if self.used.insert(n.clone()) {
                return n;
            }
        }
    }
}

fn all_names(e: &Expr, out: &mut HashSet<Name>) {
    e.walk(&mut |e| match &e.kind {
        ExprKind::Var(x) | ExprKind::Let(x, ..) => {
            out.insert(x.clone());
        }
        ExprKind::Match(_, arms) => {
            for arm in arms {
                if let Pattern::Node(t, a, u) = &arm.pat {
                    out.extend([t.clone(), a.clone(), u.clone()]);
                }
            }
        }
        _ => {}
    });
}

/// Renames binders that shadow a name already in scope so that floating
/// lets outward can never capture a variable.
fn unshadow(e: &mut Expr, scope: &mut Vec<(Name, Name)>, fresh: &mut Fresh) {
    let lookup = |scope: &Vec<(Name, Name)>, x: &str| {
        scope.iter().rev().find(|(o, _)| o == x).map(|(_, n)| n.clone())
    };
    let bind = |scope: &mut Vec<(Name, Name)>, x: &mut Name, fresh: &mut Fresh| {
        let new = if scope.iter().any(|(_, n)| n == x) { fresh.name(&format!("{x}_")) } else { x.clone() };
        scope.push((x.clone(), new.clone()));
        *x = new;
    };
    match &mut e.kind {
        ExprKind::Var(x) => {
            if let Some(n) = lookup(scope, x) {
                *x = n;
            }
        }
        ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => {}
        ExprKind::Node(a, b, c) | ExprKind::If(a, b, c) => {
            unshadow(a, scope, fresh);
            unshadow(b, scope, fresh);
            unshadow(c, scope, fresh);
        }
        ExprKind::App(_, args) => args.iter_mut().for_each(|a| unshadow(a, scope, fresh)),
        ExprKind::Builtin(_, a) | ExprKind::Tick(_, a) => unshadow(a, scope, fresh),
        ExprKind::Cmp(_, a, b) => {
            unshadow(a, scope, fresh);
            unshadow(b, scope, fresh);
        }
        ExprKind::Let(x, e1, e2) => {
            unshadow(e1, scope, fresh);
            bind(scope, x, fresh);
            unshadow(e2, scope, fresh);
            scope.pop();
        }
        ExprKind::Match(s, arms) => {
            unshadow(s, scope, fresh);
            for arm in arms {
                let n = scope.len();
                if let Pattern::Node(t, a, u) = &mut arm.pat {
                    bind(scope, t, fresh);
                    bind(scope, a, fresh);
                    bind(scope, u, fresh);
                }
                unshadow(&mut arm.body, scope, fresh);
                scope.truncate(n);
            }
        }
    }
}

type Binds = Vec<(Name, Expr)>;

struct Norm {
    fresh: Fresh,
}

impl Norm {
    fn wrap(binds: Binds, body: Expr) -> Expr {
        binds.into_iter().rev().fold(body, |acc, (x, e1)| {
            let span = e1.span;
            Expr::new(ExprKind::Let(x, Box::new(e1), Box::new(acc)), span)
        })
    }

    /// Pushes `x = e` onto `binds`, lifting any leading lets of `e` first.
    fn bind(&mut self, x: Name, e: Expr, binds: &mut Binds) {
        let e = self.tail(e);
        Norm::push_peeled(x, e, binds);
    }

    fn push_peeled(x: Name, mut e: Expr, binds: &mut Binds) {
        loop {
            match e.kind {
                ExprKind::Let(y, e1, e2) => {
                    binds.push((y, *e1));
                    e = *e2;
                }
                kind => {
                    binds.push((x, Expr { kind, ..e }));
                    return;
                }
            }
        }
    }

    fn atom(&mut self, e: Expr, hint: &str, binds: &mut Binds) -> Expr {
        if e.as_var().is_some() {
            return e;
        }
        let (span, ty) = (e.span, e.ty);
        let e = self.tail(e);
        let x = self.fresh.name(hint);
        Norm::push_peeled(x.clone(), e, binds);
        Expr { ty, ..Expr::var(&x, span) }
    }

    /// Atomizes a list of arguments; a tree variable passed twice gets a
    /// fresh alias so every argument position is distinct.
    fn atoms(&mut self, args: Vec<Expr>, binds: &mut Binds) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::new();
        for a in args {
            let hint = if a.ty.is_some_and(|t| t.is_tree()) { "t" } else { "b" };
            let mut v = self.atom(a, hint, binds);
            let is_tree = v.ty.is_some_and(|t| t.is_tree());
            if is_tree && out.iter().any(|o| o.as_var() == v.as_var()) {
                let x = v.as_var().unwrap().to_string();
                let alias = self.fresh.name(&format!("{x}_"));
                binds.push((alias.clone(), v.clone()));
                v = Expr { ty: v.ty, ..Expr::var(&alias, v.span) };
            }
            out.push(v);
        }
        out
    }

    /// A non-let expression whose immediate operands are variables.
    fn simple(&mut self, e: Expr, binds: &mut Binds) -> Expr {
        let Expr { kind, span, ty, cues } = e;
        let kind = match kind {
            ExprKind::App(f, args) => ExprKind::App(f, self.atoms(args, binds)),
            ExprKind::Node(l, a, r) => {
                let mut v = self.atoms(vec![*l, *a, *r], binds).into_iter();
                let (l, a, r) = (v.next().unwrap(), v.next().unwrap(), v.next().unwrap());
                ExprKind::Node(Box::new(l), Box::new(a), Box::new(r))
            }
            ExprKind::Tick(q, inner) => match inner.kind {
                ExprKind::App(..) | ExprKind::Node(..) => {
                    ExprKind::Tick(q, Box::new(self.simple(*inner, binds)))
                }
                _ => ExprKind::Tick(q, Box::new(self.tail(*inner))),
            },
            ExprKind::Cmp(op, a, b) => {
                let a = self.operand(*a, binds);
                let b = self.operand(*b, binds);
                ExprKind::Cmp(op, Box::new(a), Box::new(b))
            }
            ExprKind::Builtin(m, a) => ExprKind::Builtin(m, Box::new(self.atom(*a, "t", binds))),
            other => return self.tail(Expr { kind: other, span, ty, cues }),
        };
        Expr { kind, span, ty, cues }
    }

    fn operand(&mut self, e: Expr, binds: &mut Binds) -> Expr {
        match e.kind {
            ExprKind::Builtin(..) => self.simple(e, binds),
            _ => self.atom(e, "b", binds),
        }
    }

    fn tail(&mut self, e: Expr) -> Expr {
        let Expr { kind, span, ty, cues } = e;
        let rebuild = |kind| Expr { kind, span, ty, cues: cues.clone() };
        match kind {
            ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => rebuild(kind),
            ExprKind::Let(x, e1, e2) => {
                let mut binds = Vec::new();
                self.bind(x, *e1, &mut binds);
                let body = self.tail(*e2);
                Norm::wrap(binds, body)
            }
            ExprKind::If(c, t, f) => {
                let mut binds = Vec::new();
                let c = match c.kind {
                    ExprKind::Cmp(..) | ExprKind::Var(_) | ExprKind::Bool(_) => self.simple(*c, &mut binds),
                    _ => self.atom(*c, "b", &mut binds),
                };
                let t = self.tail(*t);
                let f = self.tail(*f);
                Norm::wrap(binds, rebuild(ExprKind::If(Box::new(c), Box::new(t), Box::new(f))))
            }
            ExprKind::Match(s, arms) => {
                let mut binds = Vec::new();
                let s = self.atom(*s, "t", &mut binds);
                let arms = arms
                    .into_iter()
                    .map(|a| Arm { pat: a.pat, body: self.tail(a.body) })
                    .collect();
                Norm::wrap(binds, rebuild(ExprKind::Match(Box::new(s), arms)))
            }
            kind => {
                let mut binds = Vec::new();
                let e = self.simple(Expr { kind, span, ty, cues }, &mut binds);
                Norm::wrap(binds, e)
            }
        }
    }
}

pub fn normalize_fun(f: &mut FunDef) {
    let mut used: HashSet<Name> = f.params.iter().cloned().collect();
    all_names(&f.body, &mut used);
    let mut fresh = Fresh::new(used);
    let mut scope: Vec<(Name, Name)> = f.params.iter().map(|p| (p.clone(), p.clone())).collect();
    unshadow(&mut f.body, &mut scope, &mut fresh);
    let mut n = Norm { fresh };
    let body = std::mem::replace(&mut f.body, Expr::new(ExprKind::Leaf, f.span));
    f.body = n.tail(body);
}

pub fn normalize_program(p: &mut Program) {
    p.funs.iter_mut().for_each(normalize_fun);
}

/// Whether an expression is already in let-normal form.
pub fn is_normal(e: &Expr) -> bool {
    let var = |e: &Expr| e.as_var().is_some();
    let mut ok = true;
    e.walk(&mut |e| match &e.kind {
        ExprKind::App(_, args) => ok &= args.iter().all(var),
        ExprKind::Node(a, b, c) => ok &= var(a) && var(b) && var(c),
        ExprKind::Match(s, _) => ok &= var(s),
        ExprKind::Builtin(_, a) => ok &= var(a),
        ExprKind::Cmp(_, a, b) => {
            let op = |e: &Expr| var(e) || matches!(&e.kind, ExprKind::Builtin(..));
            ok &= op(a) && op(b)
        }
        _ => {}
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{infer_program, parse, print::print_expr};

    fn norm(src: &str) -> Program {
        let mut p = parse(src).unwrap();
        infer_program(&mut p).unwrap();
        normalize_program(&mut p);
        infer_program(&mut p).unwrap();
        p
    }

    #[test]
    fn meld_call_is_hoisted_out_of_tick() {
        let p = norm("bal t a u = node u a t\nmeld x y = match x with | leaf -> y | node t a u -> bal t a (~ meld (node t a u) y)");
        let s = print_expr(&p.funs[1].body);
        assert!(s.contains("let t1 = node t a u in"), "{s}");
        assert!(s.contains("let t2 = ~ meld t1 y in"), "{s}");
        assert!(s.contains("bal t a t2"), "{s}");
        assert!(is_normal(&p.funs[1].body));
    }

    #[test]
    fn duplicate_tree_arguments_get_aliases() {
        let p = norm("g x y = x\nf x = g x x");
        let s = print_expr(&p.funs[1].body);
        assert_eq!(s, "let x_1 = x in g x x_1");
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let p = norm("g x y = x\nf x = g (let x = leaf in x) x");
        assert!(is_normal(&p.funs[1].body));
        let fv = p.funs[1].body.free_vars();
        assert_eq!(fv, vec!["x".to_string()]);
    }

    #[test]
    fn tail_calls_stay_unbound() {
        let p = norm("f x = match x with | leaf -> leaf | node t a u -> ~ f u");
        let s = print_expr(&p.funs[0].body);
        assert!(s.ends_with("~ f u"), "{s}");
    }
}
