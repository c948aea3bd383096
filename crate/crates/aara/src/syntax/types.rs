//! Plain type inference: first-order unification over Bool, Base and
//! (optionally refined) trees. Refinements come from signatures only;
//! a tree whose refinement is never pinned down is unrefined.

use super::ast::*;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, thiserror::Error)]
#[error("{span}: type error: {msg}")]
pub struct TypeError {
    pub span: Span,
    pub msg: String,
}

fn terr<T>(span: Span, msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError { span, msg: msg.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Var(usize),
    Bool,
    Base,
    Tree(usize),
}

#[derive(Clone, Copy, Debug)]
enum RefCell_ {
    Link(usize),
    Known(Option<Refinement>),
    Free,
}

#[derive(Default)]
struct Unifier {
    vars: Vec<Option<Ty>>,
    refs: Vec<RefCell_>,
}

impl Unifier {
    fn fresh(&mut self) -> Ty {
        self.vars.push(None);
        Ty::Var(self.vars.len() - 1)
    }

    fn fresh_ref(&mut self, known: Option<Option<Refinement>>) -> usize {
        self.refs.push(match known {
            Some(r) => RefCell_::Known(r),
            None => RefCell_::Free,
        });
        self.refs.len() - 1
    }

    fn of_plain(&mut self, t: PlainType) -> Ty {
        match t {
            PlainType::Bool => Ty::Bool,
            PlainType::Base => Ty::Base,
            PlainType::Tree => Ty::Tree(self.fresh_ref(Some(None))),
            PlainType::Refined(r) => Ty::Tree(self.fresh_ref(Some(Some(r)))),
        }
    }

    fn tree(&mut self) -> Ty {
        Ty::Tree(self.fresh_ref(None))
    }

    fn resolve(&self, t: Ty) -> Ty {
        match t {
            Ty::Var(v) => match self.vars[v] {
                Some(t) => self.resolve(t),
                None => t,
            },
            _ => t,
        }
    }

    fn root_ref(&self, mut r: usize) -> usize {
        while let RefCell_::Link(n) = self.refs[r] {
            r = n;
        }
        r
    }

    fn unify_ref(&mut self, a: usize, b: usize) -> Result<(), String> {
        let (ra, rb) = (self.root_ref(a), self.root_ref(b));
        if ra == rb {
            return Ok(());
        }
        match (self.refs[ra], self.refs[rb]) {
            (RefCell_::Free, _) => self.refs[ra] = RefCell_::Link(rb),
            (_, RefCell_::Free) => self.refs[rb] = RefCell_::Link(ra),
            (RefCell_::Known(x), RefCell_::Known(y)) if x == y => self.refs[ra] = RefCell_::Link(rb),
            (RefCell_::Known(x), RefCell_::Known(y)) => {
                return Err(format!(
                    "refinement mismatch: {} vs {}",
                    show_ref(x),
                    show_ref(y)
                ))
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    fn unify(&mut self, a: Ty, b: Ty) -> Result<(), String> {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (a, b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), t) | (t, Ty::Var(x)) => {
                self.vars[x] = Some(t);
                Ok(())
            }
            (Ty::Bool, Ty::Bool) | (Ty::Base, Ty::Base) => Ok(()),
            (Ty::Tree(r), Ty::Tree(s)) => self.unify_ref(r, s),
            _ => Err(format!("expected {}, found {}", self.show(b), self.show(a))),
        }
    }

    fn finish(&self, t: Ty) -> PlainType {
        match self.resolve(t) {
            Ty::Bool => PlainType::Bool,
            Ty::Base => PlainType::Base,
            // Only `error` or diverging bodies leave a type open.
            Ty::Var(_) => PlainType::Tree,
            Ty::Tree(r) => match self.refs[self.root_ref(r)] {
                RefCell_::Known(Some(r)) => PlainType::Refined(r),
                _ => PlainType::Tree,
            },
        }
    }

    fn show(&self, t: Ty) -> String {
        match self.resolve(t) {
            Ty::Var(_) => "_".into(),
            t => self.finish(t).to_string(),
        }
    }
}

fn show_ref(r: Option<Refinement>) -> &'static str {
    match r {
        None => "Tree Base",
        Some(Refinement::WeightTree) => "Tree Base @weight",
        Some(Refinement::RankTree) => "Tree Base @rank",
    }
}

struct FunTy {
    params: Vec<Ty>,
    ret: Ty,
}

struct Checker<'a> {
    u: Unifier,
    funs: &'a HashMap<Name, FunTy>,
    /// Inferred type per expression, in pre-order.
    seen: Vec<Ty>,
}

impl Checker<'_> {
    fn unify_at(&mut self, span: Span, a: Ty, b: Ty) -> Result<(), TypeError> {
        self.u.unify(a, b).map_err(|msg| TypeError { span, msg })
    }

    fn infer(&mut self, e: &Expr, env: &mut Vec<(Name, Ty)>, in_cmp: bool) -> Result<Ty, TypeError> {
        let slot = self.seen.len();
        self.seen.push(Ty::Bool);
        let ty = match &e.kind {
            ExprKind::Var(x) => match env.iter().rev().find(|(n, _)| n == x) {
                Some((_, t)) => *t,
                None if self.funs.contains_key(x) => {
                    return terr(e.span, format!("function '{x}' used as a value"))
                }
                None => return terr(e.span, format!("unbound variable '{x}'")),
            },
            ExprKind::Bool(_) => Ty::Bool,
            ExprKind::Leaf => self.u.tree(),
            ExprKind::Error => self.u.fresh(),
            ExprKind::Node(l, a, r) => {
                let t = self.u.tree();
                let lt = self.infer(l, env, false)?;
                self.unify_at(l.span, lt, t)?;
                let at = self.infer(a, env, false)?;
                self.unify_at(a.span, at, Ty::Base)?;
                let rt = self.infer(r, env, false)?;
                self.unify_at(r.span, rt, t)?;
                t
            }
            ExprKind::App(f, args) => {
                let Some(ft) = self.funs.get(f) else {
                    return terr(e.span, format!("unknown function '{f}'"));
                };
                if ft.params.len() != args.len() {
                    return terr(
                        e.span,
                        format!("'{f}' expects {} argument(s), got {}", ft.params.len(), args.len()),
                    );
                }
                let (params, ret) = (ft.params.clone(), ft.ret);
                for (a, p) in args.iter().zip(params) {
                    let at = self.infer(a, env, false)?;
                    self.unify_at(a.span, at, p)?;
                }
                ret
            }
            ExprKind::Builtin(m, arg) => {
                if !in_cmp {
                    return terr(
                        e.span,
                        format!("'{}' may only appear as a comparison operand", m.builtin_name()),
                    );
                }
                let at = self.infer(arg, env, false)?;
                let t = self.u.tree();
                self.unify_at(arg.span, at, t)?;
                Ty::Base
            }
            ExprKind::Cmp(_, a, b) => {
                let at = self.infer(a, env, true)?;
                self.unify_at(a.span, at, Ty::Base)?;
                let bt = self.infer(b, env, true)?;
                self.unify_at(b.span, bt, Ty::Base)?;
                Ty::Bool
            }
            ExprKind::If(c, t, f) => {
                let ct = self.infer(c, env, false)?;
                self.unify_at(c.span, ct, Ty::Bool)?;
                let tt = self.infer(t, env, false)?;
                let ft = self.infer(f, env, false)?;
                self.unify_at(f.span, ft, tt)?;
                tt
            }
            ExprKind::Match(s, arms) => {
                let st = self.infer(s, env, false)?;
                let tree = self.u.tree();
                self.unify_at(s.span, st, tree)?;
                let has_leaf = arms.iter().any(|a| a.pat == Pattern::Leaf);
                let has_node = arms.iter().any(|a| matches!(a.pat, Pattern::Node(..)));
                if !has_leaf || !has_node {
                    return terr(e.span, "match must cover both leaf and node");
                }
                if arms.len() != 2 {
                    return terr(e.span, "match must have exactly one leaf and one node arm");
                }
                let res = self.u.fresh();
                for arm in arms {
                    let n = env.len();
                    if let Pattern::Node(t, a, u) = &arm.pat {
                        env.push((t.clone(), tree));
                        env.push((a.clone(), Ty::Base));
                        env.push((u.clone(), tree));
                    }
                    let bt = self.infer(&arm.body, env, false)?;
                    env.truncate(n);
                    self.unify_at(arm.body.span, bt, res)?;
                }
                res
            }
            ExprKind::Let(x, e1, e2) => {
                let t1 = self.infer(e1, env, false)?;
                env.push((x.clone(), t1));
                let t2 = self.infer(e2, env, false);
                env.pop();
                t2?
            }
            ExprKind::Tick(_, inner) => self.infer(inner, env, false)?,
        };
        self.seen[slot] = ty;
        Ok(ty)
    }
}

/// Pre-order mutable traversal, matching `Expr::walk`.
pub fn walk_mut(e: &mut Expr, f: &mut impl FnMut(&mut Expr)) {
    f(e);
    match &mut e.kind {
        ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => {}
        ExprKind::Node(a, b, c) | ExprKind::If(a, b, c) => {
            walk_mut(a, f);
            walk_mut(b, f);
            walk_mut(c, f);
        }
        ExprKind::App(_, args) => args.iter_mut().for_each(|a| walk_mut(a, f)),
        ExprKind::Builtin(_, e) | ExprKind::Tick(_, e) => walk_mut(e, f),
        ExprKind::Cmp(_, a, b) | ExprKind::Let(_, a, b) => {
            walk_mut(a, f);
            walk_mut(b, f);
        }
        ExprKind::Match(s, arms) => {
            walk_mut(s, f);
            arms.iter_mut().for_each(|a| walk_mut(&mut a.body, f));
        }
    }
}

/// Annotates every expression with its plain type and fills in
/// `param_types`/`ret_type` for each function.
pub fn infer_program(prog: &mut Program) -> Result<(), TypeError> {
    let mut u = Unifier::default();
    let mut funs = HashMap::new();
    for f in &prog.funs {
        let ft = match &f.sig {
            Some(sig) => {
                if sig.args.len() != f.params.len() {
                    return terr(
                        f.span,
                        format!(
                            "signature of '{}' has {} argument(s) but the definition has {}",
                            f.name,
                            sig.args.len(),
                            f.params.len()
                        ),
                    );
                }
                FunTy {
                    params: sig.args.iter().map(|t| u.of_plain(*t)).collect(),
                    ret: u.of_plain(sig.ret),
                }
            }
            None => FunTy { params: f.params.iter().map(|_| u.fresh()).collect(), ret: u.fresh() },
        };
        funs.insert(f.name.clone(), ft);
    }
    let mut ck = Checker { u, funs: &funs, seen: Vec::new() };
    let mut per_fun = Vec::new();
    for f in &prog.funs {
        let ft = &funs[&f.name];
        let mut env: Vec<(Name, Ty)> =
            f.params.iter().cloned().zip(ft.params.iter().copied()).collect();
        let start = ck.seen.len();
        let bt = ck.infer(&f.body, &mut env, false)?;
        ck.unify_at(f.body.span, bt, ft.ret)?;
        per_fun.push(start..ck.seen.len());
    }
    for (f, range) in prog.funs.iter_mut().zip(per_fun) {
        let ft = &funs[&f.name];
        f.param_types = ft.params.iter().map(|t| ck.u.finish(*t)).collect();
        f.ret_type = Some(ck.u.finish(ft.ret));
        let mut tys = ck.seen[range].iter();
        walk_mut(&mut f.body, &mut |e| e.ty = Some(ck.u.finish(*tys.next().unwrap())));
    }
    Ok(())
}

impl fmt::Display for FunSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|t| t.to_string()).collect();
        match args.len() {
            1 => write!(f, "{} -> {}", args[0], self.ret),
            _ => write!(f, "({}) -> {}", args.join(" * "), self.ret),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::parse;

    fn typed(src: &str) -> Result<Program, TypeError> {
        let mut p = parse(src).unwrap();
        infer_program(&mut p)?;
        Ok(p)
    }

    #[test]
    fn infers_without_signatures() {
        let p = typed("f x = match x with | leaf -> leaf | node l a r -> node r a l").unwrap();
        assert_eq!(p.funs[0].param_types, vec![PlainType::Tree]);
        assert_eq!(p.funs[0].ret_type, Some(PlainType::Tree));
    }

    #[test]
    fn weight_condition_is_bool() {
        let src = "bal :: (Tree Base @weight * Base * Tree Base @weight) -> Tree Base @weight
bal t a u = if weight t <= weight u then node u a t else node t a u";
        let p = typed(src).unwrap();
        let body = &p.funs[0].body;
        let ExprKind::If(c, t, _) = &body.kind else { panic!() };
        assert_eq!(c.ty, Some(PlainType::Bool));
        assert_eq!(t.ty, Some(PlainType::Refined(Refinement::WeightTree)));
    }

    #[test]
    fn rejects_misplaced_builtins_and_mismatches() {
        assert!(typed("f x = weight x").unwrap_err().msg.contains("comparison operand"));
        assert!(typed("f x = if x then leaf else true").is_err());
        assert!(typed("f x = g x").unwrap_err().msg.contains("unknown function"));
        let e = typed("f :: Tree Base @weight -> Tree Base\nf x = x").unwrap_err();
        assert!(e.msg.contains("refinement mismatch"));
    }

    #[test]
    fn requires_exhaustive_match() {
        assert!(typed("f x = match x with | leaf -> leaf").is_err());
    }
}
