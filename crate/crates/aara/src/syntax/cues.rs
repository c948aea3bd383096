//! Heuristic annotations telling the derivation builder where to insert
//! structural rules.

use super::ast::*;
use std::collections::BTreeSet;

fn is_tree(e: &Expr) -> bool {
    e.ty.is_some_and(|t| t.is_tree())
}

fn is_call(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::App(..) => true,
        ExprKind::Tick(_, inner) => is_call(inner),
        _ => false,
    }
}

/// Tree variables available to the body of `let x = e1 in e2`, given the
/// context of the whole let. Variables used by both sides are shared.
pub fn let_body_context(
    ctx: &BTreeSet<Name>,
    x: &str,
    x_is_tree: bool,
    e1: &Expr,
    e2: &Expr,
) -> BTreeSet<Name> {
    let fv1 = e1.free_var_set();
    let fv2 = e2.free_var_set();
    let mut out: BTreeSet<Name> =
        ctx.iter().filter(|v| !fv1.contains(*v) || fv2.contains(*v)).cloned().collect();
    if x_is_tree {
        out.insert(x.to_string());
    }
    out
}

/// Tree variables handed to the binding of a let.
pub fn let_binding_context(ctx: &BTreeSet<Name>, e1: &Expr) -> BTreeSet<Name> {
    let fv1 = e1.free_var_set();
    ctx.iter().filter(|v| fv1.contains(*v)).cloned().collect()
}

fn annotate(e: &mut Expr, ctx: &BTreeSet<Name>, tail: bool) {
    let leafish = matches!(
        e.kind,
        ExprKind::Var(_) | ExprKind::Leaf | ExprKind::Node(..) | ExprKind::App(..)
    );
    if leafish || is_call(e) {
        if tail {
            e.cues.push(Cue::PseudoLeaf);
        }
        let used = e.free_var_set();
        let extra: Vec<Name> = ctx.iter().filter(|v| !used.contains(*v)).cloned().collect();
        if !extra.is_empty() {
            e.cues.push(Cue::WVarBeforeLeaf(extra));
        }
    }
    match &mut e.kind {
        ExprKind::Tick(_, inner) => {
            if matches!(inner.kind, ExprKind::App(..)) {
                e.cues.push(Cue::ShiftOnTick);
                return;
            }
            annotate(inner, ctx, tail);
        }
        ExprKind::Let(x, e1, e2) => {
            if is_call(e1) {
                e.cues.push(Cue::WeakenBeforeLet);
            }
            let c1 = let_binding_context(ctx, e1);
            let c2 = let_body_context(ctx, x, is_tree(e1), e1, e2);
            annotate(e1, &c1, false);
            annotate(e2, &c2, tail);
        }
        ExprKind::If(_, t, f) => {
            annotate(t, ctx, tail);
            annotate(f, ctx, tail);
        }
        ExprKind::Match(s, arms) => {
            let x = s.as_var().unwrap_or_default().to_string();
            for arm in arms {
                let mut c = ctx.clone();
                c.remove(&x);
                if let Pattern::Node(t, _, u) = &arm.pat {
                    c.insert(t.clone());
                    c.insert(u.clone());
                }
                annotate(&mut arm.body, &c, tail);
            }
        }
        _ => {}
    }
}

pub fn annotate_fun(f: &mut FunDef) {
    super::types::walk_mut(&mut f.body, &mut |e| e.cues.clear());
    let ctx: BTreeSet<Name> = f.tree_params().into_iter().collect();
    annotate(&mut f.body, &ctx, true);
}

pub fn annotate_program(p: &mut Program) {
    p.funs.iter_mut().for_each(annotate_fun);
}

#[cfg(test)]
mod tests {
    use crate::syntax::*;

    #[test]
    fn swap_cues() {
        let p = load("swap x = match x with | leaf -> leaf | node t a u -> let u' = ~ swap u in node u' a t").unwrap();
        let ExprKind::Match(_, arms) = &p.funs[0].body.kind else { panic!() };
        assert!(arms[0].body.has_cue(|c| *c == Cue::PseudoLeaf));
        let let_ = &arms[1].body;
        assert!(let_.has_cue(|c| *c == Cue::WeakenBeforeLet));
        let ExprKind::Let(_, e1, e2) = &let_.kind else { panic!() };
        assert!(e1.has_cue(|c| *c == Cue::ShiftOnTick));
        assert!(!e1.has_cue(|c| *c == Cue::PseudoLeaf));
        assert!(e2.has_cue(|c| *c == Cue::PseudoLeaf));
        assert!(!e2.has_cue(|c| matches!(c, Cue::WVarBeforeLeaf(_))));
    }

    #[test]
    fn unused_variables_are_flagged() {
        let p = load("f x y = x").unwrap();
        let body = &p.funs[0].body;
        assert!(body.has_cue(|c| *c == Cue::WVarBeforeLeaf(vec!["y".into()])));
    }
}
