//! Constraint generators for the syntax-directed and structural rules.

use super::ir::{ConstraintSet, LinExpr, Provenance, Rel};
use crate::potentials::Lang;
use crate::rat::one;
use crate::syntax::Name;
use crate::templates::subst::{image, Form, Image, Subst};
use crate::templates::{Term, View, RESULT};
use std::collections::BTreeMap;

/// Contributions collected per target term.
pub type Acc = BTreeMap<Term, LinExpr>;

pub fn add_to(acc: &mut Acc, t: Term, e: &LinExpr) {
    acc.entry(t).or_default().add(e);
}

/// Pushes every source coefficient through `f`. Sources without an image
/// in the universe get `coefficient rel 0`.
pub fn accumulate(
    acc: &mut Acc,
    cs: &mut ConstraintSet,
    prov: &Provenance,
    src: &View,
    f: impl Fn(&Term) -> Image,
    drop_rel: Rel,
) {
    for (t, e) in src {
        match f(t) {
            Image::Terms(ts) => {
                for (u, k) in ts {
                    acc.entry(u).or_default().add_scaled(e, &k);
                }
            }
            Image::Zero => {}
            Image::Drop => cs.atom(
                super::ir::Atom::new(e.clone(), drop_rel),
                with_tag(prov, format!("drop {t}")),
            ),
        }
    }
}

/// Equates each target coefficient with its contributions. Contributions to
/// terms the target lacks get `sum rel 0`; untouched targets become 0.
pub fn settle(cs: &mut ConstraintSet, prov: &Provenance, dst: &View, mut acc: Acc, leftover: Rel) {
    for (t, e) in dst {
        let rhs = acc.remove(t).unwrap_or_default();
        cs.eq(e.clone(), &rhs, with_tag(prov, t.to_string()));
    }
    for (t, e) in acc {
        cs.atom(super::ir::Atom::new(e, leftover), with_tag(prov, format!("absent {t}")));
    }
}

pub fn with_tag(p: &Provenance, tag: String) -> Provenance {
    let tag = if p.tag.is_empty() { tag } else { format!("{}: {}", p.tag, tag) };
    Provenance { node: p.node, rule: p.rule.clone(), tag }
}

/// dst = src[s], exactly.
#[allow(clippy::too_many_arguments)]
pub fn transfer(
    cs: &mut ConstraintSet,
    prov: &Provenance,
    lang: &Lang,
    src: &View,
    dst: &View,
    s: &Subst,
    drop_rel: Rel,
    leftover: Rel,
) {
    let mut acc = Acc::new();
    accumulate(&mut acc, cs, prov, src, |t| image(t, s, lang), drop_rel);
    settle(cs, prov, dst, acc, leftover);
}

/// The view with `k` added to the unit coefficient.
pub fn plus_unit(view: &View, k: &LinExpr) -> View {
    let mut out = view.clone();
    match out.iter_mut().find(|(t, _)| t.is_unit()) {
        Some((_, e)) => e.add(k),
        None => out.push((Term::unit(), k.clone())),
    }
    out
}

/// Σ k_j·view_j with constant multipliers.
pub fn combine(parts: &[(&View, crate::rat::Rat)]) -> View {
    let mut acc = Acc::new();
    for (v, k) in parts {
        for (t, e) in v.iter() {
            acc.entry(t.clone()).or_default().add_scaled(e, k);
        }
    }
    acc.into_iter().collect()
}

pub fn equate(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, a: &View, b: &View) {
    transfer(cs, prov, lang, a, b, &Subst::new(), Rel::Eq, Rel::Eq);
}

/// Var: Q(x) = Q'(v)[v ↦ x].
pub fn var(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, q_res: &View, x: &str) {
    let mut s = Subst::new();
    s.insert(RESULT.to_string(), Form::Var(x.to_string()));
    transfer(cs, prov, lang, q_res, q, &s, Rel::Eq, Rel::Eq);
}

/// Const leaf: Q = Q'(leaf). Q' terms without an image must be ≤ 0.
pub fn const_leaf(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, q_res: &View) {
    let mut s = Subst::new();
    s.insert(RESULT.to_string(), Form::Leaf);
    transfer(cs, prov, lang, q_res, q, &s, Rel::Le, Rel::Eq);
}

/// Const node: Q(t, u) = Q'(node t a u).
pub fn const_node(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, q_res: &View, t: &str, u: &str) {
    let mut s = Subst::new();
    s.insert(RESULT.to_string(), Form::Node(t.to_string(), u.to_string()));
    transfer(cs, prov, lang, q_res, q, &s, Rel::Le, Rel::Eq);
}

/// Match, leaf arm: P(Γ) = Q(Γ, leaf). Q terms lost on the way must be ≥ 0.
pub fn match_leaf(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, p: &View, x: &str) {
    let mut s = Subst::new();
    s.insert(x.to_string(), Form::Leaf);
    transfer(cs, prov, lang, q, p, &s, Rel::Ge, Rel::Eq);
}

/// Match, node arm: R(Γ, t, u) = Q(Γ, node t a u).
#[allow(clippy::too_many_arguments)]
pub fn match_node(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, r: &View, x: &str, t: &str, u: &str) {
    let mut s = Subst::new();
    s.insert(x.to_string(), Form::Node(t.to_string(), u.to_string()));
    transfer(cs, prov, lang, q, r, &s, Rel::Ge, Rel::Eq);
}

/// WVar: P drops every term mentioning `x`, whose coefficients must be ≥ 0.
pub fn wvar(cs: &mut ConstraintSet, prov: &Provenance, q: &View, p: &View, xs: &[Name]) {
    let mut acc = Acc::new();
    accumulate(
        &mut acc,
        cs,
        prov,
        q,
        |t| {
            if xs.iter().any(|x| t.mentions(x)) {
                Image::Drop
            } else {
                Image::Terms(vec![(t.clone(), one())])
            }
        },
        Rel::Ge,
    );
    settle(cs, prov, p, acc, Rel::Eq);
}

/// Share: Q(Γ, z) = P(Γ, z, z). Terms of P that stop being terms must be ≤ 0.
#[allow(clippy::too_many_arguments)]
pub fn share(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q: &View, p: &View, z: &str, x: &str, y: &str) {
    let mut s = Subst::new();
    s.insert(x.to_string(), Form::Var(z.to_string()));
    s.insert(y.to_string(), Form::Var(z.to_string()));
    transfer(cs, prov, lang, p, q, &s, Rel::Le, Rel::Eq);
}

/// Tick a: the premise's result template is Q' + a.
pub fn tick(cs: &mut ConstraintSet, prov: &Provenance, lang: &Lang, q_res: &View, p_res: &View, a: &crate::rat::Rat) {
    equate(cs, prov, lang, &plus_unit(q_res, &LinExpr::constant(a.clone())), p_res);
}

/// Shift by k ≥ 0: P = Q − k and P' = Q' − k.
#[allow(clippy::too_many_arguments)]
pub fn shift(
    cs: &mut ConstraintSet,
    prov: &Provenance,
    lang: &Lang,
    q: &View,
    q_res: &View,
    p: &View,
    p_res: &View,
    k: &LinExpr,
) {
    cs.ge(k.clone(), &LinExpr::zero(), with_tag(prov, "k >= 0".into()));
    let neg = k.scaled(&-one());
    equate(cs, prov, lang, &plus_unit(q, &neg), p);
    equate(cs, prov, lang, &plus_unit(q_res, &neg), p_res);
}

/// App: Q(x⃗) = Σ(callee LHS)[y⃗ ↦ x⃗] and Q' = Σ(callee RHS). The callee
/// views are already combined with their multipliers.
#[allow(clippy::too_many_arguments)]
pub fn app(
    cs: &mut ConstraintSet,
    prov: &Provenance,
    lang: &Lang,
    q: &View,
    q_res: &View,
    callee: &View,
    callee_res: &View,
    params: &[Name],
    args: &[Name],
) {
    let s: Subst = params.iter().zip(args).map(|(p, a)| (p.clone(), Form::Var(a.clone()))).collect();
    transfer(cs, prov, lang, callee, q, &s, Rel::Eq, Rel::Eq);
    equate(cs, prov, lang, callee_res, q_res);
}
