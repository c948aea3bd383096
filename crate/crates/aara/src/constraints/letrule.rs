//! The Let rule: splitting potential between the binding and the body, and
//! lifting mixed terms through cost-free typings of the binding.

use super::ir::{Atom, ConstraintSet, LinExpr, Provenance, Rel, VarKind};
use super::rules::{accumulate, settle, with_tag, Acc};
use crate::potentials::Lang;
use crate::rat::one;
use crate::syntax::Name;
use crate::templates::subst::{bracket, image, rename, Image};
use crate::templates::{log_terms, Caps, Template, Term, PARAM_X, RESULT};
use serde::Serialize;
use std::fmt;

/// Index of an auxiliary cost-free typing of the binding.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AuxKey {
    /// log(Σ|B| + d·|x| + e) obtained from log(Σ|A| + Σ|B| + c).
    Log { b: Vec<Name>, d: u8, e: i8 },
    /// [Σ|A| + Σ|B| + c < Σ|R|] read as [Σ|A| + c < |X|] with |X| = Σ|R| − Σ|B|.
    Pw { b: Vec<Name>, r: Vec<Name> },
}

impl fmt::Display for AuxKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxKey::Log { b, d, e } => write!(f, "log[{};{d};{e}]", b.join(",")),
            AuxKey::Pw { b, r } => write!(f, "pw[{};{}]", b.join(","), r.join(",")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AuxSpec {
    pub key: AuxKey,
    /// Terms of the auxiliary annotation of the binding context.
    pub p_terms: Vec<Term>,
    /// Terms of the auxiliary result annotation.
    pub p_res_terms: Vec<Term>,
    /// Whether the auxiliary templates carry the parameter X.
    pub has_x: bool,
}

/// Variables and language of one let.
pub struct LetCtx<'a> {
    pub lang: &'a Lang,
    pub gamma: &'a [Name],
    pub delta: &'a [Name],
    /// The bound variable when it is a tree.
    pub x: Option<&'a str>,
    pub caps: &'a Caps,
}

enum Class {
    Gamma,
    Delta,
    Lift(AuxKey, Term),
    Lost,
}

impl LetCtx<'_> {
    fn classify(&self, t: &Term) -> Class {
        let vars = t.vars();
        let g: Vec<Name> = vars.iter().filter(|v| self.gamma.contains(v)).map(|v| v.to_string()).collect();
        let d = vars.iter().any(|v| self.delta.contains(v));
        if !d {
            return Class::Gamma;
        }
        if g.is_empty() {
            return Class::Delta;
        }
        match t {
            Term::Log { vars, c } => {
                let b: Vec<Name> = vars.iter().filter(|v| !g.contains(v)).cloned().collect();
                let a_term = Term::Log { vars: g.clone(), c: *c };
                if !a_term.is_valid() {
                    return Class::Lost;
                }
                // The key's (d, e) is chosen later; mark with a placeholder.
                Class::Lift(AuxKey::Log { b, d: 0, e: 0 }, a_term)
            }
            Term::Iverson { lhs, c, rhs } => {
                if rhs.iter().any(|v| g.contains(v)) || !matches!(self.lang, Lang::Pw) {
                    return Class::Lost;
                }
                let b: Vec<Name> = lhs.iter().filter(|v| !g.contains(v)).cloned().collect();
                Class::Lift(
                    AuxKey::Pw { b, r: rhs.clone() },
                    Term::Iverson { lhs: g.clone(), c: *c, rhs: vec![PARAM_X.to_string()] },
                )
            }
            _ => Class::Lost,
        }
    }

    fn log_pairs(&self, b: &[Name]) -> Vec<(u8, i8)> {
        let mut out = Vec::new();
        for d in 0..=1u8 {
            if d == 1 && self.x.is_none() {
                continue;
            }
            for e in -1..=2i8 {
                if (d, e) != (0, 0) && b.len() as i64 + d as i64 + e as i64 >= 1 {
                    out.push((d, e));
                }
            }
        }
        out
    }

    /// The auxiliary typings needed for the mixed terms of `q`.
    pub fn plan(&self, q: &Template) -> Vec<AuxSpec> {
        let mut log_bs: Vec<Vec<Name>> = Vec::new();
        let mut pw_keys: Vec<AuxKey> = Vec::new();
        for t in &q.terms {
            if let Class::Lift(key, _) = self.classify(t) {
                match key {
                    AuxKey::Log { b, .. } => {
                        if !log_bs.contains(&b) {
                            log_bs.push(b)
                        }
                    }
                    k @ AuxKey::Pw { .. } => {
                        if !pw_keys.contains(&k) {
                            pw_keys.push(k)
                        }
                    }
                }
            }
        }
        log_bs.sort();
        pw_keys.sort();
        let gamma_logs: Vec<Term> =
            log_terms(self.gamma).into_iter().filter(|t| !t.is_constant()).collect();
        let mut out = Vec::new();
        for b in log_bs {
            for (d, e) in self.log_pairs(&b) {
                let res_vars = if d == 1 { vec![RESULT.to_string()] } else { vec![] };
                out.push(AuxSpec {
                    key: AuxKey::Log { b: b.clone(), d, e },
                    p_terms: gamma_logs.clone(),
                    p_res_terms: vec![Term::Log { vars: res_vars, c: e }],
                    has_x: false,
                });
            }
        }
        for key in pw_keys {
            let mut p_terms = Vec::new();
            for t in crate::templates::iverson_terms(self.gamma, true, self.caps) {
                if let Term::Iverson { lhs, rhs, .. } = &t {
                    if rhs.len() == 1 && rhs[0] == PARAM_X && !lhs.is_empty() {
                        p_terms.push(t);
                    }
                }
            }
            let p_res_terms = if self.x.is_some() {
                (-1..=2).map(|e| Term::Iverson { lhs: vec![RESULT.to_string()], c: e, rhs: vec![PARAM_X.to_string()] }).collect()
            } else {
                Vec::new()
            };
            out.push(AuxSpec { key, p_terms, p_res_terms, has_x: true });
        }
        out
    }

    /// Constraints of the let. `p`/`p_res` annotate the binding, `r` the body,
    /// and `aux` holds the templates of every planned auxiliary typing.
    #[allow(clippy::too_many_arguments)]
    pub fn constraints(
        &self,
        cs: &mut ConstraintSet,
        node: usize,
        q: &Template,
        p: &Template,
        p_res: &Template,
        r: &Template,
        aux: &[(AuxSpec, Template, Template)],
    ) {
        let prov = Provenance::new(node, "Let", "");
        let mut p_acc = Acc::new();
        let mut r_acc = Acc::new();
        let mut aux_acc: Vec<Acc> = vec![Acc::new(); aux.len()];
        let find = |k: &AuxKey| aux.iter().position(|(s, _, _)| &s.key == k);

        for (t, v) in q.terms.iter().zip(&q.coeffs) {
            let e = LinExpr::var(*v);
            match self.classify(t) {
                Class::Gamma => super::rules::add_to(&mut p_acc, t.clone(), &e),
                Class::Delta => super::rules::add_to(&mut r_acc, t.clone(), &e),
                Class::Lost => cs.ge(e, &LinExpr::zero(), with_tag(&prov, format!("lost {t}"))),
                Class::Lift(AuxKey::Log { b, .. }, a_term) => {
                    // q = Σ_{d,e} p^{(b,d,e)}_{a_term}
                    let mut sum = LinExpr::zero();
                    for (d, e2) in self.log_pairs(&b) {
                        let Some(i) = find(&AuxKey::Log { b: b.clone(), d, e: e2 }) else { continue };
                        sum.add(&aux[i].1.expr(&a_term));
                    }
                    cs.eq(e, &sum, with_tag(&prov, format!("mixed {t}")));
                }
                Class::Lift(key, a_term) => match find(&key) {
                    Some(i) => super::rules::add_to(&mut aux_acc[i], a_term, &e),
                    None => cs.ge(e, &LinExpr::zero(), with_tag(&prov, format!("lost {t}"))),
                },
            }
        }

        settle(cs, &with_tag(&prov, "binding".into()), &p.view(), p_acc, Rel::Ge);

        // the binding's result flows into the body
        let s = match self.x {
            Some(x) => rename(&[(RESULT, x)]),
            None => Default::default(),
        };
        accumulate(&mut r_acc, cs, &prov, &p_res.view(), |t| image(t, &s, self.lang), Rel::Ge);

        for (i, (spec, ap, ap_res)) in aux.iter().enumerate() {
            let tag = with_tag(&prov, spec.key.to_string());
            match &spec.key {
                AuxKey::Log { b, d, e } => {
                    let res_term = &spec.p_res_terms[0];
                    let pr = ap_res.expr(res_term);
                    cs.ge(pr.clone(), &LinExpr::zero(), with_tag(&tag, "lifted >= 0".into()));
                    let mut total = LinExpr::zero();
                    for (j, (t, v)) in ap.terms.iter().zip(&ap.coeffs).enumerate() {
                        total.add(&LinExpr::var(*v));
                        let ind = cs.fresh(format!("i{node}_{i}_{j}"), VarKind::Indicator, node);
                        let ind_e = LinExpr::var(ind);
                        cs.push(
                            super::ir::Constraint::Implies(
                                Atom::new(ind_e.clone(), Rel::Eq),
                                Atom::new(LinExpr::var(*v), Rel::Eq),
                            ),
                            with_tag(&tag, format!("{t} = 0 unless selected")),
                        );
                        cs.push(
                            super::ir::Constraint::Implies(
                                Atom::new(ind_e.minus(&LinExpr::constant(one())), Rel::Eq),
                                Atom::le(pr.clone(), &LinExpr::var(*v)),
                            ),
                            with_tag(&tag, format!("{t} >= lifted when selected")),
                        );
                    }
                    cs.ge(total, &pr, with_tag(&tag, "sum >= lifted".into()));
                    let mut vars = b.clone();
                    if *d == 1 {
                        vars.push(self.x.expect("tree binding").to_string());
                    }
                    vars.sort();
                    super::rules::add_to(&mut r_acc, Term::Log { vars, c: *e }, &pr);
                    // the auxiliary result has only the lifted term
                    for (t, v) in ap_res.terms.iter().zip(&ap_res.coeffs) {
                        if t != res_term {
                            cs.eq(LinExpr::var(*v), &LinExpr::zero(), with_tag(&tag, format!("{t}")));
                        }
                    }
                }
                AuxKey::Pw { b, r: rhs } => {
                    for (t, v) in ap_res.terms.iter().zip(&ap_res.coeffs) {
                        let pr = LinExpr::var(*v);
                        let lifted = match t {
                            Term::Iverson { lhs, c, .. } if lhs.len() == 1 && lhs[0] == RESULT => {
                                let mut l = b.clone();
                                l.push(self.x.expect("tree binding").to_string());
                                l.sort();
                                bracket(l, *c as i64, rhs.clone())
                            }
                            _ => Image::Drop,
                        };
                        match lifted {
                            Image::Terms(ts) => {
                                for (u, k) in ts {
                                    r_acc.entry(u).or_default().add_scaled(&pr, &k);
                                }
                            }
                            Image::Zero => {}
                            Image::Drop => cs.ge(pr, &LinExpr::zero(), with_tag(&tag, format!("lost {t}"))),
                        }
                    }
                }
            }
            if let AuxKey::Pw { .. } = spec.key {
                settle(cs, &tag, &ap.view(), std::mem::take(&mut aux_acc[i]), Rel::Ge);
            } else {
                // coefficients of terms with no mixed source are 0
                for (t, v) in ap.terms.iter().zip(&ap.coeffs) {
                    let mut b_vars = match &spec.key {
                        AuxKey::Log { b, .. } => b.clone(),
                        _ => unreachable!(),
                    };
                    if let Term::Log { vars, c } = t {
                        b_vars.extend(vars.iter().cloned());
                        b_vars.sort();
                        if !q.has(&Term::Log { vars: b_vars, c: *c }) {
                            cs.eq(LinExpr::var(*v), &LinExpr::zero(), with_tag(&tag, format!("no source {t}")));
                        }
                    }
                }
            }
        }

        settle(cs, &with_tag(&prov, "body".into()), &r.view(), r_acc, Rel::Ge);
    }
}
