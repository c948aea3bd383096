//! Walks a function body and emits the constraints of its derivation.

use super::sig::{SigEnv, SigKind, Signature};
use super::tree::{DerivationNode, Forest, Rule};
use super::Config;
use crate::constraints::letrule::LetCtx;
use crate::constraints::rules;
use crate::constraints::{Atom, Constraint, ConstraintSet, LinExpr, Provenance, Rel, VarId, VarKind};
use crate::rat::{int, Rat};
use crate::syntax::print::print_expr;
use crate::syntax::{CmpOp, Cue, Expr, ExprKind, Measure, Name, Pattern, PlainType, Refinement, Span};
use crate::templates::subst::{bracket, image, Form, Image, Subst};
use crate::templates::{enumerate_terms, Template, Term, View, PARAM_X, RESULT};
use crate::weakening::{farkas_encode, Certificate, FactCache, Guard, GuardSet};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeriveError {
    #[error("{span}: constructor requires {pred}, which the guards {guards} do not entail")]
    Refinement { span: Span, pred: String, guards: String },
    #[error("{span}: unknown function {name}")]
    UnknownFunction { span: Span, name: Name },
    #[error("{span}: expression is not in let-normal form: {what}")]
    NotNormal { span: Span, what: String },
}

/// Context of one judgement.
#[derive(Clone, Debug)]
struct J {
    ctx: Vec<Name>,
    guards: GuardSet,
    cf: bool,
    has_x: bool,
}

impl J {
    fn with_ctx(&self, ctx: Vec<Name>) -> J {
        J { ctx, ..self.clone() }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Weaken,
    WVar,
    Rule,
}

pub struct Deriver<'a> {
    cfg: &'a Config,
    sigs: &'a SigEnv,
    pub cs: &'a mut ConstraintSet,
    pub forest: Forest,
    pub certs: Vec<Certificate>,
    facts: FactCache,
    leaf_facts: FactCache,
    fresh: usize,
}

fn sorted(mut v: Vec<Name>) -> Vec<Name> {
    v.sort();
    v.dedup();
    v
}

fn short(e: &Expr) -> String {
    let s = print_expr(e);
    if s.chars().count() > 72 {
        let t: String = s.chars().take(69).collect();
        format!("{t}...")
    } else {
        s
    }
}

fn is_tree(e: &Expr) -> bool {
    e.ty.is_some_and(|t| t.is_tree())
}

fn leafish(e: &Expr) -> bool {
    !matches!(e.kind, ExprKind::Let(..) | ExprKind::Match(..) | ExprKind::If(..) | ExprKind::Error)
}

fn refinement_guard(ty: Option<PlainType>, t: &str, u: &str) -> Option<Guard> {
    match ty.and_then(|t| t.refinement()) {
        Some(Refinement::WeightTree) => Some(Guard::new(Measure::Weight, t, CmpOp::Ge, u)),
        Some(Refinement::RankTree) => Some(Guard::new(Measure::Rank, t, CmpOp::Ge, u)),
        None => None,
    }
}

/// The guard stated by a branch condition, when it compares two measures.
pub fn condition_guard(c: &Expr) -> Option<Guard> {
    let ExprKind::Cmp(op, a, b) = &c.kind else { return None };
    match (&a.kind, &b.kind) {
        (ExprKind::Builtin(m1, x), ExprKind::Builtin(m2, y)) if m1 == m2 => {
            Some(Guard::new(*m1, x.as_var()?, *op, y.as_var()?))
        }
        _ => None,
    }
}

/// Renames free occurrences of a variable.
pub fn rename_free(e: &Expr, from: &str, to: &str) -> Expr {
    let mut out = e.clone();
    rename_in(&mut out, from, to);
    out
}

fn rename_in(e: &mut Expr, from: &str, to: &str) {
    match &mut e.kind {
        ExprKind::Var(x) => {
            if x == from {
                *x = to.to_string();
            }
        }
        ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => {}
        ExprKind::Node(a, b, c) | ExprKind::If(a, b, c) => {
            rename_in(a, from, to);
            rename_in(b, from, to);
            rename_in(c, from, to);
        }
        ExprKind::App(_, args) => args.iter_mut().for_each(|a| rename_in(a, from, to)),
        ExprKind::Builtin(_, a) | ExprKind::Tick(_, a) => rename_in(a, from, to),
        ExprKind::Cmp(_, a, b) => {
            rename_in(a, from, to);
            rename_in(b, from, to);
        }
        ExprKind::Let(x, a, b) => {
            rename_in(a, from, to);
            if x != from {
                rename_in(b, from, to);
            }
        }
        ExprKind::Match(s, arms) => {
            rename_in(s, from, to);
            for arm in arms {
                let binds = matches!(&arm.pat, Pattern::Node(t, a, u) if t == from || a == from || u == from);
                if !binds {
                    rename_in(&mut arm.body, from, to);
                }
            }
        }
    }
}

/// Terms of `q` that the binding and the body of a let may need beyond the
/// universe: Γ-only terms for the binding, Δ-only and lifted terms for the body.
fn split_terms(q: &Template, gamma: &[Name], delta: &[Name], x: Option<&str>) -> (Vec<Term>, Vec<Term>) {
    let mut p = Vec::new();
    let mut r = Vec::new();
    for t in &q.terms {
        let vars = t.vars();
        let in_g = vars.iter().any(|v| gamma.contains(v));
        let in_d = vars.iter().any(|v| delta.contains(v));
        if !in_d {
            p.push(t.clone());
            continue;
        }
        if !in_g {
            r.push(t.clone());
            continue;
        }
        let Some(x) = x else { continue };
        match t {
            Term::Log { vars, .. } => {
                let b: Vec<Name> = vars.iter().filter(|v| !gamma.contains(v)).cloned().collect();
                for e in -1..=2i8 {
                    let mut with_x = b.clone();
                    with_x.push(x.to_string());
                    with_x.sort();
                    r.push(Term::Log { vars: with_x, c: e });
                    r.push(Term::Log { vars: b.clone(), c: e });
                }
            }
            Term::Iverson { lhs, rhs, .. } if !rhs.iter().any(|v| gamma.contains(v)) => {
                let mut b: Vec<Name> = lhs.iter().filter(|v| !gamma.contains(v)).cloned().collect();
                b.push(x.to_string());
                b.sort();
                for e in -1..=2 {
                    if let Image::Terms(ts) = bracket(b.clone(), e, rhs.clone()) {
                        r.extend(ts.into_iter().map(|(u, _)| u));
                    }
                }
            }
            _ => {}
        }
    }
    (p, r)
}

impl<'a> Deriver<'a> {
    pub fn new(cfg: &'a Config, sigs: &'a SigEnv, cs: &'a mut ConstraintSet, first_node: usize) -> Deriver<'a> {
        Deriver {
            cfg,
            sigs,
            cs,
            forest: Forest { nodes: Vec::new() },
            certs: Vec::new(),
            facts: FactCache::new(),
            leaf_facts: FactCache::new(),
            fresh: first_node,
        }
    }

    /// Derives a function body against one of its signatures; returns the root.
    pub fn derive_sig(&mut self, body: &Expr, sig: &Signature) -> Result<usize, DeriveError> {
        let j = J { ctx: sorted(sig.params.clone()), guards: GuardSet::new(), cf: sig.kind == SigKind::CostFree, has_x: sig.lhs.has_x };
        self.derive(body, &j, sig.lhs.clone(), sig.rhs.clone())
    }

    fn universe(&mut self, label: String, owner: usize, vars: &[Name], has_x: bool) -> Template {
        Template::universe(self.cs, &label, owner, &self.cfg.lang, vars, has_x, &self.cfg.caps)
    }

    /// The universe over `vars` plus those `extra` terms that fit the context.
    fn extended(&mut self, label: String, owner: usize, vars: &[Name], has_x: bool, extra: Vec<Term>) -> Template {
        let mut terms = enumerate_terms(&self.cfg.lang, vars, has_x, &self.cfg.caps);
        let mut seen: BTreeSet<Term> = terms.iter().cloned().collect();
        for t in extra {
            let fits = t.vars().iter().all(|v| vars.contains(v) || (has_x && v.as_str() == PARAM_X));
            if fits && t.is_valid() && !t.is_zero_valued() && seen.insert(t.clone()) {
                terms.push(t);
            }
        }
        Template::fresh(self.cs, &label, owner, vars, has_x, terms)
    }

    fn images(&self, q: &Template, s: &Subst) -> Vec<Term> {
        let mut out = Vec::new();
        for t in &q.terms {
            if let Image::Terms(ts) = image(t, s, &self.cfg.lang) {
                out.extend(ts.into_iter().map(|(u, _)| u));
            }
        }
        out
    }

    /// A template over the same terms as `t`, plus the unit.
    fn like(&mut self, label: String, owner: usize, t: &Template) -> Template {
        let mut terms = t.terms.clone();
        if !t.has(&Term::unit()) {
            terms.push(Term::unit());
        }
        Template::fresh(self.cs, &label, owner, &t.vars, t.has_x, terms)
    }

    fn push(&mut self, rule: Rule, e: &Expr, j: &J, q: &Template, q_res: &Template) -> usize {
        let id = self.forest.nodes.len() + self.offset();
        self.forest.nodes.push(DerivationNode {
            id,
            rule,
            span: e.span,
            expr: short(e),
            source: e.clone(),
            ctx: j.ctx.clone(),
            guards: j.guards.clone(),
            q: q.clone(),
            q_res: q_res.clone(),
            children: Vec::new(),
            cert: None,
            detail: String::new(),
            cost_free: j.cf,
        });
        id
    }

    fn offset(&self) -> usize {
        self.fresh
    }

    fn node_mut(&mut self, id: usize) -> &mut DerivationNode {
        let off = self.offset();
        &mut self.forest.nodes[id - off]
    }

    fn prov(&self, id: usize, rule: Rule) -> Provenance {
        Provenance::new(id, &rule.to_string(), "")
    }

    fn derive(&mut self, e: &Expr, j: &J, q: Template, q_res: Template) -> Result<usize, DeriveError> {
        self.derive_from(e, j, q, q_res, Stage::Weaken)
    }

    fn derive_from(&mut self, e: &Expr, j: &J, q: Template, q_res: Template, stage: Stage) -> Result<usize, DeriveError> {
        match stage {
            Stage::Weaken => {
                let full = e.has_cue(|c| *c == Cue::WeakenBeforeLet);
                let leaf = e.has_cue(|c| *c == Cue::PseudoLeaf);
                if !(full || leaf) {
                    return self.derive_from(e, j, q, q_res, Stage::WVar);
                }
                let id = self.push(Rule::W, e, j, &q, &q_res);
                let p = self.extended(format!("{id}w"), id, &j.ctx, j.has_x, q.terms.clone());
                let know = if full { &self.cfg.knowledge } else { &self.cfg.leaf_knowledge };
                let cache = if full { &mut self.facts } else { &mut self.leaf_facts };
                let universe = enumerate_terms(&self.cfg.lang, &j.ctx, j.has_x, &self.cfg.caps);
                let facts = cache.get(&self.cfg.lang, &j.ctx, &j.guards, know, &universe);
                let cert = farkas_encode(self.cs, id, &j.ctx, &j.guards, facts, q.view(), p.view());
                self.certs.push(cert);
                let cert_idx = self.certs.len() - 1;
                let child = self.derive_from(e, j, p, q_res, Stage::WVar)?;
                let n = self.node_mut(id);
                n.cert = Some(cert_idx);
                n.detail = if full { "full knowledge".into() } else { "leaf knowledge".into() };
                n.children.push(child);
                Ok(id)
            }
            Stage::WVar => {
                let mut drop: BTreeSet<Name> = BTreeSet::new();
                for c in &e.cues {
                    if let Cue::WVarBeforeLeaf(xs) = c {
                        drop.extend(xs.iter().filter(|x| j.ctx.contains(x)).cloned());
                    }
                }
                if leafish(e) {
                    let fv = e.free_var_set();
                    drop.extend(j.ctx.iter().filter(|x| !fv.contains(*x)).cloned());
                }
                if drop.is_empty() {
                    return self.derive_from(e, j, q, q_res, Stage::Rule);
                }
                let id = self.push(Rule::WVar, e, j, &q, &q_res);
                let keep: Vec<Name> = j.ctx.iter().filter(|x| !drop.contains(*x)).cloned().collect();
                let p = self.extended(format!("{id}v"), id, &keep, j.has_x, q.terms.clone());
                let xs: Vec<Name> = drop.into_iter().collect();
                rules::wvar(self.cs, &self.prov(id, Rule::WVar), &q.view(), &p.view(), &xs);
                let child = self.derive_from(e, &j.with_ctx(keep), p, q_res, Stage::Rule)?;
                let n = self.node_mut(id);
                n.detail = format!("drop {}", xs.join(","));
                n.children.push(child);
                Ok(id)
            }
            Stage::Rule => self.rule(e, j, q, q_res),
        }
    }

    fn rule(&mut self, e: &Expr, j: &J, q: Template, q_res: Template) -> Result<usize, DeriveError> {
        let lang = self.cfg.lang.clone();
        match &e.kind {
            ExprKind::Var(x) if is_tree(e) => {
                let id = self.push(Rule::Var, e, j, &q, &q_res);
                rules::var(self.cs, &self.prov(id, Rule::Var), &lang, &q.view(), &q_res.view(), x);
                Ok(id)
            }
            ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Cmp(..) | ExprKind::Builtin(..) => {
                let id = self.push(Rule::Pure, e, j, &q, &q_res);
                rules::equate(self.cs, &self.prov(id, Rule::Pure), &lang, &q.view(), &q_res.view());
                Ok(id)
            }
            ExprKind::Error => Ok(self.push(Rule::Error, e, j, &q, &q_res)),
            ExprKind::Leaf => {
                let id = self.push(Rule::ConstLeaf, e, j, &q, &q_res);
                rules::const_leaf(self.cs, &self.prov(id, Rule::ConstLeaf), &lang, &q.view(), &q_res.view());
                Ok(id)
            }
            ExprKind::Node(l, _, r) => {
                let (Some(t), Some(u)) = (l.as_var(), r.as_var()) else {
                    return Err(DeriveError::NotNormal { span: e.span, what: "constructor argument".into() });
                };
                if let Some(pred) = refinement_guard(e.ty, t, u) {
                    let ok = if self.cfg.strict_refinements {
                        j.guards.iter().any(|g| *g == pred)
                    } else {
                        j.guards.entails(&pred)
                    };
                    if !ok {
                        return Err(DeriveError::Refinement { span: e.span, pred: pred.to_string(), guards: j.guards.to_string() });
                    }
                }
                let id = self.push(Rule::ConstNode, e, j, &q, &q_res);
                rules::const_node(self.cs, &self.prov(id, Rule::ConstNode), &lang, &q.view(), &q_res.view(), t, u);
                Ok(id)
            }
            ExprKind::App(f, args) => self.app(e, j, q, q_res, f, args),
            ExprKind::Tick(a, inner) => {
                let id = self.push(Rule::Tick, e, j, &q, &q_res);
                let cost = if j.cf { Rat::default() } else { a.clone() };
                let p_res = self.like(format!("{id}t"), id, &q_res);
                rules::tick(self.cs, &self.prov(id, Rule::Tick), &lang, &q_res.view(), &p_res.view(), &cost);
                let child = if e.has_cue(|c| *c == Cue::ShiftOnTick) {
                    let sid = self.push(Rule::Shift, inner, j, &q, &p_res);
                    let k = self.cs.fresh(format!("k{sid}"), VarKind::Aux, sid);
                    let p2 = self.like(format!("{sid}s"), sid, &q);
                    let p2_res = self.like(format!("{sid}sr"), sid, &p_res);
                    rules::shift(
                        self.cs,
                        &self.prov(sid, Rule::Shift),
                        &lang,
                        &q.view(),
                        &p_res.view(),
                        &p2.view(),
                        &p2_res.view(),
                        &LinExpr::var(k),
                    );
                    let c = self.derive(inner, j, p2, p2_res)?;
                    self.node_mut(sid).children.push(c);
                    sid
                } else {
                    self.derive(inner, j, q, p_res)?
                };
                let n = self.node_mut(id);
                n.detail = format!("cost {}", crate::rat::fmt_rat(&cost));
                n.children.push(child);
                Ok(id)
            }
            ExprKind::If(c, t, f) => {
                let id = self.push(Rule::Ite, e, j, &q, &q_res);
                let g = condition_guard(c);
                let jt = J { guards: g.iter().fold(j.guards.clone(), |gs, g| gs.with(g.clone())), ..j.clone() };
                let jf = J {
                    guards: g.and_then(|g| g.negated()).iter().fold(j.guards.clone(), |gs, g| gs.with(g.clone())),
                    ..j.clone()
                };
                let a = self.derive(t, &jt, q.clone(), q_res.clone())?;
                let b = self.derive(f, &jf, q, q_res)?;
                self.node_mut(id).children.extend([a, b]);
                Ok(id)
            }
            ExprKind::Match(s, arms) => {
                let Some(x) = s.as_var() else {
                    return Err(DeriveError::NotNormal { span: e.span, what: "match scrutinee".into() });
                };
                let id = self.push(Rule::Match, e, j, &q, &q_res);
                let rest: Vec<Name> = j.ctx.iter().filter(|v| *v != x).cloned().collect();
                let mut kids = Vec::new();
                for (i, arm) in arms.iter().enumerate() {
                    match &arm.pat {
                        Pattern::Leaf => {
                            let sub = Subst::from([(x.to_string(), Form::Leaf)]);
                            let extra = self.images(&q, &sub);
                            let p = self.extended(format!("{id}m{i}"), id, &rest, j.has_x, extra);
                            rules::match_leaf(self.cs, &self.prov(id, Rule::Match), &lang, &q.view(), &p.view(), x);
                            kids.push(self.derive(&arm.body, &j.with_ctx(rest.clone()), p, q_res.clone())?);
                        }
                        Pattern::Node(t, _, u) => {
                            let ctx = sorted(rest.iter().cloned().chain([t.clone(), u.clone()]).collect());
                            let sub = Subst::from([(x.to_string(), Form::Node(t.clone(), u.clone()))]);
                            let extra = self.images(&q, &sub);
                            let r = self.extended(format!("{id}m{i}"), id, &ctx, j.has_x, extra);
                            rules::match_node(self.cs, &self.prov(id, Rule::Match), &lang, &q.view(), &r.view(), x, t, u);
                            let mut jn = j.with_ctx(ctx);
                            if let Some(g) = refinement_guard(s.ty, t, u) {
                                jn.guards = jn.guards.with(g);
                            }
                            kids.push(self.derive(&arm.body, &jn, r, q_res.clone())?);
                        }
                    }
                }
                self.node_mut(id).children = kids;
                Ok(id)
            }
            ExprKind::Let(x, e1, e2) => self.let_(e, j, q, q_res, x, e1, e2),
        }
    }

    fn fresh_name(&mut self, base: &str, avoid: &[Name]) -> Name {
        let mut n = 1;
        loop {
            let cand = format!("{base}'{n}");
            if !avoid.contains(&cand) {
                return cand;
            }
            n += 1;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn let_(&mut self, e: &Expr, j: &J, q: Template, q_res: Template, x: &str, e1: &Expr, e2: &Expr) -> Result<usize, DeriveError> {
        let lang = self.cfg.lang.clone();
        let fv1 = e1.free_var_set();
        let fv2 = e2.free_var_set();
        let shared: Vec<Name> = j.ctx.iter().filter(|v| fv1.contains(*v) && fv2.contains(*v) && **v != x).cloned().collect();
        if let Some(z) = shared.first() {
            let mut avoid: Vec<Name> = j.ctx.clone();
            avoid.extend(fv1.iter().cloned());
            avoid.extend(fv2.iter().cloned());
            let z2 = self.fresh_name(z, &avoid);
            let id = self.push(Rule::Share, e, j, &q, &q_res);
            let ctx = sorted(j.ctx.iter().cloned().chain([z2.clone()]).collect());
            let p = self.extended(format!("{id}h"), id, &ctx, j.has_x, q.terms.clone());
            rules::share(self.cs, &self.prov(id, Rule::Share), &lang, &q.view(), &p.view(), z, z, &z2);
            let renamed = Expr { kind: ExprKind::Let(x.to_string(), Box::new(rename_free(e1, z, &z2)), Box::new(e2.clone())), ..e.clone() };
            let child = self.derive_from(&renamed, &j.with_ctx(ctx), p, q_res, Stage::Rule)?;
            let n = self.node_mut(id);
            n.detail = format!("{z} -> {z}, {z2}");
            n.children.push(child);
            return Ok(id);
        }

        let id = self.push(Rule::Let, e, j, &q, &q_res);
        let gamma: Vec<Name> = j.ctx.iter().filter(|v| fv1.contains(*v)).cloned().collect();
        let delta: Vec<Name> = j.ctx.iter().filter(|v| !fv1.contains(*v)).cloned().collect();
        let x_tree = is_tree(e1);
        let res_vars = if x_tree { vec![RESULT.to_string()] } else { vec![] };
        let body_ctx = if x_tree { sorted(delta.iter().cloned().chain([x.to_string()]).collect()) } else { delta.clone() };
        let (p_extra, r_extra) = split_terms(&q, &gamma, &delta, x_tree.then_some(x));
        let p = self.extended(format!("{id}p"), id, &gamma, j.has_x, p_extra);
        let p_res = self.universe(format!("{id}pr"), id, &res_vars, j.has_x);
        let r = self.extended(format!("{id}r"), id, &body_ctx, j.has_x, r_extra);
        let caps = self.cfg.caps.clone();
        let lc = LetCtx { lang: &lang, gamma: &gamma, delta: &delta, x: x_tree.then_some(x), caps: &caps };
        let specs = lc.plan(&q);
        let mut aux = Vec::new();
        for (i, spec) in specs.into_iter().enumerate() {
            let ap = Template::fresh(self.cs, &format!("{id}a{i}"), id, &gamma, spec.has_x, spec.p_terms.clone());
            let ap_res = Template::fresh(self.cs, &format!("{id}b{i}"), id, &res_vars, spec.has_x, spec.p_res_terms.clone());
            aux.push((spec, ap, ap_res));
        }
        lc.constraints(self.cs, id, &q, &p, &p_res, &r, &aux);

        let mut kids = Vec::new();
        kids.push(self.derive(e1, &j.with_ctx(gamma.clone()), p, p_res)?);
        kids.push(self.derive(e2, &j.with_ctx(body_ctx), r, q_res)?);
        let mut keys = Vec::new();
        for (spec, ap, ap_res) in aux {
            let ja = J { ctx: gamma.clone(), guards: j.guards.clone(), cf: true, has_x: spec.has_x };
            kids.push(self.derive(e1, &ja, ap, ap_res)?);
            keys.push(spec.key.to_string());
        }
        let n = self.node_mut(id);
        n.children = kids;
        n.detail = if keys.is_empty() { String::new() } else { format!("lifting {}", keys.join(" ")) };
        Ok(id)
    }

    /// Σ selected·view with products encoded by implications on a 0/1 selector.
    fn selected(&mut self, id: usize, view: &View, s: VarId, k: u32, tag: &str) -> View {
        let prov = self.prov(id, Rule::App);
        let mut out = Vec::with_capacity(view.len());
        for (t, e) in view {
            let z = self.cs.fresh(format!("z{id}_{}", self.cs.pool.len()), VarKind::Aux, id);
            let sel = LinExpr::var(s);
            self.cs.push(
                Constraint::Implies(Atom::new(sel.clone(), Rel::Eq), Atom::new(LinExpr::var(z), Rel::Eq)),
                rules::with_tag(&prov, format!("{tag} off {t}")),
            );
            self.cs.push(
                Constraint::Implies(
                    Atom::new(sel.minus(&LinExpr::constant(int(1))), Rel::Eq),
                    Atom::new(LinExpr::var(z).minus(&e.scaled(&int(k as i64))), Rel::Eq),
                ),
                rules::with_tag(&prov, format!("{tag} on {t}")),
            );
            out.push((t.clone(), LinExpr::var(z)));
        }
        out
    }

    fn app(&mut self, e: &Expr, j: &J, q: Template, q_res: Template, f: &str, args: &[Expr]) -> Result<usize, DeriveError> {
        let lang = self.cfg.lang.clone();
        let sigs = self.sigs;
        let costed = sigs.costed(f);
        let cost_free = sigs.cost_free(f);
        if costed.is_empty() && cost_free.is_empty() {
            return Err(DeriveError::UnknownFunction { span: e.span, name: f.to_string() });
        }
        let mut targs = Vec::new();
        for a in args {
            let Some(v) = a.as_var() else {
                return Err(DeriveError::NotNormal { span: a.span, what: "function argument".into() });
            };
            if is_tree(a) {
                targs.push(v.to_string());
            }
        }
        let id = self.push(Rule::App, e, j, &q, &q_res);
        let mut parts: Vec<(View, View)> = Vec::new();
        let mut chosen = Vec::new();
        let prov = self.prov(id, Rule::App);
        if !j.cf {
            if costed.len() == 1 {
                parts.push((costed[0].lhs.view(), costed[0].rhs.view()));
                chosen.push(costed[0].label());
            } else {
                let mut one = LinExpr::zero();
                for s in &costed {
                    let ind = self.cs.fresh(format!("s{id}_{}", s.label().replace(':', "_")), VarKind::Indicator, id);
                    one.add(&LinExpr::var(ind));
                    let l = self.selected(id, &s.lhs.view(), ind, 1, &s.label());
                    let r = self.selected(id, &s.rhs.view(), ind, 1, &s.label());
                    parts.push((l, r));
                    chosen.push(s.label());
                }
                self.cs.eq(one, &LinExpr::constant(int(1)), rules::with_tag(&prov, "one costed signature".into()));
            }
        }
        for s in &cost_free {
            let mut sum = LinExpr::zero();
            for &k in self.cfg.k_set.iter().filter(|k| **k > 0) {
                let ind = self.cs.fresh(format!("s{id}_{}_{k}", s.label().replace(':', "_")), VarKind::Indicator, id);
                sum.add(&LinExpr::var(ind));
                let l = self.selected(id, &s.lhs.view(), ind, k, &s.label());
                let r = self.selected(id, &s.rhs.view(), ind, k, &s.label());
                parts.push((l, r));
            }
            self.cs.le(sum, &LinExpr::constant(int(1)), rules::with_tag(&prov, format!("{} at most once", s.label())));
            chosen.push(format!("k·{}", s.label()));
        }
        let one = int(1);
        let lhs = rules::combine(&parts.iter().map(|(l, _)| (l, one.clone())).collect::<Vec<_>>());
        let rhs = rules::combine(&parts.iter().map(|(_, r)| (r, one.clone())).collect::<Vec<_>>());
        let params = costed.first().or(cost_free.first()).map(|s| s.params.clone()).unwrap_or_default();
        if params.len() != targs.len() {
            return Err(DeriveError::NotNormal { span: e.span, what: format!("{f} expects {} tree argument(s)", params.len()) });
        }
        rules::app(self.cs, &prov, &lang, &q.view(), &q_res.view(), &lhs, &rhs, &params, &targs);
        self.node_mut(id).detail = chosen.join(" + ");
        Ok(id)
    }
}
