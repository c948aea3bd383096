//! Annotated function signatures.

use crate::constraints::{ConstraintSet, LinExpr, Provenance};
use crate::potentials::Lang;
use crate::syntax::{Mode, Name, PlainType, Program};
use crate::templates::subst::{image, rename, Image};
use crate::templates::{Caps, Template, Term, View, RESULT};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SigKind {
    /// Pays the function's cost; the result carries Φ_α.
    Costed,
    /// Pays the cost with a zero result potential.
    WorstCase,
    /// Typing of the tick-free program.
    CostFree,
}

impl SigKind {
    pub fn is_costed(self) -> bool {
        !matches!(self, SigKind::CostFree)
    }
}

#[derive(Clone, Debug)]
pub struct Signature {
    pub fun: Name,
    pub kind: SigKind,
    /// Position among the function's signatures of the same kind.
    pub index: usize,
    pub params: Vec<Name>,
    pub lhs: Template,
    pub rhs: Template,
}

impl Signature {
    pub fn label(&self) -> String {
        let k = match self.kind {
            SigKind::Costed => "costed",
            SigKind::WorstCase => "worst",
            SigKind::CostFree => "cf",
        };
        format!("{}:{k}{}", self.fun, self.index)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SigEnv {
    pub sigs: Vec<Signature>,
    /// Shared result potential per result type.
    pub phi: BTreeMap<String, Template>,
}

impl SigEnv {
    pub fn of<'a>(&'a self, f: &'a str) -> impl Iterator<Item = &'a Signature> + 'a {
        self.sigs.iter().filter(move |s| s.fun == f)
    }

    pub fn costed(&self, f: &str) -> Vec<&Signature> {
        self.sigs.iter().filter(|s| s.fun == f && s.kind.is_costed()).collect()
    }

    pub fn cost_free(&self, f: &str) -> Vec<&Signature> {
        self.sigs.iter().filter(|s| s.fun == f && s.kind == SigKind::CostFree).collect()
    }
}

fn result_vars(ret: Option<PlainType>) -> Vec<Name> {
    match ret {
        Some(t) if t.is_tree() => vec![RESULT.to_string()],
        _ => vec![],
    }
}

/// Creates every function's signatures. Costed coefficients are ≥ 0.
pub fn create(cs: &mut ConstraintSet, prog: &Program, lang: &Lang, caps: &Caps, default_cf: usize) -> SigEnv {
    let mut env = SigEnv::default();
    let with_x = matches!(lang, Lang::Pw);
    for f in &prog.funs {
        let params = f.tree_params();
        let res = result_vars(f.ret_type);
        let ret_key = f.ret_type.map(|t| t.to_string()).unwrap_or_default();
        if !res.is_empty() && !env.phi.contains_key(&ret_key) {
            let phi = Template::fresh(cs, &format!("phi{}", env.phi.len()), 0, &res, false, phi_terms(lang, &res[0]));
            nonneg(cs, &phi, "phi");
            env.phi.insert(ret_key.clone(), phi);
        }
        let phi = env.phi.get(&ret_key).cloned();
        let zero = Template::fresh(cs, &format!("{}_zero", f.name), 0, &res, false, vec![]);
        let costed = |kind: SigKind, index: usize, cs: &mut ConstraintSet| {
            let lhs = Template::universe(cs, &format!("{}_{}{index}", f.name, if kind == SigKind::WorstCase { "w" } else { "c" }), 0, lang, &params, false, caps);
            nonneg(cs, &lhs, &f.name);
            let rhs = match (kind, &phi) {
                (SigKind::Costed, Some(p)) => p.clone(),
                _ => zero.clone(),
            };
            Signature { fun: f.name.clone(), kind, index, params: params.clone(), lhs, rhs }
        };
        match f.mode {
            Mode::Default => env.sigs.push(costed(SigKind::Costed, 0, cs)),
            Mode::WorstCase => env.sigs.push(costed(SigKind::WorstCase, 0, cs)),
            Mode::Hybrid => {
                env.sigs.push(costed(SigKind::Costed, 0, cs));
                env.sigs.push(costed(SigKind::WorstCase, 0, cs));
            }
        }
        for i in 0..f.num_cf_sigs.unwrap_or(default_cf) {
            let lhs = Template::universe(cs, &format!("{}_f{i}", f.name), 0, lang, &params, with_x, caps);
            let rhs = Template::universe(cs, &format!("{}_f{i}r", f.name), 0, lang, &res, with_x, caps);
            env.sigs.push(Signature { fun: f.name.clone(), kind: SigKind::CostFree, index: i, params: params.clone(), lhs, rhs });
        }
    }
    env
}

/// Φ ranges over the language's potential function only. Log or bracket terms
/// in Φ could cancel against the arguments and make the objective unbounded.
pub fn phi_terms(lang: &Lang, v: &str) -> Vec<Term> {
    match lang {
        Lang::Sol(_) | Lang::Pw => vec![Term::Phi(v.to_string())],
        Lang::Rank => vec![Term::Rank(v.to_string())],
        Lang::Log => vec![],
    }
}

fn nonneg(cs: &mut ConstraintSet, t: &Template, what: &str) {
    for (term, v) in t.terms.iter().zip(&t.coeffs) {
        cs.ge(LinExpr::var(*v), &LinExpr::zero(), Provenance::new(0, "Sig", format!("{what} {term} >= 0")));
    }
}

/// Φ(x₁) + … + Φ(xₙ) for the result template, with the constant counted once.
pub fn spread(rhs: &View, params: &[Name], lang: &Lang) -> View {
    let mut acc: BTreeMap<Term, LinExpr> = BTreeMap::new();
    for (t, e) in rhs {
        if t.is_unit() {
            acc.entry(t.clone()).or_default().add(e);
            continue;
        }
        for p in params {
            if let Image::Terms(ts) = image(t, &rename(&[(RESULT, p)]), lang) {
                for (u, k) in ts {
                    acc.entry(u).or_default().add_scaled(e, &k);
                }
            }
        }
    }
    acc.into_iter().collect()
}

/// Σ w(i)·(q_i − Φ(x⃗)_i) over all costed signatures.
pub fn objective(env: &SigEnv, lang: &Lang) -> LinExpr {
    let mut obj = LinExpr::zero();
    for s in env.sigs.iter().filter(|s| s.kind.is_costed()) {
        let mut cost: BTreeMap<Term, LinExpr> = BTreeMap::new();
        for (t, e) in s.lhs.view() {
            cost.entry(t).or_default().add(&e);
        }
        for (t, e) in spread(&s.rhs.view(), &s.params, lang) {
            cost.entry(t).or_default().sub(&e);
        }
        for (t, e) in cost {
            if t.is_zero_valued() {
                continue;
            }
            obj.add_scaled(&e, &crate::rat::int(t.objective_weight()));
        }
    }
    obj
}

/// Secondary objective: the plain sum of every costed and Φ coefficient.
/// Breaks ties between optimal models so bounds are canonical.
pub fn tiebreak(env: &SigEnv) -> LinExpr {
    let mut obj = LinExpr::zero();
    let phis = env.phi.values();
    let lhs = env.sigs.iter().filter(|s| s.kind.is_costed()).map(|s| &s.lhs);
    for t in phis.chain(lhs) {
        for v in &t.coeffs {
            obj.add(&LinExpr::var(*v));
        }
    }
    obj
}
