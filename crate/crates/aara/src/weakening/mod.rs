//! Weakening Q ≥ P: Farkas certificates over instantiated expert knowledge.
//!
//! For fact rows A·t ≤ b (t the non-constant term values) the encoding asks
//! for multipliers f ≥ 0 with
//!
//!   p_i − q_i ≤ (fᵀA)_i  for every non-constant term i,
//!   fᵀb ≤ q_1 − p_1.
//!
//! Then P − Q ≤ fᵀA·t ≤ fᵀb ≤ Q_1 − P_1 on every valuation the facts hold on.

pub mod facts;
pub mod guards;

pub use facts::{build_facts, l4_pair, size_le, FactBase, FactRow, Knowledge, SizeForm};
pub use guards::{Guard, GuardSet};

use crate::constraints::{ConstraintSet, LinExpr, Model, Provenance, VarId, VarKind};
use crate::potentials::{term_value, Lang, TreeEnv};
use crate::rat::{fmt_rat, to_f64, zero, Rat};
use crate::semantics::{random_tree, Tree, TreeKind};
use crate::syntax::{Measure, Name};
use crate::templates::{Term, View};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

/// Fact bases keyed by context and guards.
#[derive(Default)]
pub struct FactCache {
    map: HashMap<(Vec<Name>, String), Arc<FactBase>>,
}

impl FactCache {
    pub fn new() -> FactCache {
        FactCache::default()
    }

    pub fn get(&mut self, lang: &Lang, vars: &[Name], guards: &GuardSet, k: &Knowledge, universe: &[Term]) -> Arc<FactBase> {
        let mut key_vars = vars.to_vec();
        key_vars.sort();
        let g = guards.within(&key_vars);
        let key = (key_vars, g.to_string());
        self.map
            .entry(key)
            .or_insert_with(|| Arc::new(build_facts(lang, vars, &g, k, universe)))
            .clone()
    }
}

/// A weakening step Q ≥ P together with its multipliers.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub node: usize,
    pub vars: Vec<Name>,
    pub guards: GuardSet,
    pub facts: Arc<FactBase>,
    pub multipliers: Vec<VarId>,
    pub q: View,
    pub p: View,
}

fn collect(view: &View) -> BTreeMap<Term, LinExpr> {
    let mut m: BTreeMap<Term, LinExpr> = BTreeMap::new();
    for (t, e) in view {
        if t.is_zero_valued() {
            continue;
        }
        m.entry(t.clone()).or_default().add(e);
    }
    m
}

/// Emits the Farkas constraints for Q ≥ P at `node`.
pub fn farkas_encode(
    cs: &mut ConstraintSet,
    node: usize,
    vars: &[Name],
    guards: &GuardSet,
    facts: Arc<FactBase>,
    q: View,
    p: View,
) -> Certificate {
    let prov = Provenance::new(node, "W", "farkas");
    let mults: Vec<VarId> =
        (0..facts.rows.len()).map(|r| cs.fresh(format!("f{node}_{r}"), VarKind::Multiplier, node)).collect();
    let (qm, pm) = (collect(&q), collect(&p));
    let mut columns: BTreeMap<Term, LinExpr> = BTreeMap::new();
    for (t, e) in &pm {
        if !t.is_constant() {
            columns.entry(t.clone()).or_default().add(e);
        }
    }
    for (t, e) in &qm {
        if !t.is_constant() {
            columns.entry(t.clone()).or_default().sub(e);
        }
    }
    let mut bound = LinExpr::zero();
    for (r, row) in facts.rows.iter().enumerate() {
        for (t, k) in &row.coeffs {
            columns.entry(t.clone()).or_default().add_term(mults[r], -k.clone());
        }
        bound.add_term(mults[r], row.bound.clone());
    }
    for (t, e) in columns {
        cs.le(e, &LinExpr::zero(), with_term(&prov, &t));
    }
    let unit = Term::unit();
    let q1 = qm.get(&unit).cloned().unwrap_or_default();
    let p1 = pm.get(&unit).cloned().unwrap_or_default();
    cs.le(bound, &q1.minus(&p1), with_term(&prov, &unit));
    Certificate { node, vars: vars.to_vec(), guards: guards.clone(), facts, multipliers: mults, q, p }
}

fn with_term(p: &Provenance, t: &Term) -> Provenance {
    Provenance::new(p.node, &p.rule, format!("{}:{t}", p.tag))
}

/// Audit failures for one certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum AuditError {
    NegativeMultiplier(usize),
    Column(String),
    Constant,
    Sample { env: String, q: f64, p: f64 },
}

impl std::fmt::Display for AuditError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AuditError::NegativeMultiplier(r) => write!(f, "multiplier {r} is negative"),
            AuditError::Column(t) => write!(f, "column {t} violated"),
            AuditError::Constant => write!(f, "constant column violated"),
            AuditError::Sample { env, q, p } => write!(f, "Q = {q} < P = {p} at {env}"),
        }
    }
}

impl Certificate {
    /// Multiplier values with their rows, nonzero ones only.
    pub fn used_rows(&self, m: &Model) -> Vec<(Rat, &FactRow)> {
        self.multipliers
            .iter()
            .zip(&self.facts.rows)
            .map(|(v, r)| (m.get(*v), r))
            .filter(|(k, _)| k != &zero())
            .collect()
    }

    /// Exact re-check of the linear certificate.
    pub fn check_exact(&self, m: &Model) -> Result<(), AuditError> {
        let f: Vec<Rat> = self.multipliers.iter().map(|v| m.get(*v)).collect();
        if let Some(r) = f.iter().position(|k| k < &zero()) {
            return Err(AuditError::NegativeMultiplier(r));
        }
        let val = |view: &View| -> BTreeMap<Term, Rat> {
            let mut out: BTreeMap<Term, Rat> = BTreeMap::new();
            for (t, e) in view {
                if !t.is_zero_valued() {
                    *out.entry(t.clone()).or_insert_with(zero) += e.eval(m);
                }
            }
            out
        };
        let (qv, pv) = (val(&self.q), val(&self.p));
        let mut cols: BTreeMap<Term, Rat> = BTreeMap::new();
        for (t, k) in &pv {
            *cols.entry(t.clone()).or_insert_with(zero) += k;
        }
        for (t, k) in &qv {
            *cols.entry(t.clone()).or_insert_with(zero) -= k;
        }
        let mut fb = zero();
        for (k, row) in f.iter().zip(&self.facts.rows) {
            for (t, a) in &row.coeffs {
                *cols.entry(t.clone()).or_insert_with(zero) -= k * a;
            }
            fb += k * &row.bound;
        }
        let unit = Term::unit();
        for (t, v) in &cols {
            if !t.is_constant() && v > &zero() {
                return Err(AuditError::Column(t.to_string()));
            }
        }
        let q1 = qv.get(&unit).cloned().unwrap_or_default();
        let p1 = pv.get(&unit).cloned().unwrap_or_default();
        if fb > q1 - p1 {
            return Err(AuditError::Constant);
        }
        Ok(())
    }

    /// Numeric check of Q ≥ P on random guard-respecting trees.
    pub fn check_samples(&self, lang: &Lang, kind: TreeKind, m: &Model, samples: usize, seed: u64) -> Result<usize, AuditError> {
        let inst = |view: &View| -> Vec<(Term, f64)> {
            view.iter().map(|(t, e)| (t.clone(), to_f64(&e.eval(m)))).filter(|(_, k)| *k != 0.0).collect()
        };
        let (qi, pi) = (inst(&self.q), inst(&self.p));
        let mut names: BTreeSet<Name> = self.vars.iter().cloned().collect();
        for (t, _) in qi.iter().chain(&pi) {
            names.extend(t.vars().into_iter().cloned());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ self.node as u64);
        let mut done = 0;
        let mut tries = 0;
        while done < samples && tries < samples * 50 {
            tries += 1;
            let env: TreeEnv =
                names.iter().map(|n| (n.clone(), random_tree(rng.gen_range(0..24), kind, &mut rng))).collect();
            if !guards_hold(&self.guards, &env) {
                continue;
            }
            done += 1;
            let sum = |ts: &[(Term, f64)]| -> f64 { ts.iter().map(|(t, k)| k * term_value(t, lang, &env).unwrap_or(0.0)).sum() };
            let (q, p) = (sum(&qi), sum(&pi));
            if q + 1e-6 < p {
                let env = env.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ");
                return Err(AuditError::Sample { env, q, p });
            }
        }
        Ok(done)
    }

    pub fn render(&self, m: &Model) -> String {
        let mut out = String::new();
        for (k, r) in self.used_rows(m) {
            out.push_str(&format!("{} × {}\n", fmt_rat(&k), r));
        }
        out
    }
}

fn measure(t: &Tree, m: Measure) -> i64 {
    match m {
        Measure::Weight => t.leaves() as i64,
        Measure::Rank => t.rank() as i64,
    }
}

/// Whether every guard holds in an environment (unbound names pass).
pub fn guards_hold(g: &GuardSet, env: &TreeEnv) -> bool {
    g.iter().all(|g| match (env.get(&g.lhs), env.get(&g.rhs)) {
        (Some(l), Some(r)) => g.holds(measure(l, g.measure), measure(r, g.measure)),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Constraint;
    use crate::rat::{int, rat};
    use crate::syntax::CmpOp;
    use crate::templates::{enumerate_terms, Caps, Template};

    fn names(v: &[&str]) -> Vec<Name> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Q = log(t+u) with P = ½ log t + ½ log u + 1 is exactly L1.
    #[test]
    fn l1_certificate_checks() {
        let mut cs = ConstraintSet::new();
        let vars = names(&["t", "u"]);
        let lang = Lang::Log;
        let uni = enumerate_terms(&lang, &vars, false, &Caps::default());
        let q = Template::fresh(&mut cs, "Q", 0, &vars, false, uni.clone());
        let p = Template::fresh(&mut cs, "P", 0, &vars, false, uni.clone());
        let facts = Arc::new(build_facts(&lang, &vars, &GuardSet::new(), &Knowledge::defaults(&lang), &uni));
        let cert = farkas_encode(&mut cs, 0, &vars, &GuardSet::new(), facts.clone(), q.view(), p.view());
        let mut m = Model::new();
        m.set(q.coef(&Term::log(&["t", "u"], 0)).unwrap(), int(1));
        m.set(p.coef(&Term::log(&["t"], 0)).unwrap(), rat(1, 2));
        m.set(p.coef(&Term::log(&["u"], 0)).unwrap(), rat(1, 2));
        m.set(p.coef(&Term::unit()).unwrap(), int(1));
        let l1 = facts.rows.iter().position(|r| r.lemma == "L1" && r.coeffs.len() == 3 && r.bound == int(-1)).unwrap();
        m.set(cert.multipliers[l1], int(1));
        // unrelated L1 instances with offsets stay at zero
        assert!(cs.violations(&m).is_empty(), "{:?}", cs.violations(&m));
        cert.check_exact(&m).unwrap();
        assert_eq!(cert.check_samples(&lang, TreeKind::Any, &m, 100, 1).unwrap(), 100);
        // raising P breaks it
        m.set(p.coef(&Term::unit()).unwrap(), rat(3, 2));
        assert!(cert.check_exact(&m).is_err());
        assert!(matches!(cs.items.iter().find(|(c, _)| !c.holds(&m)), Some((Constraint::Atom(_), _))));
    }

    #[test]
    fn guard_sampling_respects_guards() {
        let g = GuardSet::new().with(Guard::new(Measure::Weight, "t", CmpOp::Ge, "u"));
        let mut env = TreeEnv::new();
        env.insert("t".into(), Tree::Leaf);
        env.insert("u".into(), Tree::node(Tree::Leaf, 1, Tree::Leaf));
        assert!(!guards_hold(&g, &env));
        env.insert("u".into(), Tree::Leaf);
        assert!(guards_hold(&g, &env));
    }
}
