//! Per-node checks of a solved derivation: each rule's potential relation,
//! evaluated on random trees. Let and App nodes are checked against the
//! interpreter, the rest structurally.

use crate::constraints::Model;
use crate::inference::{Analysis, DerivationNode, Rule};
use crate::potentials::{Lang, TreeEnv};
use crate::rat::to_f64;
use crate::semantics::eval::{evaluate, Env, EvalOptions};
use crate::semantics::gen::{random_tree, TreeKind};
use crate::semantics::value::{Tree, Value};
use crate::syntax::{Expr, ExprKind, Name, Pattern, PlainType};
use crate::templates::{Instance, PARAM_X, RESULT};
use crate::weakening::guards_hold;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub const TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Default)]
pub struct LocalReport {
    /// Valuations checked per rule name.
    pub checked: BTreeMap<String, usize>,
    pub failures: Vec<String>,
}

impl LocalReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.checked.get(&rule.to_string()).copied().unwrap_or(0)
    }
}

struct Checker<'a> {
    a: &'a Analysis,
    m: &'a Model,
    lang: &'a Lang,
    kind: TreeKind,
    rng: ChaCha8Rng,
}

fn value(i: &Instance, lang: &Lang, env: &TreeEnv) -> f64 {
    i.value(lang, env).unwrap_or(f64::NAN)
}

fn with(env: &TreeEnv, pairs: &[(&str, Tree)]) -> TreeEnv {
    let mut e = env.clone();
    for (k, v) in pairs {
        e.insert(k.to_string(), v.clone());
    }
    e
}

/// Types of the free non-tree variables of `e`.
fn scalar_vars(e: &Expr) -> BTreeMap<Name, PlainType> {
    let free = e.free_var_set();
    let mut out = BTreeMap::new();
    e.walk(&mut |s| {
        if let (ExprKind::Var(x), Some(t)) = (&s.kind, s.ty) {
            if free.contains(x) && !t.is_tree() {
                out.insert(x.clone(), t);
            }
        }
    });
    out
}

impl Checker<'_> {
    fn tree(&mut self) -> Tree {
        let n = self.rng.gen_range(1..=24);
        random_tree(n, self.kind, &mut self.rng)
    }

    /// A guard-respecting valuation of `vars` and X.
    fn env(&mut self, n: &DerivationNode, vars: &[Name]) -> Option<TreeEnv> {
        for _ in 0..200 {
            let mut env: TreeEnv = vars.iter().map(|v| (v.clone(), Tree::Leaf)).collect();
            for v in vars {
                let t = self.tree();
                env.insert(v.clone(), t);
            }
            let x = self.tree();
            env.insert(PARAM_X.to_string(), x);
            if guards_hold(&n.guards, &env) {
                return Some(env);
            }
        }
        None
    }

    fn run(&mut self, e: &Expr, env: &TreeEnv, cost_free: bool) -> Option<(Value, f64)> {
        let mut ev: Env = env.iter().filter(|(k, _)| *k != PARAM_X).map(|(k, v)| (k.clone(), Value::Tree(v.clone()))).collect();
        for (x, t) in scalar_vars(e) {
            let v = match t {
                PlainType::Bool => Value::Bool(self.rng.gen()),
                _ => Value::Base(self.rng.gen_range(0..32)),
            };
            ev.insert(x, v);
        }
        let opts = EvalOptions { erase_ticks: cost_free, ..EvalOptions::default() };
        evaluate(&self.a.prog, &ev, e, &opts).ok().map(|o| (o.value, to_f64(&o.cost)))
    }

    /// `lhs ≥ rhs` (or `=` when `eq`) at one valuation, else a failure line.
    fn expect(&self, n: &DerivationNode, lhs: f64, rhs: f64, eq: bool, env: &TreeEnv) -> Result<(), String> {
        let bad = lhs.is_nan() || rhs.is_nan() || lhs + TOLERANCE < rhs || (eq && (lhs - rhs).abs() > TOLERANCE);
        if !bad {
            return Ok(());
        }
        let env: Vec<String> = env.iter().map(|(k, v)| format!("{k}={v}")).collect();
        Err(format!("node {} {} [{}]: {lhs} {} {rhs} at {}", n.id, n.rule, n.expr, if eq { "≠" } else { "<" }, env.join(", ")))
    }

    /// One valuation of the node's relation. `Ok(false)` means skipped.
    fn once(&mut self, n: &DerivationNode) -> Result<bool, String> {
        let (m, lang, forest) = (self.m, self.lang, &self.a.forest);
        let child = |i: usize| forest.get(n.children[i]);
        let q = n.input(m);
        let q_res = n.output(m);
        let Some(env) = self.env(n, &n.ctx.clone()) else { return Ok(false) };
        let res = |t: Tree| with(&env, &[(RESULT, t)]);
        match (&n.rule, &n.source.kind) {
            (Rule::Var, ExprKind::Var(x)) => {
                let v = env[x].clone();
                self.expect(n, value(&q, lang, &env), value(&q_res, lang, &res(v)), false, &env)?;
            }
            (Rule::Pure, _) => self.expect(n, value(&q, lang, &env), value(&q_res, lang, &env), false, &env)?,
            (Rule::ConstLeaf, _) => self.expect(n, value(&q, lang, &env), value(&q_res, lang, &res(Tree::Leaf)), false, &env)?,
            (Rule::ConstNode, ExprKind::Node(l, _, r)) => {
                let (t, u) = (l.as_var().unwrap_or_default(), r.as_var().unwrap_or_default());
                let v = Tree::node(env[t].clone(), 0, env[u].clone());
                self.expect(n, value(&q, lang, &env), value(&q_res, lang, &res(v)), false, &env)?;
            }
            (Rule::Match, ExprKind::Match(s, arms)) => {
                let x = s.as_var().unwrap_or_default().to_string();
                for (i, arm) in arms.iter().enumerate() {
                    let c = child(i);
                    let p = c.input(m);
                    let Some(cenv) = self.env(c, &c.ctx.clone()) else { continue };
                    let xv = match &arm.pat {
                        Pattern::Leaf => Tree::Leaf,
                        Pattern::Node(t, _, u) => Tree::node(cenv[t].clone(), 0, cenv[u].clone()),
                    };
                    // constants like log 3 have no template term and are dropped
                    let outer = with(&cenv, &[(&x, xv)]);
                    self.expect(n, value(&q, lang, &outer), value(&p, lang, &cenv), false, &outer)?;
                }
            }
            (Rule::Ite, _) => {
                for i in 0..2 {
                    let c = child(i);
                    self.expect(n, value(&q, lang, &env), value(&c.input(m), lang, &env), true, &env)?;
                }
            }
            (Rule::W | Rule::WVar, _) => {
                let c = child(0);
                self.expect(n, value(&q, lang, &env), value(&c.input(m), lang, &env), false, &env)?;
            }
            (Rule::Share, _) => {
                let c = child(0);
                let z2 = c.ctx.iter().find(|v| !n.ctx.contains(v)).cloned().unwrap_or_default();
                let z = n.detail.split(" -> ").next().unwrap_or_default().to_string();
                let inner = with(&env, &[(&z2, env[&z].clone())]);
                self.expect(n, value(&q, lang, &env), value(&c.input(m), lang, &inner), true, &inner)?;
            }
            (Rule::Tick, ExprKind::Tick(a, _)) => {
                let c = child(0);
                let cost = if n.cost_free { 0.0 } else { to_f64(a) };
                let v = self.tree();
                let e = res(v);
                self.expect(n, value(&c.output(m), lang, &e), cost + value(&q_res, lang, &e), false, &e)?;
                self.expect(n, value(&q, lang, &env), value(&c.input(m), lang, &env), false, &env)?;
            }
            (Rule::Shift, _) => {
                let c = child(0);
                let e = res(self.tree());
                let before = value(&q, lang, &env) - value(&c.input(m), lang, &env);
                let after = value(&q_res, lang, &e) - value(&c.output(m), lang, &e);
                self.expect(n, before, after, true, &e)?;
                self.expect(n, before, 0.0, false, &e)?;
            }
            (Rule::App, _) => {
                let Some((v, cost)) = self.run(&n.source, &env, n.cost_free) else { return Ok(false) };
                let e = match v {
                    Value::Tree(t) => res(t),
                    _ => env.clone(),
                };
                self.expect(n, value(&q, lang, &env), cost + value(&q_res, lang, &e), false, &e)?;
            }
            (Rule::Let, ExprKind::Let(x, e1, _)) => {
                let (c1, c2) = (child(0), child(1));
                let Some((v, _)) = self.run(e1, &env, true) else { return Ok(false) };
                let (p_res_v, body) = match &v {
                    Value::Tree(t) => (value(&c1.output(m), lang, &res(t.clone())), with(&env, &[(x, t.clone())])),
                    _ => (value(&c1.output(m), lang, &env), env.clone()),
                };
                let lhs = value(&q, lang, &env) - value(&c1.input(m), lang, &env) + p_res_v;
                self.expect(n, lhs, value(&c2.input(m), lang, &body), false, &body)?;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Checks `samples` valuations at every node of a solved analysis.
pub fn check_forest(a: &Analysis, m: &Model, kind: TreeKind, samples: usize, seed: u64) -> LocalReport {
    let mut ck = Checker { a, m, lang: &a.cfg.lang, kind, rng: ChaCha8Rng::seed_from_u64(seed) };
    let mut rep = LocalReport::default();
    for n in &a.forest.nodes {
        let mut done = 0;
        for _ in 0..samples {
            match ck.once(n) {
                Ok(true) => done += 1,
                Ok(false) => {}
                Err(msg) => {
                    rep.failures.push(msg);
                    break;
                }
            }
        }
        *rep.checked.entry(n.rule.to_string()).or_default() += done;
    }
    rep
}
