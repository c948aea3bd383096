//! Big-step cost semantics: only ticks cost anything.

use super::value::{Tree, Value};
use crate::rat::{self, Rat};
use crate::syntax::*;
use std::collections::HashMap;

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;
const MAX_CALL_DEPTH: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("{0}: evaluated `error`")]
    ErrorExpr(Span),
    #[error("{0}: call depth limit exceeded")]
    Depth(Span),
    #[error("{span}: refinement violated: {msg}")]
    Refinement { span: Span, msg: String },
    #[error("{span}: {msg}")]
    Stuck { span: Span, msg: String },
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub step_limit: u64,
    /// Check refinement predicates whenever a refined node is built.
    pub strict_refinements: bool,
    /// Ignore tick annotations (the cost-free semantics).
    pub erase_ticks: bool,
    pub trace: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            step_limit: DEFAULT_STEP_LIMIT,
            strict_refinements: false,
            erase_ticks: false,
            trace: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub depth: usize,
    pub rule: &'static str,
    pub span: Span,
    pub cost: Rat,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub value: Value,
    pub cost: Rat,
    pub steps: u64,
    pub trace: Vec<TraceEntry>,
}

pub type Env = HashMap<Name, Value>;

struct Machine<'p> {
    prog: &'p Program,
    opts: &'p EvalOptions,
    steps: u64,
    cost: Rat,
    depth: usize,
    trace: Vec<TraceEntry>,
}

fn stuck<T>(span: Span, msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Stuck { span, msg: msg.into() })
}

impl Machine<'_> {
    fn step(&mut self, rule: &'static str, span: Span) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.opts.step_limit {
            return Err(EvalError::StepLimit(self.opts.step_limit));
        }
        if self.opts.trace {
            self.trace.push(TraceEntry { depth: self.depth, rule, span, cost: self.cost.clone() });
        }
        Ok(())
    }

    fn lookup(&self, env: &[(Name, Value)], x: &str, span: Span) -> Result<Value, EvalError> {
        match env.iter().rev().find(|(n, _)| n == x) {
            Some((_, v)) => Ok(v.clone()),
            None => stuck(span, format!("unbound variable '{x}'")),
        }
    }

    fn tree(&mut self, env: &mut Vec<(Name, Value)>, e: &Expr) -> Result<Tree, EvalError> {
        match self.eval(env, e)? {
            Value::Tree(t) => Ok(t),
            v => stuck(e.span, format!("expected a tree, got {v}")),
        }
    }

    fn base(&mut self, env: &mut Vec<(Name, Value)>, e: &Expr) -> Result<i64, EvalError> {
        match &e.kind {
            ExprKind::Builtin(m, arg) => {
                let t = self.tree(env, arg)?;
                Ok(t.measure(*m) as i64)
            }
            _ => match self.eval(env, e)? {
                Value::Base(n) => Ok(n),
                v => stuck(e.span, format!("expected a base value, got {v}")),
            },
        }
    }

    fn eval(&mut self, env: &mut Vec<(Name, Value)>, e: &Expr) -> Result<Value, EvalError> {
        match &e.kind {
            ExprKind::Var(x) => {
                self.step("Var", e.span)?;
                self.lookup(env, x, e.span)
            }
            ExprKind::Bool(b) => {
                self.step("Const", e.span)?;
                Ok(Value::Bool(*b))
            }
            ExprKind::Leaf => {
                self.step("Const", e.span)?;
                Ok(Value::Tree(Tree::Leaf))
            }
            ExprKind::Error => Err(EvalError::ErrorExpr(e.span)),
            ExprKind::Node(l, a, r) => {
                self.step("Const", e.span)?;
                let l = self.tree(env, l)?;
                let a = self.base(env, a)?;
                let r = self.tree(env, r)?;
                if self.opts.strict_refinements {
                    check_refinement(e, &l, &r)?;
                }
                Ok(Value::Tree(Tree::node(l, a, r)))
            }
            ExprKind::Builtin(m, arg) => {
                let t = self.tree(env, arg)?;
                Ok(Value::Base(t.measure(*m) as i64))
            }
            ExprKind::Cmp(op, a, b) => {
                self.step("Cmp", e.span)?;
                let a = self.base(env, a)?;
                let b = self.base(env, b)?;
                Ok(Value::Bool(op.eval(a, b)))
            }
            ExprKind::If(c, t, f) => {
                self.step("Ite", e.span)?;
                match self.eval(env, c)? {
                    Value::Bool(true) => self.eval(env, t),
                    Value::Bool(false) => self.eval(env, f),
                    v => stuck(c.span, format!("expected a boolean, got {v}")),
                }
            }
            ExprKind::Match(s, arms) => {
                self.step("Match", e.span)?;
                let t = self.tree(env, s)?;
                for arm in arms {
                    match (&arm.pat, &t) {
                        (Pattern::Leaf, Tree::Leaf) => return self.eval(env, &arm.body),
                        (Pattern::Node(x, y, z), Tree::Node(l, a, r)) => {
                            let n = env.len();
                            env.push((x.clone(), Value::Tree((**l).clone())));
                            env.push((y.clone(), Value::Base(*a)));
                            env.push((z.clone(), Value::Tree((**r).clone())));
                            let v = self.eval(env, &arm.body);
                            env.truncate(n);
                            return v;
                        }
                        _ => {}
                    }
                }
                stuck(e.span, "no matching arm")
            }
            ExprKind::Let(x, e1, e2) => {
                self.step("Let", e.span)?;
                let v1 = self.eval(env, e1)?;
                env.push((x.clone(), v1));
                let v = self.eval(env, e2);
                env.pop();
                v
            }
            ExprKind::Tick(q, inner) => {
                self.step("Tick", e.span)?;
                if !self.opts.erase_ticks {
                    self.cost += q;
                }
                self.eval(env, inner)
            }
            ExprKind::App(f, args) => {
                self.step("App", e.span)?;
                let Some(def) = self.prog.fun(f) else {
                    return stuck(e.span, format!("unknown function '{f}'"));
                };
                if def.params.len() != args.len() {
                    return stuck(e.span, format!("arity mismatch calling '{f}'"));
                }
                let mut frame = Vec::with_capacity(args.len());
                for (p, a) in def.params.iter().zip(args) {
                    frame.push((p.clone(), self.eval(env, a)?));
                }
                if self.depth >= MAX_CALL_DEPTH {
                    return Err(EvalError::Depth(e.span));
                }
                self.depth += 1;
                let v = self.eval(&mut frame, &def.body);
                self.depth -= 1;
                v
            }
        }
    }
}

fn check_refinement(e: &Expr, l: &Tree, r: &Tree) -> Result<(), EvalError> {
    let (ok, msg) = match e.ty.and_then(|t| t.refinement()) {
        None => return Ok(()),
        Some(Refinement::WeightTree) => {
            (l.weight() >= r.weight(), format!("#t = {} < #u = {}", l.weight(), r.weight()))
        }
        Some(Refinement::RankTree) => {
            (l.rank() >= r.rank(), format!("†t = {} < †u = {}", l.rank(), r.rank()))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(EvalError::Refinement { span: e.span, msg })
    }
}

/// Evaluates `e` under `env` and reports its value and accumulated cost.
pub fn evaluate(p: &Program, env: &Env, e: &Expr, opts: &EvalOptions) -> Result<Outcome, EvalError> {
    let mut m = Machine { prog: p, opts, steps: 0, cost: rat::zero(), depth: 0, trace: Vec::new() };
    let mut stack: Vec<(Name, Value)> = env.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let value = m.eval(&mut stack, e)?;
    Ok(Outcome { value, cost: m.cost, steps: m.steps, trace: m.trace })
}

/// Calls function `f` on `args`.
pub fn call(p: &Program, f: &str, args: &[Value], opts: &EvalOptions) -> Result<Outcome, EvalError> {
    let def = p.fun(f).ok_or_else(|| EvalError::Stuck {
        span: Span::default(),
        msg: format!("unknown function '{f}'"),
    })?;
    if def.params.len() != args.len() {
        return stuck(def.span, format!("'{f}' expects {} argument(s)", def.params.len()));
    }
    let env: Env = def.params.iter().cloned().zip(args.iter().cloned()).collect();
    evaluate(p, &env, &def.body, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::value::parse_value;

    const SWAP: &str = "swap x = match x with | leaf -> leaf | node t a u -> let u' = ~ swap u in node u' a t";
    const SKEW: &str = "bal t a u = node u a t
meld x y = match x with
  | leaf -> y
  | node t a u -> match y with
    | leaf -> node t a u
    | node v b w -> if a <= b then bal t a (~ meld (node v b w) u) else bal v b (~ meld (node t a u) w)
";

    fn tree(s: &str) -> Value {
        parse_value(s).unwrap()
    }

    #[test]
    fn swap_costs_one_per_right_spine_node() {
        let p = load(SWAP).unwrap();
        let out = call(&p, "swap", &[tree("leaf")], &EvalOptions::default()).unwrap();
        assert_eq!((out.value, out.cost), (tree("leaf"), rat::zero()));
        let spine = tree("node leaf 1 (node leaf 2 (node leaf 3 leaf))");
        let out = call(&p, "swap", &[spine], &EvalOptions::default()).unwrap();
        assert_eq!(out.cost, rat::int(3));
    }

    #[test]
    fn skew_meld_of_singletons() {
        let p = load(SKEW).unwrap();
        let args = [tree("node leaf 3 leaf"), tree("node leaf 5 leaf")];
        let out = call(&p, "meld", &args, &EvalOptions::default()).unwrap();
        assert_eq!(out.cost, rat::one());
        assert_eq!(out.value.as_tree().unwrap().leaves(), 3);
        let erased = EvalOptions { erase_ticks: true, ..Default::default() };
        assert_eq!(call(&p, "meld", &args, &erased).unwrap().cost, rat::zero());
    }

    #[test]
    fn step_limit_and_error() {
        let p = load("f x = f x\ng x = error").unwrap();
        let opts = EvalOptions { step_limit: 100, ..Default::default() };
        assert_eq!(call(&p, "f", &[tree("leaf")], &opts).unwrap_err(), EvalError::StepLimit(100));
        assert!(matches!(call(&p, "g", &[tree("leaf")], &opts), Err(EvalError::ErrorExpr(_))));
    }

    #[test]
    fn strict_mode_rejects_bad_nodes() {
        let src = "mk :: (Tree Base @weight * Base * Tree Base @weight) -> Tree Base @weight\nmk t a u = node t a u";
        let p = load(src).unwrap();
        let args = [tree("leaf"), Value::Base(1), tree("node leaf 2 leaf")];
        assert!(call(&p, "mk", &args, &EvalOptions::default()).is_ok());
        let strict = EvalOptions { strict_refinements: true, ..Default::default() };
        assert!(matches!(call(&p, "mk", &args, &strict), Err(EvalError::Refinement { .. })));
    }
}
