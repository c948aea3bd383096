//! Differential soundness: solved signatures against the cost-instrumented
//! interpreter. Every run must satisfy Ψ(args) ≥ cost + Φ(result).

pub mod local;

use crate::inference::run::{AnalysisResult, Bound};
use crate::inference::SigKind;
use crate::potentials::{Lang, TreeEnv};
use crate::rat::{to_f64, Rat};
use crate::semantics::eval::{call, EvalError, EvalOptions};
use crate::semantics::gen::{random_tree, TreeKind};
use crate::semantics::value::{Tree, Value};
use crate::syntax::{FunDef, PlainType, Program};
use crate::templates::{Instance, PARAM_X, RESULT};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub args: Vec<String>,
    pub x_size: Option<u64>,
    pub cost: f64,
    pub psi: f64,
    pub phi: f64,
    /// ψ − cost − φ; negative means a violation.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigReport {
    pub signature: String,
    pub trials: usize,
    /// Runs that ended in `error` or broke a refinement and were skipped.
    pub skipped: usize,
    pub tightest: Option<Witness>,
    /// A shrunk counterexample, if any run violated the bound.
    pub violation: Option<Witness>,
}

impl SigReport {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub trials: usize,
    pub max_size: u64,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Settings {
        Settings { trials: 1000, max_size: 64, seed: 0 }
    }
}

/// One signature under test: the function, its instantiated annotations and
/// whether ticks count.
pub struct Subject<'a> {
    pub prog: &'a Program,
    pub fun: &'a FunDef,
    pub lang: &'a Lang,
    pub lhs: &'a Instance,
    pub rhs: &'a Instance,
    pub cost_free: bool,
    pub label: String,
}

impl Subject<'_> {
    fn uses_x(&self) -> bool {
        let m = |i: &Instance| i.terms.iter().any(|(t, _)| t.mentions(PARAM_X));
        m(self.lhs) || m(self.rhs)
    }

    /// The margin of one run, or `None` if the run is outside the bound's
    /// premise (error, refinement violation).
    pub fn run(&self, args: &[Value], x: Option<&Tree>) -> Option<Witness> {
        let opts = EvalOptions { erase_ticks: self.cost_free, strict_refinements: true, ..EvalOptions::default() };
        let out = match call(self.prog, &self.fun.name, args, &opts) {
            Ok(o) => o,
            Err(EvalError::ErrorExpr(_) | EvalError::Refinement { .. }) => return None,
            Err(e) => panic!("evaluation of {} failed: {e}", self.fun.name),
        };
        let mut env = TreeEnv::new();
        for (p, a) in self.fun.params.iter().zip(args) {
            if let Value::Tree(t) = a {
                env.insert(p.clone(), t.clone());
            }
        }
        if let Some(x) = x {
            env.insert(PARAM_X.to_string(), x.clone());
        }
        let psi = self.lhs.value(self.lang, &env).expect("Ψ is defined on its arguments");
        let mut res_env = TreeEnv::new();
        if let Value::Tree(t) = &out.value {
            res_env.insert(RESULT.to_string(), t.clone());
        }
        if let Some(x) = x {
            res_env.insert(PARAM_X.to_string(), x.clone());
        }
        let phi = self.rhs.value(self.lang, &res_env).expect("Φ is defined on the result");
        let cost = to_f64(&out.cost);
        Some(Witness {
            args: args.iter().map(|a| a.to_string()).collect(),
            x_size: x.map(|t| t.leaves()),
            cost,
            psi,
            phi,
            margin: psi - cost - phi,
        })
    }
}

fn kind_of(t: PlainType) -> TreeKind {
    TreeKind::for_type(t)
}

/// Spines and near-balanced trees: the shapes where amortised bounds are tight.
pub fn special_trees(size: u64, kind: TreeKind) -> Vec<Tree> {
    let n = size.max(1) - 1;
    let right = (0..n).rev().fold(Tree::Leaf, |acc, i| Tree::node(Tree::Leaf, i as i64, acc));
    let left = (0..n).rev().fold(Tree::Leaf, |acc, i| Tree::node(acc, i as i64, Tree::Leaf));
    fn balanced(n: u64, base: i64) -> Tree {
        if n == 0 {
            return Tree::Leaf;
        }
        let l = (n - 1).div_ceil(2);
        Tree::node(balanced(l, base + 1), base, balanced(n - 1 - l, base + 1 + l as i64))
    }
    let all = [right, left, balanced(n, 0)];
    all.into_iter()
        .filter(|t| match kind {
            TreeKind::WeightBiased => t.is_weight_biased(),
            TreeKind::RankBiased => t.is_rank_biased(),
            _ => true,
        })
        .collect()
}

fn random_args(f: &FunDef, max: u64, rng: &mut ChaCha8Rng, special: bool) -> Vec<Value> {
    f.param_types
        .iter()
        .map(|t| match t {
            PlainType::Bool => Value::Bool(rng.gen()),
            PlainType::Base => Value::Base(rng.gen_range(0..64)),
            t => {
                let size = rng.gen_range(1..=max.max(1));
                if special {
                    let mut cands = special_trees(size, kind_of(*t));
                    if !cands.is_empty() {
                        let i = rng.gen_range(0..cands.len());
                        let t = cands.swap_remove(i);
                        let t = if rng.gen() { relabel(&t, rng) } else { offset_keys(t, rng.gen_range(0..3)) };
                        return Value::Tree(t);
                    }
                }
                Value::Tree(random_tree(size, kind_of(*t), rng))
            }
        })
        .collect()
}

fn offset_keys(t: Tree, k: i64) -> Tree {
    match t {
        Tree::Leaf => Tree::Leaf,
        Tree::Node(l, a, r) => Tree::node(offset_keys((*l).clone(), k), a * 2 + k, offset_keys((*r).clone(), k)),
    }
}

fn shift_keys(t: &Tree, d: i64) -> Tree {
    match t {
        Tree::Leaf => Tree::Leaf,
        Tree::Node(l, a, r) => Tree::node(shift_keys(l, d), a + d, shift_keys(r, d)),
    }
}

/// Same shape, keys a random heap order: the root takes the least key and
/// the rest are split at random between the children.
fn relabel(t: &Tree, rng: &mut ChaCha8Rng) -> Tree {
    fn go(t: &Tree, mut keys: Vec<i64>, rng: &mut ChaCha8Rng) -> Tree {
        let Tree::Node(l, _, r) = t else { return Tree::Leaf };
        keys.sort_unstable();
        let root = keys.remove(0);
        keys.shuffle(rng);
        let right = keys.split_off(l.weight() as usize);
        Tree::node(go(l, keys, rng), root, go(r, right, rng))
    }
    go(t, (0..t.weight() as i64).map(|k| 2 * k).collect(), rng)
}

/// Smaller argument vectors: each tree argument replaced by one of its children.
fn shrinks(args: &[Value]) -> Vec<Vec<Value>> {
    let mut out = Vec::new();
    for (i, a) in args.iter().enumerate() {
        if let Value::Tree(Tree::Node(l, _, r)) = a {
            for c in [l, r] {
                let mut v = args.to_vec();
                v[i] = Value::Tree((**c).clone());
                out.push(v);
            }
        }
    }
    out
}

/// Greedy shrinking of a violating input.
fn shrink(s: &Subject, mut args: Vec<Value>, x: Option<&Tree>, mut w: Witness) -> Witness {
    'outer: loop {
        for cand in shrinks(&args) {
            if let Some(cw) = s.run(&cand, x) {
                if cw.margin < -TOLERANCE {
                    args = cand;
                    w = cw;
                    continue 'outer;
                }
            }
        }
        return w;
    }
}

/// Rebuilds `t` with the subtree at preorder position `*at` replaced by `f` of it.
fn edit_at(t: &Tree, at: &mut usize, f: &mut impl FnMut(&Tree) -> Tree) -> Tree {
    if *at == 0 {
        *at = usize::MAX;
        return f(t);
    }
    *at -= 1;
    match t {
        Tree::Leaf => Tree::Leaf,
        Tree::Node(l, a, r) => {
            let l2 = edit_at(l, at, f);
            let r2 = edit_at(r, at, f);
            Tree::node(l2, *a, r2)
        }
    }
}

/// A random local change: swap two children, reorder the keys of a subtree,
/// prune a subtree or graft a small random one. The caller rejects results
/// outside the generator's population.
fn mutate(t: &Tree, kind: TreeKind, rng: &mut ChaCha8Rng) -> Tree {
    let mut at = rng.gen_range(0..(t.weight() + t.leaves()) as usize);
    let op = rng.gen_range(0..4);
    edit_at(t, &mut at, &mut |s| match (op, s) {
        (0, Tree::Node(l, a, r)) => Tree::node((**r).clone(), *a, (**l).clone()),
        (1, Tree::Node(_, a, _)) => shift_keys(&relabel(s, rng), *a),
        (2, _) => Tree::Leaf,
        _ => {
            let floor = rng.gen_range(0..64);
            shift_keys(&random_tree(rng.gen_range(1..=8), kind, rng), floor)
        }
    })
}

const CLIMB_STARTS: usize = 4;

/// Random and adversarial trials for one signature, then a hill climb from
/// the tightest inputs seen.
pub fn check_subject(s: &Subject, st: &Settings) -> SigReport {
    let mut rng = ChaCha8Rng::seed_from_u64(st.seed);
    let mut report = SigReport { signature: s.label.clone(), trials: 0, skipped: 0, tightest: None, violation: None };
    let uses_x = s.uses_x();
    let mut starts: Vec<(f64, Vec<Value>, Option<Tree>)> = Vec::new();
    for trial in 0..st.trials {
        let args = random_args(s.fun, st.max_size, &mut rng, trial % 4 == 3);
        let x = uses_x.then(|| random_tree(rng.gen_range(1..=2 * st.max_size), TreeKind::Any, &mut rng));
        report.trials += 1;
        let Some(w) = s.run(&args, x.as_ref()) else {
            report.skipped += 1;
            continue;
        };
        if w.margin < -TOLERANCE {
            report.violation = Some(shrink(s, args, x.as_ref(), w));
            return report;
        }
        // runs that cost nothing are tight only trivially
        let key = if w.cost > 0.0 { w.margin } else { f64::INFINITY };
        starts.push((key, args, x));
        starts.sort_by(|a, b| a.0.total_cmp(&b.0));
        starts.truncate(CLIMB_STARTS);
        if report.tightest.as_ref().is_none_or(|t| w.margin < t.margin) {
            report.tightest = Some(w);
        }
    }
    let trees: Vec<usize> = s.fun.param_types.iter().enumerate().filter(|(_, t)| t.is_tree()).map(|(i, _)| i).collect();
    if trees.is_empty() {
        return report;
    }
    for (mut margin, mut args, x) in starts {
        if margin.is_infinite() {
            margin = s.run(&args, x.as_ref()).map_or(f64::INFINITY, |w| w.margin);
        }
        for _ in 0..st.trials / CLIMB_STARTS {
            let i = trees[rng.gen_range(0..trees.len())];
            let Value::Tree(t) = &args[i] else { continue };
            let kind = kind_of(s.fun.param_types[i]);
            let t2 = mutate(t, kind, &mut rng);
            if t2.leaves() > st.max_size + 1 || !kind.admits(&t2) {
                continue;
            }
            let mut cand = args.clone();
            cand[i] = Value::Tree(t2);
            report.trials += 1;
            let Some(w) = s.run(&cand, x.as_ref()) else {
                report.skipped += 1;
                continue;
            };
            if w.margin < -TOLERANCE {
                report.violation = Some(shrink(s, cand, x.as_ref(), w));
                return report;
            }
            if w.margin <= margin {
                margin = w.margin;
                args = cand;
                if report.tightest.as_ref().is_none_or(|t| w.margin < t.margin) {
                    report.tightest = Some(w);
                }
            }
        }
    }
    report
}

/// Checks every costed signature (with ticks) and every cost-free signature
/// (ticks erased) of a solved analysis.
pub fn check_result(res: &AnalysisResult, st: &Settings) -> Vec<SigReport> {
    let a = &res.analysis;
    let Some(model) = &res.model else { return Vec::new() };
    let mut out = Vec::new();
    for (i, sig) in a.sigs.sigs.iter().enumerate() {
        let fun = a.prog.fun(&sig.fun).expect("signature of a known function");
        let lhs = sig.lhs.instantiate(model);
        let rhs = sig.rhs.instantiate(model);
        let subject = Subject {
            prog: &a.prog,
            fun,
            lang: &a.cfg.lang,
            lhs: &lhs,
            rhs: &rhs,
            cost_free: sig.kind == SigKind::CostFree,
            label: sig.label(),
        };
        let st = Settings { seed: st.seed.wrapping_add(i as u64), ..st.clone() };
        out.push(check_subject(&subject, &st));
    }
    out
}

/// Outcome of halving one coefficient of a costed bound.
#[derive(Clone, Debug, Serialize)]
pub struct Mutation {
    pub signature: String,
    pub term: String,
    pub detected: bool,
}

/// Halves each nonzero coefficient of every costed Ψ in turn and reports
/// whether the differential check notices.
pub fn mutation_check(res: &AnalysisResult, st: &Settings) -> Vec<Mutation> {
    let a = &res.analysis;
    let mut out = Vec::new();
    for b in &res.bounds {
        let fun = a.prog.fun(&b.fun).expect("bound of a known function");
        for (j, (t, q)) in b.lhs.terms.iter().enumerate() {
            let mut lhs = b.lhs.clone();
            lhs.terms[j].1 = q / Rat::from_integer(2.into());
            let subject = Subject {
                prog: &a.prog,
                fun,
                lang: &a.cfg.lang,
                lhs: &lhs,
                rhs: &b.rhs,
                cost_free: false,
                label: b.label.clone(),
            };
            let detected = !check_subject(&subject, st).ok();
            out.push(Mutation { signature: b.label.clone(), term: t.to_string(), detected });
        }
    }
    out
}

/// Result of the telescoped operation-sequence check.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub operations: usize,
    pub actual: f64,
    /// Σ amortised bounds + potential brought in − final potential.
    pub budget: f64,
}

impl SequenceReport {
    pub fn ok(&self) -> bool {
        self.actual <= self.budget + TOLERANCE
    }
}

fn amortised(b: &Bound, lang: &Lang, args: &[&Tree]) -> f64 {
    let env: TreeEnv = b.params.iter().cloned().zip(args.iter().map(|t| (*t).clone())).collect();
    b.cost.value(lang, &env).expect("bound is defined on its arguments")
}

fn potential(b: &Bound, lang: &Lang, t: &Tree) -> f64 {
    let env: TreeEnv = [(RESULT.to_string(), t.clone())].into();
    b.rhs.value(lang, &env).expect("Φ is defined")
}

/// `n` inserts (meld with a singleton) followed by `n` delete_mins, starting
/// from the empty heap. Needs costed bounds for `meld` and `delete_min`.
pub fn sequence_check(res: &AnalysisResult, n: usize, seed: u64) -> Option<SequenceReport> {
    let prog = &res.analysis.prog;
    let lang = &res.analysis.cfg.lang;
    let meld = res.bound("meld")?;
    let del = res.bound("delete_min")?;
    let opts = EvalOptions { strict_refinements: true, ..EvalOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut heap = Tree::Leaf;
    let mut actual = 0.0;
    let mut budget = potential(meld, lang, &heap);
    for _ in 0..n {
        let single = Tree::node(Tree::Leaf, rng.gen_range(0..1000), Tree::Leaf);
        budget += amortised(meld, lang, &[&single, &heap]) + potential(meld, lang, &single);
        let out = call(prog, "meld", &[Value::Tree(single), Value::Tree(heap)], &opts).ok()?;
        actual += to_f64(&out.cost);
        heap = out.value.as_tree()?.clone();
    }
    for _ in 0..n {
        budget += amortised(del, lang, &[&heap]);
        let out = call(prog, "delete_min", &[Value::Tree(heap)], &opts).ok()?;
        actual += to_f64(&out.cost);
        heap = out.value.as_tree()?.clone();
    }
    budget -= potential(del, lang, &heap);
    Some(SequenceReport { operations: 2 * n, actual, budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    #[test]
    fn relabel_keeps_shape_and_heap_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in special_trees(40, TreeKind::Any) {
            for _ in 0..20 {
                let u = relabel(&t, &mut rng);
                assert!(u.is_heap_ordered());
                assert_eq!(u.weight(), t.weight());
                assert_eq!(u.rank(), t.rank());
                assert_eq!(u.is_rank_biased(), t.is_rank_biased());
            }
        }
    }
    use crate::syntax::load;
    use crate::templates::Term;

    const SWAP: &str = "swap :: Tree Base -> Tree Base\nswap x = match x with\n  | leaf -> leaf\n  | node t a u -> let u' = ~ swap u in node u' a t\n";

    #[test]
    fn swap_bound_holds_and_halving_breaks_it() {
        let prog = load(SWAP).unwrap();
        let lang = Lang::Sol(crate::potentials::SolParams::right());
        let lhs = Instance { terms: vec![(Term::log(&["x"], 0), int(1)), (Term::Phi("x".into()), int(1))] };
        let rhs = Instance { terms: vec![(Term::Phi(RESULT.into()), int(1))] };
        let fun = prog.fun("swap").unwrap();
        let s = Subject { prog: &prog, fun, lang: &lang, lhs: &lhs, rhs: &rhs, cost_free: false, label: "swap".into() };
        let st = Settings { trials: 300, ..Settings::default() };
        assert!(check_subject(&s, &st).ok());

        let half = Instance { terms: vec![(Term::log(&["x"], 0), crate::rat::rat(1, 2)), (Term::Phi("x".into()), int(1))] };
        let s = Subject { lhs: &half, ..s };
        let r = check_subject(&s, &st);
        let w = r.violation.expect("halved bound is violated");
        assert!(w.margin < 0.0);
    }

    #[test]
    fn spine_margin_matches_hand_computation() {
        // right spine with 8 nodes: cost 8, log 9 + φ(x) on the left
        let prog = load(SWAP).unwrap();
        let lang = Lang::Sol(crate::potentials::SolParams::right());
        let lhs = Instance { terms: vec![(Term::log(&["x"], 0), int(1)), (Term::Phi("x".into()), int(1))] };
        let rhs = Instance { terms: vec![(Term::Phi(RESULT.into()), int(1))] };
        let s = Subject { prog: &prog, fun: prog.fun("swap").unwrap(), lang: &lang, lhs: &lhs, rhs: &rhs, cost_free: false, label: "swap".into() };
        let spine = special_trees(9, TreeKind::Any).remove(0);
        let w = s.run(&[Value::Tree(spine.clone())], None).unwrap();
        assert_eq!(w.cost, 8.0);
        let phi = |t: &Tree| crate::potentials::phi(&lang, t);
        let expect = 9f64.log2() + phi(&spine) - 8.0 - (w.phi);
        assert!((w.margin - expect).abs() < 1e-9);
        assert!(w.margin >= -TOLERANCE);
    }

    #[test]
    fn special_trees_respect_kinds() {
        for t in special_trees(12, TreeKind::WeightBiased) {
            assert!(t.is_weight_biased());
            assert_eq!(t.leaves(), 12);
        }
        for t in special_trees(12, TreeKind::RankBiased) {
            assert!(t.is_rank_biased());
        }
    }
}
