//! Template languages and resource templates with symbolic coefficients.

pub mod subst;
pub mod term;

use crate::constraints::ir::{ConstraintSet, LinExpr, Model, VarId, VarKind};
use crate::potentials::{term_value, Lang, TermError, TreeEnv};
use crate::rat::{to_f64, Rat};
use crate::syntax::Name;
use num_traits::Zero;
use serde::Serialize;
use std::collections::HashMap;
pub use term::{display_name, Term, PARAM_X, RESULT};

/// Limits on the Iverson subset enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Maximum number of program variables on each side of a bracket.
    pub iverson_side: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { iverson_side: 2 }
    }
}

fn subsets(vars: &[Name]) -> Vec<Vec<Name>> {
    let n = vars.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| vars[i].clone()).collect());
    }
    out.sort_by(|a: &Vec<Name>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Log terms log(Σ|x| + c) over subsets of `vars`.
pub fn log_terms(vars: &[Name]) -> Vec<Term> {
    let mut vars = vars.to_vec();
    vars.sort();
    let mut out = Vec::new();
    for s in subsets(&vars) {
        for c in term::MIN_OFFSET..=term::MAX_OFFSET {
            if s.len() as i64 + c as i64 >= 1 {
                out.push(Term::Log { vars: s.clone(), c });
            }
        }
    }
    out
}

/// Bracket [Σ|L| + c < Σ|R|] is constant when L is empty and c < |R|.
pub fn iverson_is_constant(lhs: &[Name], c: i8, rhs: &[Name]) -> bool {
    lhs.is_empty() && (c as i64) < rhs.len() as i64
}

/// Iverson brackets over disjoint subsets of `vars` (plus X when `has_x`).
pub fn iverson_terms(vars: &[Name], has_x: bool, caps: &Caps) -> Vec<Term> {
    let mut vars = vars.to_vec();
    vars.sort();
    let n = vars.len();
    let mut out = Vec::new();
    let xs: &[bool] = if has_x { &[false, true] } else { &[false] };
    // 0: absent, 1: lhs, 2: rhs
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut k = code;
        for v in &vars {
            match k % 3 {
                1 => lhs.push(v.clone()),
                2 => rhs.push(v.clone()),
                _ => {}
            }
            k /= 3;
        }
        if lhs.len() > caps.iverson_side || rhs.len() > caps.iverson_side {
            continue;
        }
        for &x_side in xs {
            for side in if x_side { vec![1, 2] } else { vec![0] } {
                let mut l = lhs.clone();
                let mut r = rhs.clone();
                if side == 1 {
                    l.push(PARAM_X.to_string());
                } else if side == 2 {
                    r.push(PARAM_X.to_string());
                }
                if r.is_empty() {
                    continue;
                }
                l.sort();
                r.sort();
                for c in term::MIN_OFFSET..=term::MAX_OFFSET {
                    if !iverson_is_constant(&l, c, &r) {
                        out.push(Term::Iverson { lhs: l.clone(), c, rhs: r.clone() });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// All terms of the language over the given tree variables.
pub fn enumerate_terms(lang: &Lang, vars: &[Name], has_x: bool, caps: &Caps) -> Vec<Term> {
    let mut out = log_terms(vars);
    let mut sorted = vars.to_vec();
    sorted.sort();
    match lang {
        Lang::Log => {}
        Lang::Sol(_) => out.extend(sorted.iter().map(|x| Term::Phi(x.clone()))),
        Lang::Pw => {
            out.extend(sorted.iter().map(|x| Term::Phi(x.clone())));
            out.extend(iverson_terms(&sorted, has_x, caps));
        }
        Lang::Rank => out.extend(sorted.iter().map(|x| Term::Rank(x.clone()))),
    }
    out
}

/// A resource template: one symbolic coefficient per term. Terms that are
/// not listed have coefficient 0.
#[derive(Clone, Debug)]
pub struct Template {
    pub label: String,
    pub vars: Vec<Name>,
    pub has_x: bool,
    pub terms: Vec<Term>,
    pub coeffs: Vec<VarId>,
    index: HashMap<Term, usize>,
}

impl Template {
    /// Allocates coefficients `q<label>_<i>` for the given terms.
    pub fn fresh(
        cs: &mut ConstraintSet,
        label: &str,
        owner: usize,
        vars: &[Name],
        has_x: bool,
        terms: Vec<Term>,
    ) -> Template {
        let mut coeffs = Vec::with_capacity(terms.len());
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            coeffs.push(cs.fresh(format!("q{label}_{i}"), VarKind::Coeff, owner));
            let dup = index.insert(t.clone(), i);
            debug_assert!(dup.is_none(), "duplicate term {t}");
        }
        let mut vars = vars.to_vec();
        vars.sort();
        Template { label: label.to_string(), vars, has_x, terms, coeffs, index }
    }

    /// A full template over the language's term universe.
    #[allow(clippy::too_many_arguments)]
    pub fn universe(
        cs: &mut ConstraintSet,
        label: &str,
        owner: usize,
        lang: &Lang,
        vars: &[Name],
        has_x: bool,
        caps: &Caps,
    ) -> Template {
        let terms = enumerate_terms(lang, vars, has_x, caps);
        Template::fresh(cs, label, owner, vars, has_x, terms)
    }

    pub fn coef(&self, t: &Term) -> Option<VarId> {
        self.index.get(t).map(|&i| self.coeffs[i])
    }

    pub fn has(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    /// Coefficient of a term as an expression; absent terms give 0.
    pub fn expr(&self, t: &Term) -> LinExpr {
        self.coef(t).map(LinExpr::var).unwrap_or_default()
    }

    pub fn unit(&self) -> LinExpr {
        self.expr(&Term::unit())
    }

    pub fn view(&self) -> View {
        self.terms.iter().cloned().zip(self.coeffs.iter().map(|v| LinExpr::var(*v))).collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero coefficients under a model.
    pub fn instantiate(&self, m: &Model) -> Instance {
        let mut terms = Vec::new();
        for (t, v) in self.terms.iter().zip(&self.coeffs) {
            let r = m.get(*v);
            if !r.is_zero() && !t.is_zero_valued() {
                terms.push((t.clone(), r));
            }
        }
        Instance { terms }
    }
}

/// A template seen as a list of (term, coefficient expression) pairs.
pub type View = Vec<(Term, LinExpr)>;

/// A concrete resource function Σ q_t·t.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Instance {
    pub terms: Vec<(Term, Rat)>,
}

impl Instance {
    pub fn value(&self, lang: &Lang, env: &TreeEnv) -> Result<f64, TermError> {
        let mut s = 0.0;
        for (t, q) in &self.terms {
            s += to_f64(q) * term_value(t, lang, env)?;
        }
        Ok(s)
    }

    pub fn coefficient(&self, t: &Term) -> Rat {
        self.terms.iter().find(|(u, _)| u == t).map(|(_, q)| q.clone()).unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{potential, SolParams};
    use crate::rat::{int, rat};
    use crate::semantics::{generate_tree, TreeKind};

    fn names(v: &[&str]) -> Vec<Name> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn log_universe_sizes() {
        let t = enumerate_terms(&Lang::Log, &names(&["x"]), false, &Caps::default());
        let shown: Vec<String> = t.iter().map(|t| t.to_string()).collect();
        assert_eq!(shown, ["log(1)", "1", "log|x|", "log(|x| + 1)", "log(|x| + 2)"]);
        assert_eq!(enumerate_terms(&Lang::Log, &[], false, &Caps::default()).len(), 2);
        assert_eq!(enumerate_terms(&Lang::Sol(SolParams::right()), &names(&["x"]), false, &Caps::default()).len(), 6);
        let rank = enumerate_terms(&Lang::Rank, &names(&["t", "u"]), false, &Caps::default());
        assert!(rank.contains(&Term::Rank("t".into())) && rank.contains(&Term::Rank("u".into())));
    }

    #[test]
    fn log_universe_matches_brute_force() {
        for n in 0..=4usize {
            let vars: Vec<Name> = (0..n).map(|i| format!("x{i}")).collect();
            let mut expect = 0;
            for mask in 0..(1u32 << n) {
                let k = mask.count_ones() as i64;
                expect += (-1i64..=2).filter(|c| k + c >= 1).count();
            }
            assert_eq!(log_terms(&vars).len(), expect);
        }
    }

    #[test]
    fn pw_universe_contains_lifting_terms() {
        let t = enumerate_terms(&Lang::Pw, &names(&["x", "y"]), true, &Caps::default());
        assert!(t.contains(&Term::iverson(&["x"], -1, &[PARAM_X])));
        assert!(t.contains(&Term::iverson(&["x", "y"], 0, &[PARAM_X])));
        assert!(t.contains(&Term::iverson(&[], 1, &["y"])));
        assert!(!t.contains(&Term::iverson(&[], 0, &["y"])));
        assert!(t.iter().all(|t| t.is_valid()));
        let mut d = t.clone();
        d.dedup();
        assert_eq!(d.len(), t.len());
    }

    #[test]
    fn instantiation_matches_the_sum_of_terms() {
        let lang = Lang::Sol(SolParams::right());
        let mut cs = ConstraintSet::new();
        let q = Template::universe(&mut cs, "0", 0, &lang, &names(&["x"]), false, &Caps::default());
        let mut m = Model::new();
        m.set(q.coef(&Term::log(&["x"], 0)).unwrap(), int(1));
        m.set(q.coef(&Term::Phi("x".into())).unwrap(), int(1));
        let inst = q.instantiate(&m);
        let mut env = TreeEnv::new();
        env.insert("x".into(), crate::semantics::parse_value("node leaf 1 leaf").unwrap().as_tree().unwrap().clone());
        assert_eq!(inst.value(&lang, &env).unwrap(), 3.0);
        assert_eq!(Template::universe(&mut cs, "1", 0, &lang, &[], false, &Caps::default()).instantiate(&Model::new()).value(&lang, &env).unwrap(), 0.0);

        // a random model against a direct evaluation
        let mut m = Model::new();
        for (i, v) in q.coeffs.iter().enumerate() {
            m.set(*v, rat(i as i64 - 2, 3));
        }
        let inst = q.instantiate(&m);
        for seed in 0..50 {
            let t = generate_tree(1 + seed % 20, TreeKind::Any, seed);
            env.insert("x".into(), t.clone());
            let mut direct = 0.0;
            for (term, v) in q.terms.iter().zip(&q.coeffs) {
                direct += to_f64(&m.get(*v)) * term_value(term, &lang, &env).unwrap();
            }
            assert!((inst.value(&lang, &env).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sol_phi_template_matches_potential() {
        let lang = Lang::Sol(SolParams::minus_left());
        let inst = Instance { terms: vec![(Term::Phi("x".into()), int(1))] };
        for seed in 0..500 {
            let t = generate_tree(1 + seed % 40, TreeKind::Any, seed);
            let mut env = TreeEnv::new();
            env.insert("x".into(), t.clone());
            assert!((inst.value(&lang, &env).unwrap() - potential(&lang, &t)).abs() < 1e-9);
        }
    }
}
