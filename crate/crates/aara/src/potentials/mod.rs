//! Numeric evaluation of potential functions and template terms. These are
//! floating-point oracles; the analysis itself never calls them.

pub mod lemmas;

use crate::rat::{self, Rat};
use crate::semantics::Tree;
use crate::syntax::Name;
use crate::templates::term::Term;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

/// Coefficients (a, b, c) of ψ(t, u) = a·log|t| + b·log|u| + c·log(|t| + |u|).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SolParams {
    #[serde(serialize_with = "ser_rats")]
    pub a: Rat,
    #[serde(serialize_with = "ser_rats")]
    pub b: Rat,
    #[serde(serialize_with = "ser_rats")]
    pub c: Rat,
}

fn ser_rats<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat::fmt_rat(r))
}

impl SolParams {
    pub fn new(a: Rat, b: Rat, c: Rat) -> SolParams {
        SolParams { a, b, c }
    }

    /// (0, 1/2, 0): half the log of each right subtree.
    pub fn right() -> SolParams {
        SolParams::new(rat::zero(), rat::rat(1, 2), rat::zero())
    }

    /// (-1/2, 0, 1/2).
    pub fn minus_left() -> SolParams {
        SolParams::new(rat::rat(-1, 2), rat::zero(), rat::rat(1, 2))
    }

    /// (-105/163, 0, 105/163), approximating the golden-ratio potential.
    pub fn golden() -> SolParams {
        SolParams::new(rat::rat(-105, 163), rat::zero(), rat::rat(105, 163))
    }

    /// Parses `a,b,c` with rational components.
    pub fn parse(s: &str) -> Option<SolParams> {
        let parts: Vec<Rat> = s.split(',').map(|p| rat::parse_rat(p.trim())).collect::<Option<_>>()?;
        match parts.as_slice() {
            [a, b, c] => Some(SolParams::new(a.clone(), b.clone(), c.clone())),
            _ => None,
        }
    }

    pub fn psi(&self, t: f64, u: f64) -> f64 {
        rat::to_f64(&self.a) * t.log2()
            + rat::to_f64(&self.b) * u.log2()
            + rat::to_f64(&self.c) * (t + u).log2()
    }
}

impl fmt::Display for SolParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", rat::fmt_rat(&self.a), rat::fmt_rat(&self.b), rat::fmt_rat(&self.c))
    }
}

/// Template language, which also fixes the meaning of φ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Lang {
    Log,
    Sol(SolParams),
    Pw,
    Rank,
}

impl Lang {
    /// Resolves a language name: `log`, `pw`, `rank`, `sol`, `logr` or `sol(a,b,c)`.
    pub fn from_name(name: &str, sol: Option<&SolParams>) -> Option<Lang> {
        let name = name.trim();
        match name {
            "log" => Some(Lang::Log),
            "pw" => Some(Lang::Pw),
            "rank" => Some(Lang::Rank),
            "logr" => Some(Lang::Sol(SolParams::right())),
            "sol" => Some(Lang::Sol(sol.cloned().unwrap_or_else(SolParams::right))),
            _ => {
                let inner = name.strip_prefix("sol(")?.strip_suffix(')')?;
                SolParams::parse(inner).map(Lang::Sol)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Lang::Log => "log".into(),
            Lang::Pw => "pw".into(),
            Lang::Rank => "rank".into(),
            Lang::Sol(p) => format!("sol({p})"),
        }
    }

    pub fn has_phi(&self) -> bool {
        matches!(self, Lang::Sol(_) | Lang::Pw)
    }
}

/// φ or Φ of the language on a tree, together with |t|.
fn phi_and_size(lang: &Lang, t: &Tree) -> (f64, f64) {
    match t {
        Tree::Leaf => (if matches!(lang, Lang::Sol(_)) { 1.0 } else { 0.0 }, 1.0),
        Tree::Node(l, _, r) => {
            let (pl, sl) = phi_and_size(lang, l);
            let (pr, sr) = phi_and_size(lang, r);
            let local = match lang {
                Lang::Sol(p) => p.psi(sl, sr),
                Lang::Pw if sl < sr => 1.0,
                _ => 0.0,
            };
            (pl + local + pr, sl + sr)
        }
    }
}

/// The language's potential of a tree: φ for Sol, Φpw for Pw, †t for Rank, 0 for Log.
pub fn potential(lang: &Lang, t: &Tree) -> f64 {
    match lang {
        Lang::Rank => t.rank() as f64,
        Lang::Log => 0.0,
        _ => phi_and_size(lang, t).0,
    }
}

/// φ(t) for languages that have it.
pub fn phi(lang: &Lang, t: &Tree) -> f64 {
    if lang.has_phi() {
        phi_and_size(lang, t).0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TermError {
    #[error("unbound variable '{0}' in term")]
    Unbound(Name),
    #[error("logarithm of non-positive argument {0} in term {1}")]
    LogDomain(f64, String),
}

/// Trees bound to the variables a term may mention.
pub type TreeEnv = HashMap<Name, Tree>;

/// Numeric value of a term. `sizes` may cache |x| for speed.
pub fn term_value(t: &Term, lang: &Lang, env: &TreeEnv) -> Result<f64, TermError> {
    let size = |x: &Name| -> Result<f64, TermError> {
        env.get(x).map(|t| t.leaves() as f64).ok_or_else(|| TermError::Unbound(x.clone()))
    };
    match t {
        Term::Log { vars, c } => {
            let mut s = *c as f64;
            for v in vars {
                s += size(v)?;
            }
            if s <= 0.0 {
                return Err(TermError::LogDomain(s, t.to_string()));
            }
            Ok(s.log2())
        }
        Term::Phi(x) => {
            let tree = env.get(x).ok_or_else(|| TermError::Unbound(x.clone()))?;
            Ok(phi(lang, tree))
        }
        Term::Rank(x) => {
            let tree = env.get(x).ok_or_else(|| TermError::Unbound(x.clone()))?;
            Ok(tree.rank() as f64)
        }
        Term::Iverson { lhs, c, rhs } => {
            let mut l = *c as f64;
            for v in lhs {
                l += size(v)?;
            }
            let mut r = 0.0;
            for v in rhs {
                r += size(v)?;
            }
            Ok(if l < r { 1.0 } else { 0.0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::parse_value;
    use crate::templates::term::PARAM_X;

    fn tree(s: &str) -> Tree {
        parse_value(s).unwrap().as_tree().unwrap().clone()
    }

    fn env(pairs: &[(&str, &str)]) -> TreeEnv {
        pairs.iter().map(|(k, v)| (k.to_string(), tree(v))).collect()
    }

    /// A tree with exactly n leaves (a left spine).
    fn sized(n: u64) -> String {
        let mut s = "leaf".to_string();
        for _ in 1..n {
            s = format!("node ({s}) 0 leaf");
        }
        s
    }

    #[test]
    fn potentials_on_small_trees() {
        let single = tree("node leaf 1 leaf");
        assert_eq!(potential(&Lang::Sol(SolParams::right()), &single), 2.0);
        assert_eq!(potential(&Lang::Pw, &tree("node leaf 1 (node leaf 2 leaf)")), 1.0);
        assert_eq!(potential(&Lang::Rank, &tree("node leaf 1 (node leaf 2 (node leaf 3 leaf))")), 3.0);
    }

    #[test]
    fn term_values() {
        let lang = Lang::Pw;
        let e = env(&[("x", &sized(3)), ("t", &sized(2)), ("u", &sized(2)), ("y", &sized(3)), (PARAM_X, &sized(5))]);
        assert_eq!(term_value(&Term::log(&["x"], 1), &lang, &e).unwrap(), 2.0);
        assert_eq!(term_value(&Term::iverson(&["t"], 0, &["u"]), &lang, &e).unwrap(), 0.0);
        let e2 = env(&[("u", &sized(2)), ("y", &sized(3)), (PARAM_X, &sized(5))]);
        assert_eq!(term_value(&Term::iverson(&["u", "y"], -1, &[PARAM_X]), &lang, &e2).unwrap(), 1.0);
        assert!(matches!(term_value(&Term::log(&["z"], 0), &lang, &e), Err(TermError::Unbound(_))));
        assert!(matches!(
            term_value(&Term::Log { vars: vec![], c: -1 }, &lang, &e),
            Err(TermError::LogDomain(..))
        ));
    }

    #[test]
    fn language_names() {
        assert_eq!(Lang::from_name("logr", None), Some(Lang::Sol(SolParams::right())));
        assert_eq!(Lang::from_name("sol(-1/2,0,1/2)", None), Some(Lang::Sol(SolParams::minus_left())));
        assert_eq!(Lang::from_name("nope", None), None);
    }
}
