//! Template terms over named tree variables.

use crate::syntax::Name;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Reserved name of the result variable in signatures.
pub const RESULT: &str = "@v";
/// Reserved name of the template parameter.
pub const PARAM_X: &str = "@X";

pub fn display_name(n: &str) -> &str {
    n.strip_prefix('@').unwrap_or(n)
}

pub const MIN_OFFSET: i8 = -1;
pub const MAX_OFFSET: i8 = 2;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Term {
    /// log(Σ|x| + c); the variables are sorted and distinct.
    Log { vars: Vec<Name>, c: i8 },
    /// The language's structural potential φ(x) (sum-of-logs or piecewise).
    Phi(Name),
    /// Rank †x.
    Rank(Name),
    /// [Σ|lhs| + c < Σ|rhs|]; lhs and rhs are disjoint, rhs is nonempty.
    Iverson { lhs: Vec<Name>, c: i8, rhs: Vec<Name> },
}

fn sorted(mut v: Vec<Name>) -> Vec<Name> {
    v.sort();
    v
}

impl Term {
    /// log(2), the unit constant.
    pub fn unit() -> Term {
        Term::Log { vars: Vec::new(), c: 2 }
    }

    pub fn log(vars: &[&str], c: i8) -> Term {
        Term::Log { vars: sorted(vars.iter().map(|s| s.to_string()).collect()), c }
    }

    pub fn iverson(lhs: &[&str], c: i8, rhs: &[&str]) -> Term {
        Term::Iverson {
            lhs: sorted(lhs.iter().map(|s| s.to_string()).collect()),
            c,
            rhs: sorted(rhs.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn is_unit(&self) -> bool {
        *self == Term::unit()
    }

    /// log(1) is identically zero.
    pub fn is_zero_valued(&self) -> bool {
        matches!(self, Term::Log { vars, c: 1 } if vars.is_empty())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Log { vars, .. } if vars.is_empty())
    }

    pub fn vars(&self) -> Vec<&Name> {
        match self {
            Term::Log { vars, .. } => vars.iter().collect(),
            Term::Phi(x) | Term::Rank(x) => vec![x],
            Term::Iverson { lhs, rhs, .. } => lhs.iter().chain(rhs).collect(),
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.vars().iter().any(|v| *v == x)
    }

    /// Whether the term satisfies its index-set side conditions.
    pub fn is_valid(&self) -> bool {
        let distinct = |v: &[Name]| v.windows(2).all(|w| w[0] < w[1]);
        match self {
            Term::Log { vars, c } => {
                (MIN_OFFSET..=MAX_OFFSET).contains(c)
                    && distinct(vars)
                    && vars.len() as i64 + *c as i64 >= 1
            }
            Term::Phi(_) | Term::Rank(_) => true,
            Term::Iverson { lhs, c, rhs } => {
                (MIN_OFFSET..=MAX_OFFSET).contains(c)
                    && distinct(lhs)
                    && distinct(rhs)
                    && !rhs.is_empty()
                    && lhs.iter().all(|x| !rhs.contains(x))
            }
        }
    }

    /// Renames variables. Returns `None` when two variables collapse into one
    /// or the result leaves the term universe.
    pub fn rename(&self, map: &BTreeMap<Name, Name>) -> Option<Term> {
        let r = |x: &Name| map.get(x).cloned().unwrap_or_else(|| x.clone());
        let t = match self {
            Term::Log { vars, c } => Term::Log { vars: sorted(vars.iter().map(r).collect()), c: *c },
            Term::Phi(x) => Term::Phi(r(x)),
            Term::Rank(x) => Term::Rank(r(x)),
            Term::Iverson { lhs, c, rhs } => Term::Iverson {
                lhs: sorted(lhs.iter().map(r).collect()),
                c: *c,
                rhs: sorted(rhs.iter().map(r).collect()),
            },
        };
        t.is_valid().then_some(t)
    }

    pub fn rename1(&self, from: &str, to: &str) -> Option<Term> {
        let mut m = BTreeMap::new();
        m.insert(from.to_string(), to.to_string());
        self.rename(&m)
    }

    /// Weight of the term in the optimisation objective.
    pub fn objective_weight(&self) -> i64 {
        match self {
            Term::Log { vars, .. } if vars.is_empty() => 1,
            Term::Log { vars, c } => {
                let w = 1 + vars.len() as i64 + 2 * *c as i64;
                w * w
            }
            Term::Phi(_) | Term::Rank(_) => 100,
            Term::Iverson { .. } => 1,
        }
    }
}

fn sum(f: &mut fmt::Formatter<'_>, vars: &[Name], c: i8) -> fmt::Result {
    let mut first = true;
    for v in vars {
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "|{}|", display_name(v))?;
        first = false;
    }
    if first {
        write!(f, "{c}")
    } else if c > 0 {
        write!(f, " + {c}")
    } else if c < 0 {
        write!(f, " - {}", -c)
    } else {
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Log { vars, c } if vars.is_empty() && *c == 2 => write!(f, "1"),
            Term::Log { vars, c } if vars.len() == 1 && *c == 0 => {
                write!(f, "log|{}|", display_name(&vars[0]))
            }
            Term::Log { vars, c } => {
                write!(f, "log(")?;
                sum(f, vars, *c)?;
                write!(f, ")")
            }
            Term::Phi(x) => write!(f, "φ({})", display_name(x)),
            Term::Rank(x) => write!(f, "†{}", display_name(x)),
            Term::Iverson { lhs, c, rhs } => {
                write!(f, "[")?;
                sum(f, lhs, *c)?;
                write!(f, " < ")?;
                sum(f, rhs, 0)?;
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displays_readably() {
        assert_eq!(Term::log(&["x"], 0).to_string(), "log|x|");
        assert_eq!(Term::log(&["y", "x"], -1).to_string(), "log(|x| + |y| - 1)");
        assert_eq!(Term::unit().to_string(), "1");
        assert_eq!(Term::iverson(&["u", "y"], -1, &[PARAM_X]).to_string(), "[|u| + |y| - 1 < |X|]");
        assert_eq!(Term::iverson(&[], 1, &["y"]).to_string(), "[1 < |y|]");
    }

    #[test]
    fn rename_rejects_collisions() {
        let t = Term::log(&["x", "y"], 0);
        assert_eq!(t.rename1("y", "z"), Some(Term::log(&["x", "z"], 0)));
        assert_eq!(t.rename1("y", "x"), None);
        assert_eq!(Term::log(&["x"], 1).rename1("x", "v"), Some(Term::log(&["v"], 1)));
    }

    #[test]
    fn objective_weights() {
        assert_eq!(Term::log(&["x"], 0).objective_weight(), 4);
        assert_eq!(Term::Phi("x".into()).objective_weight(), 100);
        assert_eq!(Term::unit().objective_weight(), 1);
        assert_eq!(Term::log(&["x", "y"], -1).objective_weight(), 1);
    }
}
