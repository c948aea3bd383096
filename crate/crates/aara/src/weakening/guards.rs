//! Size and rank comparisons known to hold on a path.

use crate::syntax::{CmpOp, Measure, Name};
use serde::Serialize;
use std::fmt;

/// `m lhs op m rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Guard {
    pub measure: Measure,
    pub lhs: Name,
    pub op: CmpOp,
    pub rhs: Name,
}

impl Guard {
    pub fn new(measure: Measure, lhs: &str, op: CmpOp, rhs: &str) -> Guard {
        Guard { measure, lhs: lhs.to_string(), op, rhs: rhs.to_string() }
    }

    pub fn flipped(&self) -> Guard {
        Guard { measure: self.measure, lhs: self.rhs.clone(), op: self.op.flip(), rhs: self.lhs.clone() }
    }

    pub fn negated(&self) -> Option<Guard> {
        self.op.negate().map(|op| Guard { op, ..self.clone() })
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.lhs == x || self.rhs == x
    }

    /// The weaker predicates this one implies directly.
    fn relaxations(&self) -> Vec<Guard> {
        let with = |op| Guard { op, ..self.clone() };
        match self.op {
            CmpOp::Lt => vec![with(CmpOp::Le)],
            CmpOp::Gt => vec![with(CmpOp::Ge)],
            CmpOp::Eq => vec![with(CmpOp::Le), with(CmpOp::Ge)],
            _ => vec![],
        }
    }

    /// Evaluates the predicate on measure values.
    pub fn holds(&self, l: i64, r: i64) -> bool {
        self.op.eval(l, r)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.measure.symbol();
        write!(
            f,
            "{m}{} {} {m}{}",
            crate::templates::display_name(&self.lhs),
            self.op.symbol(),
            crate::templates::display_name(&self.rhs)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GuardSet(pub Vec<Guard>);

impl GuardSet {
    pub fn new() -> GuardSet {
        GuardSet::default()
    }

    pub fn with(&self, g: Guard) -> GuardSet {
        let mut out = self.clone();
        if !out.0.contains(&g) {
            out.0.push(g);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = &Guard> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Guards whose variables are all in `vars`.
    pub fn within(&self, vars: &[Name]) -> GuardSet {
        GuardSet(self.0.iter().filter(|g| vars.contains(&g.lhs) && vars.contains(&g.rhs)).cloned().collect())
    }

    /// Membership up to flipping, plus one step of order relaxation.
    pub fn entails(&self, p: &Guard) -> bool {
        self.0.iter().any(|g| {
            let mut cands = vec![g.clone(), g.flipped()];
            cands.extend(g.relaxations());
            cands.extend(g.flipped().relaxations());
            cands.contains(p)
        })
    }

    /// Renames a variable in every guard.
    pub fn rename(&self, from: &str, to: &str) -> GuardSet {
        let r = |x: &Name| if x == from { to.to_string() } else { x.clone() };
        GuardSet(self.0.iter().map(|g| Guard { lhs: r(&g.lhs), rhs: r(&g.rhs), ..g.clone() }).collect())
    }
}

impl fmt::Display for GuardSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊤");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entailment_by_membership_and_relaxation() {
        let ge = Guard::new(Measure::Weight, "t", CmpOp::Ge, "u");
        assert!(GuardSet::new().with(ge.clone()).entails(&ge));
        let gt = Guard::new(Measure::Weight, "t", CmpOp::Gt, "u");
        assert!(GuardSet::new().with(gt).entails(&ge));
        assert!(!GuardSet::new().entails(&ge));
        let le = Guard::new(Measure::Weight, "u", CmpOp::Le, "t");
        assert!(GuardSet::new().with(le).entails(&ge));
        let other = Guard::new(Measure::Rank, "t", CmpOp::Ge, "u");
        assert!(!GuardSet::new().with(other).entails(&ge));
    }

    #[test]
    fn one_step_closure_is_sound_on_a_truth_table() {
        let ops = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq];
        for a in ops {
            for b in ops {
                let g = Guard::new(Measure::Weight, "t", a, "u");
                let p = Guard::new(Measure::Weight, "t", b, "u");
                if GuardSet::new().with(g.clone()).entails(&p) {
                    for l in 0..4 {
                        for r in 0..4 {
                            assert!(!g.holds(l, r) || p.holds(l, r), "{g} vs {p}");
                        }
                    }
                }
            }
        }
    }
}
