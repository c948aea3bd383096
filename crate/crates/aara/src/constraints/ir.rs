//! Linear real arithmetic over symbolic coefficients.

use crate::rat::{fmt_rat, one, zero, Rat};
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VarKind {
    /// Template coefficient.
    Coeff,
    /// Farkas multiplier, always nonnegative.
    Multiplier,
    /// 0/1 selector.
    Indicator,
    /// Auxiliary variable (shift amounts, products with selectors).
    Aux,
}

#[derive(Clone, Debug, Default)]
pub struct VarPool {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    /// Derivation node that created the variable.
    owners: Vec<usize>,
}

impl VarPool {
    pub fn new() -> VarPool {
        VarPool::default()
    }

    pub fn fresh(&mut self, name: String, kind: VarKind, owner: usize) -> VarId {
        let id = VarId(self.names.len() as u32);
        self.names.push(name);
        self.kinds.push(kind);
        self.owners.push(owner);
        id
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn kind(&self, v: VarId) -> VarKind {
        self.kinds[v.0 as usize]
    }

    pub fn owner(&self, v: VarId) -> usize {
        self.owners[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }
}

/// Σ c_i·v_i + constant.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<VarId, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn var(v: VarId) -> LinExpr {
        LinExpr::term(v, one())
    }

    pub fn term(v: VarId, c: Rat) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(v, c);
        e
    }

    pub fn constant(c: Rat) -> LinExpr {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn add_term(&mut self, v: VarId, c: Rat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(v).or_insert_with(zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rat) {
        for (v, c) in &other.terms {
            self.add_term(*v, c * k);
        }
        self.constant += &other.constant * k;
    }

    pub fn add(&mut self, other: &LinExpr) {
        self.add_scaled(other, &one());
    }

    pub fn sub(&mut self, other: &LinExpr) {
        self.add_scaled(other, &-one());
    }

    pub fn plus(mut self, other: &LinExpr) -> LinExpr {
        self.add(other);
        self
    }

    pub fn minus(mut self, other: &LinExpr) -> LinExpr {
        self.sub(other);
        self
    }

    pub fn scaled(&self, k: &Rat) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_scaled(self, k);
        e
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.terms.keys().copied()
    }

    pub fn eval(&self, m: &Model) -> Rat {
        let mut s = self.constant.clone();
        for (v, c) in &self.terms {
            s += c * m.get(*v);
        }
        s
    }

    pub fn render(&self, pool: &VarPool) -> String {
        let mut out = String::new();
        for (v, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mag != one() {
                out.push_str(&fmt_rat(&mag));
                out.push('*');
            }
            out.push_str(pool.name(*v));
        }
        if !self.constant.is_zero() || out.is_empty() {
            if out.is_empty() {
                out.push_str(&fmt_rat(&self.constant));
            } else {
                out.push_str(if self.constant.is_negative() { " - " } else { " + " });
                out.push_str(&fmt_rat(&self.constant.abs()));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        }
    }

    pub fn holds(self, x: &Rat) -> bool {
        match self {
            Rel::Eq => x.is_zero(),
            Rel::Le => !x.is_positive(),
            Rel::Ge => !x.is_negative(),
        }
    }
}

/// `expr rel 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Atom {
    pub fn new(expr: LinExpr, rel: Rel) -> Atom {
        Atom { expr, rel }
    }

    pub fn eq(lhs: LinExpr, rhs: &LinExpr) -> Atom {
        Atom::new(lhs.minus(rhs), Rel::Eq)
    }

    pub fn le(lhs: LinExpr, rhs: &LinExpr) -> Atom {
        Atom::new(lhs.minus(rhs), Rel::Le)
    }

    pub fn ge(lhs: LinExpr, rhs: &LinExpr) -> Atom {
        Atom::new(lhs.minus(rhs), Rel::Ge)
    }

    pub fn holds(&self, m: &Model) -> bool {
        self.rel.holds(&self.expr.eval(m))
    }

    /// Constant atoms that are trivially true.
    pub fn is_trivial(&self) -> bool {
        self.expr.is_constant() && self.rel.holds(&self.expr.constant)
    }

    pub fn render(&self, pool: &VarPool) -> String {
        format!("{} {} 0", self.expr.render(pool), self.rel.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Atom(Atom),
    /// premise ⇒ conclusion
    Implies(Atom, Atom),
    Or(Vec<Atom>),
}

impl Constraint {
    pub fn holds(&self, m: &Model) -> bool {
        match self {
            Constraint::Atom(a) => a.holds(m),
            Constraint::Implies(p, c) => !p.holds(m) || c.holds(m),
            Constraint::Or(xs) => xs.iter().any(|a| a.holds(m)),
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> = match self {
            Constraint::Atom(a) => a.expr.vars().collect(),
            Constraint::Implies(p, c) => p.expr.vars().chain(c.expr.vars()).collect(),
            Constraint::Or(xs) => xs.iter().flat_map(|a| a.expr.vars()).collect(),
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn render(&self, pool: &VarPool) -> String {
        match self {
            Constraint::Atom(a) => a.render(pool),
            Constraint::Implies(p, c) => format!("{} => {}", p.render(pool), c.render(pool)),
            Constraint::Or(xs) => {
                xs.iter().map(|a| a.render(pool)).collect::<Vec<_>>().join(" or ")
            }
        }
    }
}

/// Where a constraint came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub node: usize,
    pub rule: String,
    pub tag: String,
}

impl Provenance {
    pub fn new(node: usize, rule: &str, tag: impl Into<String>) -> Provenance {
        Provenance { node, rule: rule.to_string(), tag: tag.into() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    pub pool: VarPool,
    pub items: Vec<(Constraint, Provenance)>,
}

impl ConstraintSet {
    pub fn new() -> ConstraintSet {
        ConstraintSet::default()
    }

    pub fn fresh(&mut self, name: String, kind: VarKind, owner: usize) -> VarId {
        let v = self.fresh_raw(name, kind, owner);
        if kind == VarKind::Multiplier {
            self.push(
                Constraint::Atom(Atom::new(LinExpr::var(v), Rel::Ge)),
                Provenance::new(owner, "W", "multiplier >= 0"),
            );
        }
        if kind == VarKind::Indicator {
            self.push(
                Constraint::Or(vec![
                    Atom::new(LinExpr::var(v), Rel::Eq),
                    Atom::new(LinExpr::var(v).minus(&LinExpr::constant(one())), Rel::Eq),
                ]),
                Provenance::new(owner, "select", "indicator in {0,1}"),
            );
        }
        v
    }

    fn fresh_raw(&mut self, name: String, kind: VarKind, owner: usize) -> VarId {
        self.pool.fresh(name, kind, owner)
    }

    /// Adds a constraint, skipping trivially true constant atoms.
    pub fn push(&mut self, c: Constraint, p: Provenance) {
        if let Constraint::Atom(a) = &c {
            if a.is_trivial() {
                return;
            }
        }
        self.items.push((c, p));
    }

    pub fn atom(&mut self, a: Atom, p: Provenance) {
        self.push(Constraint::Atom(a), p);
    }

    pub fn eq(&mut self, lhs: LinExpr, rhs: &LinExpr, p: Provenance) {
        self.atom(Atom::eq(lhs, rhs), p);
    }

    pub fn le(&mut self, lhs: LinExpr, rhs: &LinExpr, p: Provenance) {
        self.atom(Atom::le(lhs, rhs), p);
    }

    pub fn ge(&mut self, lhs: LinExpr, rhs: &LinExpr, p: Provenance) {
        self.atom(Atom::ge(lhs, rhs), p);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Indices of constraints the model violates.
    pub fn violations(&self, m: &Model) -> Vec<usize> {
        self.items.iter().enumerate().filter(|(_, (c, _))| !c.holds(m)).map(|(i, _)| i).collect()
    }

    /// Constant-false atoms, which make the set unsatisfiable on their own.
    pub fn contradictions(&self) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| matches!(c, Constraint::Atom(a) if a.expr.is_constant() && !a.is_trivial()))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (c, p) in &self.items {
            s.push_str(&format!("[{} {} {}] {}\n", p.node, p.rule, p.tag, c.render(&self.pool)));
        }
        s
    }
}

/// An assignment of rationals to variables; unassigned variables read as 0.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    values: HashMap<VarId, Rat>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn set(&mut self, v: VarId, r: Rat) {
        self.values.insert(v, r);
    }

    pub fn get(&self, v: VarId) -> Rat {
        self.values.get(&v).cloned().unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Rat)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn linexpr_arithmetic_cancels() {
        let mut cs = ConstraintSet::new();
        let a = cs.fresh("a".into(), VarKind::Coeff, 0);
        let b = cs.fresh("b".into(), VarKind::Coeff, 0);
        let e = LinExpr::var(a).plus(&LinExpr::term(b, int(2))).minus(&LinExpr::var(a));
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.render(&cs.pool), "2*b");
        let mut m = Model::new();
        m.set(b, rat(1, 2));
        assert_eq!(e.eval(&m), int(1));
    }

    #[test]
    fn implication_and_disjunction_semantics() {
        let mut cs = ConstraintSet::new();
        let i = cs.fresh("i".into(), VarKind::Indicator, 0);
        let p = cs.fresh("p".into(), VarKind::Coeff, 0);
        cs.push(
            Constraint::Implies(Atom::new(LinExpr::var(i), Rel::Eq), Atom::new(LinExpr::var(p), Rel::Eq)),
            Provenance::new(0, "t", ""),
        );
        let mut m = Model::new();
        m.set(p, int(3));
        assert_eq!(cs.violations(&m), vec![1]);
        m.set(i, int(1));
        assert!(cs.violations(&m).is_empty());
        m.set(i, rat(1, 2));
        assert_eq!(cs.violations(&m), vec![0]);
    }

    #[test]
    fn trivial_atoms_are_dropped_and_contradictions_found() {
        let mut cs = ConstraintSet::new();
        cs.eq(LinExpr::zero(), &LinExpr::zero(), Provenance::new(0, "t", ""));
        assert!(cs.is_empty());
        cs.eq(LinExpr::constant(one()), &LinExpr::zero(), Provenance::new(0, "t", ""));
        assert_eq!(cs.contradictions(), vec![0]);
    }
}
