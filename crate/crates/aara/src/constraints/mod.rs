//! Constraint IR and the constraint generating functions of every rule.

pub mod ir;
pub mod letrule;
pub mod rules;

pub use ir::{Atom, Constraint, ConstraintSet, LinExpr, Model, Provenance, Rel, VarId, VarKind, VarPool};
