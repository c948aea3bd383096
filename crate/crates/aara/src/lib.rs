pub mod rat;
pub mod syntax;
pub mod semantics;
pub mod potentials;
pub mod templates;
pub mod constraints;
pub mod weakening;
pub mod inference;
pub mod solver;
pub mod soundness;
pub mod frontend;
