//! Cost semantics and input generation.

pub mod eval;
pub mod gen;
pub mod value;

pub use eval::{call, evaluate, EvalError, EvalOptions, Outcome};
pub use gen::{generate_tree, random_tree, random_value, TreeKind};
pub use value::{parse_value, Tree, Value};
