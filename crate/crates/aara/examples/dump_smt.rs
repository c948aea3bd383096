//! Prints the SMT-LIB script for a program without running the solver.
//!
//!     cargo run --example dump_smt -- bench/swap.ml > swap.smt2

use aara::frontend::{choose_lang, config, load_file};
use aara::inference::{analyze, run::objectives};
use aara::solver::smtlib::{emit, Query};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "bench/swap.ml".into());
    let prog = load_file(path.as_ref()).expect("loadable program");
    let lang = choose_lang(&prog, None, None).expect("known language");
    let a = analyze(&prog, &config(lang, None, false)).expect("derivable program");
    eprintln!("{} constraints over {} variables, {} derivation nodes", a.cs.len(), a.cs.pool.len(), a.forest.nodes.len());
    print!("{}", emit(&a.cs, &objectives(&a), Query::Values));
}
