//! A program whose bound does not exist in the chosen language: the solver's
//! unsat core is mapped back to derivation nodes.
//!
//!     cargo run --example unsat_core

use aara::frontend::{bound_table, choose_lang, config, load_file};
use aara::inference::run::{run, Status};
use aara::solver::SolverConfig;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/bench/unsat.ml").into());
    let prog = load_file(path.as_ref()).expect("loadable program");
    let cfg = config(choose_lang(&prog, None, None).expect("known language"), None, false);
    let res = run(&prog, &cfg, &SolverConfig::default()).expect("analysis runs");
    print!("{}", bound_table(&res));
    if res.status == Status::Unsat {
        let forest = &res.analysis.forest;
        for n in res.core_nodes() {
            let node = forest.get(n);
            println!("{:>4} {:<12} {}", n, node.rule.to_string(), node.expr);
        }
    }
}
