//! Writes the HTML proof tree of an analysis and prints its outline.
//!
//!     cargo run --example proof_tree -- bench/swap.ml swap.html

use aara::frontend::{choose_lang, config, html::render_proof_tree, load_file};
use aara::inference::run::run;
use aara::solver::SolverConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "bench/swap.ml".into());
    let out = args.next().unwrap_or_else(|| "proof.html".into());
    let prog = load_file(path.as_ref()).expect("loadable program");
    let cfg = config(choose_lang(&prog, None, None).expect("known language"), None, false);
    let res = run(&prog, &cfg, &SolverConfig::default()).expect("analysis runs");
    for &(s, root) in &res.analysis.roots {
        println!("{}", res.analysis.sigs.sigs[s].label());
        print!("{}", res.analysis.forest.outline(root));
    }
    std::fs::write(&out, render_proof_tree(&res, &path)).expect("writable output");
    println!("wrote {out}");
}
