//! Runs a heap operation under the cost semantics and compares the cost
//! with the potential before and after.
//!
//!     cargo run --example evaluate -- bench/skew_pw.ml 32

use aara::potentials::{potential, Lang};
use aara::semantics::{call, generate_tree, EvalOptions, TreeKind, Value};
use aara::syntax::load;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "bench/skew_pw.ml".into());
    let size: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let prog = load(&std::fs::read_to_string(&path).expect("readable source")).expect("well-formed program");
    let lang = Lang::Sol(aara::potentials::SolParams::right());

    let mut heap = aara::semantics::Tree::Leaf;
    let mut total = 0.0;
    for seed in 0..size {
        let single = generate_tree(2, TreeKind::Any, seed);
        let out = call(&prog, "meld", &[Value::Tree(single), Value::Tree(heap)], &EvalOptions::default()).expect("meld runs");
        total += aara::rat::to_f64(&out.cost);
        heap = out.value.as_tree().expect("a heap").clone();
    }
    println!("{size} inserts: cost {total}, φ = {:.3}", potential(&lang, &heap));

    let opts = EvalOptions { trace: true, ..EvalOptions::default() };
    let out = call(&prog, "delete_min", &[Value::Tree(heap.clone())], &opts).expect("delete_min runs");
    println!("delete_min: cost {}, {} steps", aara::rat::fmt_rat(&out.cost), out.steps);
    for t in out.trace.iter().filter(|t| t.rule == "Tick") {
        println!("{}tick at {}", "  ".repeat(t.depth), t.span);
    }
    let after = out.value.as_tree().expect("a heap");
    println!("φ before {:.3}, after {:.3}, log|x| = {:.3}", potential(&lang, &heap), potential(&lang, after), (heap.leaves() as f64).log2());
}
