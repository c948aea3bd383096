//! Solves a program, then checks the bounds against the interpreter on random
//! and adversarial inputs. Halved coefficients must be caught.
//!
//!     cargo run --release --example soundness -- bench/swap.ml

use aara::frontend::{choose_lang, config, load_file};
use aara::inference::run::run;
use aara::solver::SolverConfig;
use aara::soundness::{check_result, mutation_check, sequence_check, Settings};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "bench/swap.ml".into());
    let prog = load_file(path.as_ref()).expect("loadable program");
    let cfg = config(choose_lang(&prog, None, None).expect("known language"), None, false);
    let res = run(&prog, &cfg, &SolverConfig::default()).expect("analysis runs");
    let st = Settings::default();
    for r in check_result(&res, &st) {
        let m = r.tightest.as_ref().map_or(f64::NAN, |w| w.margin);
        println!("{:<20} ok={} min margin {m:.4}", r.signature, r.ok());
    }
    if let Some(s) = sequence_check(&res, 100, 1) {
        println!("sequence: actual {:.2} ≤ budget {:.2}", s.actual, s.budget);
    }
    for m in mutation_check(&res, &st) {
        println!("halve {} in {}: detected={}", m.term, m.signature, m.detected);
    }
}
