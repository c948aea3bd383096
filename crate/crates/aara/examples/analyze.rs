//! Runs the full analysis on a program and prints each bound.
//!
//!     cargo run --release --example analyze -- bench/swap.ml

use aara::inference::{run::run, Config};
use aara::potentials::Lang;
use aara::solver::SolverConfig;
use aara::syntax::load;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "bench/swap.ml".into());
    let src = std::fs::read_to_string(&path).expect("readable source file");
    let prog = load(&src).expect("well-formed program");
    let lang = prog.potential.as_ref().and_then(|p| Lang::from_name(&p.lang, None)).unwrap_or(Lang::Log);
    let cfg = Config::new(lang);
    let res = run(&prog, &cfg, &SolverConfig::default()).expect("analysis runs");
    println!("objective {:?}", res.objective.as_ref().map(aara::rat::fmt_rat));
    println!("status {:?}, {} constraints, {} vars, derive {:?}, solve {:?}", res.status, res.analysis.cs.len(), res.analysis.cs.pool.len(), res.timings.derive, res.timings.solve);
    for b in &res.bounds {
        let terms: Vec<String> = b.cost.terms.iter().map(|(t, q)| format!("{}·{t}", aara::rat::fmt_rat(q))).collect();
        println!("{}: {}   [Φ = {:?}]", b.label, terms.join(" + "), b.rhs.terms.iter().map(|(t, q)| format!("{}·{t}", aara::rat::fmt_rat(q))).collect::<Vec<_>>());
    }
    if !res.core.is_empty() {
        for &i in &res.core {
            let (c, p) = &res.analysis.cs.items[i];
            println!("core: node {} {} {}: {}", p.node, p.rule, p.tag, c.render(&res.analysis.cs.pool));
        }
    }
}
