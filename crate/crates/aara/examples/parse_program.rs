//! Parses a program, then prints its let-normal form and cue annotations.
//!
//!     cargo run --example parse_program -- bench/skew_pw.ml

use aara::syntax::{load, print::print_program};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "bench/swap.ml".into());
    let src = std::fs::read_to_string(&path).expect("readable source file");
    match load(&src) {
        Ok(p) => {
            print!("{}", print_program(&p));
            for f in &p.funs {
                let mut cues = Vec::new();
                f.body.walk(&mut |e| {
                    for c in &e.cues {
                        cues.push(format!("  {} {:?}", e.span, c));
                    }
                });
                println!("-- {}: {} cue(s)", f.name, cues.len());
                cues.iter().for_each(|c| println!("{c}"));
            }
        }
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(1);
        }
    }
}
