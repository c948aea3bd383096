//! Samples every lemma oracle and prints the worst margin found.
//!
//!     cargo run --release --example lemmas

use aara::potentials::lemmas::{check_lemma, LemmaId};

fn main() {
    for id in LemmaId::suite() {
        let r = check_lemma(&id, 10_000, 7);
        println!("{:<14} {:>6} samples  worst {:+.3e} at {:?}", r.lemma, r.samples, r.worst_margin, r.witness);
        assert!(r.passed, "{} violated", r.lemma);
    }
}
