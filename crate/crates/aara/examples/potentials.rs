//! Potential functions on a few shapes: φ under different Sol parameters,
//! rank and size.
//!
//!     cargo run --example potentials

use aara::potentials::{potential, Lang, SolParams};
use aara::semantics::{generate_tree, TreeKind};

fn main() {
    let langs = [
        ("logr", Lang::Sol(SolParams::right())),
        ("sol(-1/2,0,1/2)", Lang::Sol(SolParams::minus_left())),
        ("golden", Lang::Sol(SolParams::golden())),
        ("rank", Lang::Rank),
    ];
    for (size, kind) in [(8, TreeKind::Any), (8, TreeKind::WeightBiased), (64, TreeKind::RankBiased)] {
        let t = generate_tree(size, kind, 3);
        println!("{kind:?} tree with {} leaves, rank {}", t.leaves(), t.rank());
        for (name, l) in &langs {
            println!("  {name:<16} {:.4}", potential(l, &t));
        }
    }
}
