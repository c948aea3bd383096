//! Seeded random trees for differential testing.

use super::value::{Tree, Value};
use crate::syntax::{PlainType, Refinement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TreeKind {
    /// Arbitrary shape and keys.
    Any,
    /// Heap-ordered with #left ≥ #right at every node.
    WeightBiased,
    /// Heap-ordered with †left ≥ †right at every node.
    RankBiased,
    /// Heap-ordered, arbitrary shape.
    HeapOrdered,
}

impl TreeKind {
    pub fn for_type(t: PlainType) -> TreeKind {
        match t.refinement() {
            Some(Refinement::WeightTree) => TreeKind::WeightBiased,
            Some(Refinement::RankTree) => TreeKind::RankBiased,
            None => TreeKind::HeapOrdered,
        }
    }

    /// Whether `t` belongs to the population this kind generates.
    pub fn admits(self, t: &Tree) -> bool {
        match self {
            TreeKind::Any => true,
            TreeKind::HeapOrdered => t.is_heap_ordered(),
            TreeKind::WeightBiased => t.is_heap_ordered() && t.is_weight_biased(),
            TreeKind::RankBiased => t.is_heap_ordered() && t.is_rank_biased(),
        }
    }
}

enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn weight(&self) -> u64 {
        match self {
            Shape::Leaf => 0,
            Shape::Node(l, r) => l.weight() + r.weight() + 1,
        }
    }

    fn rank(&self) -> u64 {
        match self {
            Shape::Leaf => 0,
            Shape::Node(_, r) => r.rank() + 1,
        }
    }
}

fn random_shape(nodes: u64, rng: &mut impl Rng) -> Shape {
    if nodes == 0 {
        return Shape::Leaf;
    }
    let left = rng.gen_range(0..nodes);
    Shape::Node(
        Box::new(random_shape(left, rng)),
        Box::new(random_shape(nodes - 1 - left, rng)),
    )
}

/// Swaps children bottom-up until `key(left) >= key(right)` holds everywhere.
fn bias(s: Shape, key: fn(&Shape) -> u64) -> Shape {
    match s {
        Shape::Leaf => Shape::Leaf,
        Shape::Node(l, r) => {
            let (l, r) = (bias(*l, key), bias(*r, key));
            if key(&l) >= key(&r) {
                Shape::Node(Box::new(l), Box::new(r))
            } else {
                Shape::Node(Box::new(r), Box::new(l))
            }
        }
    }
}

/// Builds the tree, assigning keys along a random linear extension of the
/// parent-before-child order when `heap` is set.
fn fill(s: &Shape, heap: bool, rng: &mut impl Rng) -> Tree {
    let n = s.weight() as usize;
    let mut keys: Vec<i64> = if heap {
        // Parent indices in pre-order; a node becomes available once its parent is keyed.
        let mut parent = Vec::with_capacity(n);
        fn pre(s: &Shape, p: Option<usize>, out: &mut Vec<Option<usize>>) {
            if let Shape::Node(l, r) = s {
                let me = out.len();
                out.push(p);
                pre(l, Some(me), out);
                pre(r, Some(me), out);
            }
        }
        pre(s, None, &mut parent);
        let mut keys = vec![0; n];
        let mut avail: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        let mut next = 0i64;
        while !avail.is_empty() {
            let i = avail.swap_remove(rng.gen_range(0..avail.len()));
            next += rng.gen_range(0..3);
            keys[i] = next;
            avail.extend((0..n).filter(|&j| parent[j] == Some(i)));
        }
        keys
    } else {
        (0..n).map(|_| rng.gen_range(0..1000)).collect()
    };
    keys.reverse();
    fn build(s: &Shape, keys: &mut Vec<i64>) -> Tree {
        match s {
            Shape::Leaf => Tree::Leaf,
            Shape::Node(l, r) => {
                let a = keys.pop().unwrap();
                let l = build(l, keys);
                let r = build(r, keys);
                Tree::node(l, a, r)
            }
        }
    }
    build(s, &mut keys)
}

pub fn random_tree(size: u64, kind: TreeKind, rng: &mut impl Rng) -> Tree {
    let nodes = size.max(1) - 1;
    let shape = random_shape(nodes, rng);
    let shape = match kind {
        TreeKind::WeightBiased => bias(shape, Shape::weight),
        TreeKind::RankBiased => bias(shape, Shape::rank),
        _ => shape,
    };
    fill(&shape, kind != TreeKind::Any, rng)
}

/// A random tree with exactly `size` leaves; deterministic in `seed`.
pub fn generate_tree(size: u64, kind: TreeKind, seed: u64) -> Tree {
    random_tree(size, kind, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A random argument of the given type with at most `max_size` leaves.
pub fn random_value(t: PlainType, max_size: u64, rng: &mut impl Rng) -> Value {
    match t {
        PlainType::Bool => Value::Bool(rng.gen()),
        PlainType::Base => Value::Base(rng.gen_range(0..64)),
        _ => {
            let size = rng.gen_range(1..=max_size.max(1));
            Value::Tree(random_tree(size, TreeKind::for_type(t), rng))
        }
    }
}

/// All tree shapes with `size` leaves, keys 0..n in pre-order (so heap-ordered).
pub fn all_trees(size: u64) -> Vec<Tree> {
    fn shapes(nodes: u64) -> Vec<Shape> {
        if nodes == 0 {
            return vec![Shape::Leaf];
        }
        let mut out = Vec::new();
        for l in 0..nodes {
            for a in shapes(l) {
                for b in shapes(nodes - 1 - l) {
                    out.push(Shape::Node(Box::new(clone(&a)), Box::new(b)));
                }
            }
        }
        out
    }
    fn clone(s: &Shape) -> Shape {
        match s {
            Shape::Leaf => Shape::Leaf,
            Shape::Node(l, r) => Shape::Node(Box::new(clone(l)), Box::new(clone(r))),
        }
    }
    fn build(s: &Shape, next: &mut i64) -> Tree {
        match s {
            Shape::Leaf => Tree::Leaf,
            Shape::Node(l, r) => {
                let a = *next;
                *next += 1;
                let l = build(l, next);
                Tree::node(l, a, build(r, next))
            }
        }
    }
    shapes(size.max(1) - 1).iter().map(|s| build(s, &mut 0)).collect()
}

/// Shuffles in place with a seeded generator; used to sample trial orders.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_one_is_leaf() {
        for kind in [TreeKind::Any, TreeKind::WeightBiased, TreeKind::RankBiased, TreeKind::HeapOrdered] {
            assert_eq!(generate_tree(1, kind, 7), Tree::Leaf);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = generate_tree(40, TreeKind::Any, 11);
        assert_eq!(a, generate_tree(40, TreeKind::Any, 11));
        assert_eq!(a.leaves(), 40);
    }

    #[test]
    fn enumerates_catalan_many_shapes() {
        let counts: Vec<usize> = (1..=6).map(|n| all_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42]);
    }
}
