//! Sampling oracles for the expert-knowledge inequalities.

use crate::semantics::gen::{all_trees, random_tree, TreeKind};
use crate::semantics::value::Tree;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LemmaId {
    /// log(x+y) ≥ ½log x + ½log y + 1
    L1,
    /// log(x+y) + [x<y] ≥ log y + 1
    L2i,
    /// log(x+y) ≥ log y + [x>y]
    L2ii,
    /// log(x+y) ≥ log y + [x≥y]
    L2Base,
    /// x ≥ y ⇒ log(x+y) ≥ log y + 1
    Cor1,
    /// (a+b)log(x+y) ≥ a log x + b log y + 1
    L3 { a: f64, b: f64 },
    /// L3 at (105/163, 3115/7824)
    L4,
    /// †t ≤ log|t|
    RankLog,
    /// Σq_i log a_i ≥ q log b with q_i ≥ q lifts to any offset c ≥ 1
    LiftLogCf,
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaId::L1 => write!(f, "L1"),
            LemmaId::L2i => write!(f, "L2(i)"),
            LemmaId::L2ii => write!(f, "L2(ii)"),
            LemmaId::L2Base => write!(f, "L2"),
            LemmaId::Cor1 => write!(f, "Cor1"),
            LemmaId::L3 { a, b } => write!(f, "L3({a},{b})"),
            LemmaId::L4 => write!(f, "L4"),
            LemmaId::RankLog => write!(f, "RankLog"),
            LemmaId::LiftLogCf => write!(f, "LiftLogCf"),
        }
    }
}

impl LemmaId {
    /// Every lemma in the default suite, with three L3 parameter pairs.
    pub fn suite() -> Vec<LemmaId> {
        vec![
            LemmaId::L1,
            LemmaId::L2i,
            LemmaId::L2ii,
            LemmaId::L2Base,
            LemmaId::Cor1,
            LemmaId::L3 { a: 0.5, b: 0.5 },
            LemmaId::L3 { a: 1.0, b: 0.5 },
            LemmaId::L3 { a: 1.0, b: 1.0 },
            LemmaId::L4,
            LemmaId::RankLog,
            LemmaId::LiftLogCf,
        ]
    }

    /// LHS − RHS at a point (x, y ≥ 1).
    fn margin2(&self, x: f64, y: f64) -> f64 {
        let l = f64::log2;
        let ive = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            LemmaId::L1 => l(x + y) - 0.5 * l(x) - 0.5 * l(y) - 1.0,
            LemmaId::L2i => l(x + y) + ive(x < y) - l(y) - 1.0,
            LemmaId::L2ii => l(x + y) - l(y) - ive(x > y),
            LemmaId::L2Base => l(x + y) - l(y) - ive(x >= y),
            LemmaId::Cor1 => l(x + y) - l(y) - 1.0,
            LemmaId::L3 { a, b } => (a + b) * l(x + y) - a * l(x) - b * l(y) - 1.0,
            LemmaId::L4 => LemmaId::L3 { a: L4_A, b: L4_B }.margin2(x, y),
            LemmaId::RankLog | LemmaId::LiftLogCf => unreachable!(),
        }
    }
}

pub const L4_A: f64 = 105.0 / 163.0;
pub const L4_B: f64 = 3115.0 / 7824.0;

/// The side condition (a+b)^(a+b) / (a^a b^b) ≥ 2 of the L3 schema.
pub fn l3_side_condition(a: f64, b: f64) -> bool {
    a > 0.0 && b > 0.0 && (a + b) * (a + b).log2() - a * a.log2() - b * b.log2() >= 1.0 - TOLERANCE
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub samples: usize,
    pub worst_margin: f64,
    pub witness: Vec<f64>,
    pub passed: bool,
}

struct Tracker {
    samples: usize,
    worst: f64,
    witness: Vec<f64>,
}

impl Tracker {
    fn see(&mut self, margin: f64, point: &[f64]) {
        self.samples += 1;
        if margin < self.worst || self.witness.is_empty() {
            self.worst = margin;
            self.witness = point.to_vec();
        }
    }
}

/// Checks a lemma on a deterministic corner grid plus `samples` random points.
pub fn check_lemma(id: &LemmaId, samples: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tr = Tracker { samples: 0, worst: f64::INFINITY, witness: Vec::new() };
    let mut side_ok = true;
    match id {
        LemmaId::RankLog => {
            for n in 1..=6 {
                for t in all_trees(n).into_iter().filter(Tree::is_rank_biased) {
                    tr.see((t.leaves() as f64).log2() - t.rank() as f64, &[t.leaves() as f64, t.rank() as f64]);
                }
            }
            for _ in 0..samples {
                let n = rng.gen_range(1..=256);
                let t = random_tree(n, TreeKind::RankBiased, &mut rng);
                tr.see((t.leaves() as f64).log2() - t.rank() as f64, &[t.leaves() as f64, t.rank() as f64]);
            }
        }
        LemmaId::LiftLogCf => {
            for _ in 0..samples.max(1) {
                let n = rng.gen_range(1..=3);
                let q: f64 = rng.gen_range(0.0..2.0);
                let qs: Vec<f64> = (0..n).map(|_| q + rng.gen_range(0.0..2.0)).collect();
                let as_: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..100.0)).collect();
                let lhs0: f64 = qs.iter().zip(&as_).map(|(q, a)| q * a.log2()).sum();
                // Largest b allowed by the premise, then shrink it randomly.
                let bmax = if q > 0.0 { (lhs0 / q).exp2().min(1e12) } else { 100.0 };
                let b = bmax * rng.gen_range(0.01..=1.0);
                let c = if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(1.0..100.0) };
                let lhs: f64 = qs.iter().zip(&as_).map(|(q, a)| q * (a + c).log2()).sum();
                let mut point = vec![q, b, c];
                point.extend(&as_);
                tr.see(lhs - q * (b + c).log2(), &point);
            }
        }
        _ => {
            if let LemmaId::L3 { a, b } = id {
                side_ok = l3_side_condition(*a, *b);
            }
            let cor = matches!(id, LemmaId::Cor1);
            for x in 1..=100 {
                for y in 1..=100 {
                    let (x, y) = (x as f64, y as f64);
                    if cor && x < y {
                        continue;
                    }
                    tr.see(id.margin2(x, y), &[x, y]);
                }
            }
            for _ in 0..samples {
                let mut x: f64 = rng.gen_range(0.0f64..20.0).exp2();
                let mut y: f64 = rng.gen_range(0.0f64..20.0).exp2();
                if rng.gen_bool(0.5) {
                    x = x.round().max(1.0);
                    y = y.round().max(1.0);
                }
                if cor && x < y {
                    std::mem::swap(&mut x, &mut y);
                }
                tr.see(id.margin2(x, y), &[x, y]);
            }
        }
    }
    LemmaReport {
        lemma: id.to_string(),
        samples: tr.samples,
        worst_margin: tr.worst,
        witness: tr.witness,
        passed: side_ok && tr.worst >= -TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_is_tight_on_the_diagonal() {
        assert_eq!(LemmaId::L1.margin2(1.0, 1.0), 0.0);
        let r = check_lemma(&LemmaId::L1, 1000, 1);
        assert!(r.passed);
        assert!(r.worst_margin.abs() < 1e-12);
        assert_eq!(r.witness[0], r.witness[1]);
    }

    #[test]
    fn suite_holds_across_seeds() {
        for seed in 0..8 {
            for id in LemmaId::suite() {
                let r = check_lemma(&id, 2000, seed);
                assert!(r.passed, "{} seed {seed}: {} at {:?}", r.lemma, r.worst_margin, r.witness);
            }
        }
    }

    #[test]
    fn l4_corner_margin() {
        let m = LemmaId::L4.margin2(1.0, 1.0);
        assert!((m - (L4_A + L4_B - 1.0)).abs() < 1e-12);
        assert!((m - 0.0423).abs() < 1e-3);
    }

    #[test]
    fn l3_half_half_matches_l1() {
        for x in 1..30 {
            for y in 1..30 {
                let (x, y) = (x as f64, y as f64);
                let d = LemmaId::L3 { a: 0.5, b: 0.5 }.margin2(x, y) - LemmaId::L1.margin2(x, y);
                assert!(d.abs() < 1e-12);
            }
        }
        assert!(l3_side_condition(0.5, 0.5));
        assert!(l3_side_condition(L4_A, L4_B));
        assert!(!l3_side_condition(0.5, 0.25));
    }

    #[test]
    fn violated_schema_reports_a_witness() {
        let r = check_lemma(&LemmaId::L3 { a: 0.4, b: 0.4 }, 100, 3);
        assert!(!r.passed);
        assert!(r.worst_margin < 0.0);
    }
}
