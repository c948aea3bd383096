//! Type-based inference: signatures, derivations and the constraint system.

pub mod derive;
pub mod run;
pub mod sig;
pub mod tree;

pub use derive::{condition_guard, DeriveError};
pub use sig::{SigEnv, SigKind, Signature};
pub use tree::{DerivationNode, Forest, Rule};

use crate::constraints::{ConstraintSet, LinExpr};
use crate::potentials::Lang;
use crate::syntax::Program;
use crate::templates::Caps;
use crate::weakening::{Certificate, Knowledge};

#[derive(Clone, Debug)]
pub struct Config {
    pub lang: Lang,
    /// Fact base used before lets that bind a call.
    pub knowledge: Knowledge,
    /// Fact base used at pseudo leaves.
    pub leaf_knowledge: Knowledge,
    /// Multipliers allowed for cost-free signatures at call sites.
    pub k_set: Vec<u32>,
    pub caps: Caps,
    /// Constructor refinements must appear literally among the guards.
    pub strict_refinements: bool,
    pub default_cf: usize,
}

impl Config {
    pub fn new(lang: Lang) -> Config {
        let knowledge = Knowledge::defaults(&lang);
        let leaf_knowledge = Knowledge {
            monotone: knowledge.monotone,
            rank_log: knowledge.rank_log,
            rank_mono: knowledge.rank_mono,
            // a node's rank against the log of its size needs L1
            l1: knowledge.l1 && matches!(lang, Lang::Rank),
            ..Knowledge::none()
        };
        Config { lang, knowledge, leaf_knowledge, k_set: vec![1], caps: Caps::default(), strict_refinements: false, default_cf: 1 }
    }
}

/// Everything the solver and the reports need.
#[derive(Debug)]
pub struct Analysis {
    pub prog: Program,
    pub cfg: Config,
    pub cs: ConstraintSet,
    pub sigs: SigEnv,
    pub forest: Forest,
    pub certs: Vec<Certificate>,
    /// (signature index, root node) per derived signature.
    pub roots: Vec<(usize, usize)>,
    pub objective: LinExpr,
}

impl Analysis {
    pub fn root_of(&self, sig: usize) -> Option<usize> {
        self.roots.iter().find(|(s, _)| *s == sig).map(|(_, r)| *r)
    }
}

/// Builds the signatures and derivations of every function.
pub fn analyze(prog: &Program, cfg: &Config) -> Result<Analysis, DeriveError> {
    let mut cs = ConstraintSet::new();
    let sigs = sig::create(&mut cs, prog, &cfg.lang, &cfg.caps, cfg.default_cf);
    let mut roots = Vec::new();
    let (forest, certs) = {
        let mut d = derive::Deriver::new(cfg, &sigs, &mut cs, 0);
        for (i, s) in sigs.sigs.iter().enumerate() {
            let f = prog.fun(&s.fun).expect("signature of a known function");
            roots.push((i, d.derive_sig(&f.body, s)?));
        }
        (d.forest, d.certs)
    };
    let objective = sig::objective(&sigs, &cfg.lang);
    Ok(Analysis { prog: prog.clone(), cfg: cfg.clone(), cs, sigs, forest, certs, roots, objective })
}
