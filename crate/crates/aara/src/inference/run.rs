//! The whole pipeline: signatures, derivations, solving, bounds.

use super::sig::{self, SigKind};
use super::{analyze, Analysis, Config, DeriveError};
use crate::constraints::Model;
use crate::rat::Rat;
use crate::solver::{self, Outcome, SolverConfig, SolverError};
use crate::syntax::{Name, Program};
use crate::templates::{Instance, Term};
use num_traits::Zero;
use std::time::{Duration, Instant};

/// A solved signature.
#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub fun: Name,
    pub label: String,
    pub kind: SigKind,
    pub params: Vec<Name>,
    pub lhs: Instance,
    pub rhs: Instance,
    /// LHS minus the result potential spread over the parameters.
    pub cost: Instance,
}

impl Bound {
    pub fn coefficient(&self, t: &Term) -> Rat {
        self.cost.coefficient(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Clone, Debug, Default)]
pub struct Timings {
    pub derive: Duration,
    pub solve: Duration,
}

#[derive(Debug)]
pub struct AnalysisResult {
    pub analysis: Analysis,
    pub status: Status,
    pub model: Option<Model>,
    /// Primary objective value.
    pub objective: Option<Rat>,
    pub bounds: Vec<Bound>,
    /// Constraint indices of the unsat core.
    pub core: Vec<usize>,
    /// W nodes whose certificate failed the exact re-check.
    pub cert_failures: Vec<(usize, String)>,
    pub timings: Timings,
}

impl AnalysisResult {
    /// The default costed bound of `f`, or its worst-case one.
    pub fn bound(&self, f: &str) -> Option<&Bound> {
        let of_f = || self.bounds.iter().filter(move |b| b.fun == f);
        of_f().find(|b| b.kind == SigKind::Costed).or_else(|| of_f().find(|b| b.kind == SigKind::WorstCase))
    }

    pub fn bound_of(&self, f: &str, kind: SigKind) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.fun == f && b.kind == kind)
    }

    /// Derivation nodes owning a core constraint.
    pub fn core_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.core.iter().map(|&i| self.analysis.cs.items[i].1.node).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub fn objectives(a: &Analysis) -> Vec<crate::constraints::LinExpr> {
    vec![a.objective.clone(), sig::tiebreak(&a.sigs)]
}

fn bounds(a: &Analysis, m: &Model) -> Vec<Bound> {
    let mut out = Vec::new();
    for s in a.sigs.sigs.iter().filter(|s| s.kind.is_costed()) {
        let mut cost: Vec<(Term, Rat)> = Vec::new();
        let mut acc = std::collections::BTreeMap::<Term, Rat>::new();
        for (t, e) in s.lhs.view() {
            *acc.entry(t).or_default() += e.eval(m);
        }
        for (t, e) in sig::spread(&s.rhs.view(), &s.params, &a.cfg.lang) {
            *acc.entry(t).or_default() -= e.eval(m);
        }
        for (t, r) in acc {
            if !r.is_zero() && !t.is_zero_valued() {
                cost.push((t, r));
            }
        }
        out.push(Bound {
            fun: s.fun.clone(),
            label: s.label(),
            kind: s.kind,
            params: s.params.clone(),
            lhs: s.lhs.instantiate(m),
            rhs: s.rhs.instantiate(m),
            cost: Instance { terms: cost },
        });
    }
    out
}

/// Signature creation, derivation, optimization and bound extraction.
pub fn run(prog: &Program, cfg: &Config, solver_cfg: &SolverConfig) -> Result<AnalysisResult, RunError> {
    let t0 = Instant::now();
    let analysis = analyze(prog, cfg)?;
    let derive = t0.elapsed();
    let t1 = Instant::now();
    let outcome = solver::solve(&analysis.cs, &objectives(&analysis), solver_cfg)?;
    let timings = Timings { derive, solve: t1.elapsed() };
    let mut res = AnalysisResult {
        analysis,
        status: Status::Timeout,
        model: None,
        objective: None,
        bounds: Vec::new(),
        core: Vec::new(),
        cert_failures: Vec::new(),
        timings,
    };
    match outcome {
        Outcome::Sat { model, objectives } => {
            res.status = Status::Sat;
            res.bounds = bounds(&res.analysis, &model);
            res.objective = objectives.into_iter().next();
            for c in &res.analysis.certs {
                if let Err(e) = c.check_exact(&model) {
                    res.cert_failures.push((c.node, e.to_string()));
                }
            }
            res.model = Some(model);
        }
        Outcome::Unsat { core } => {
            res.status = Status::Unsat;
            res.core = core;
        }
        Outcome::Timeout { .. } => {}
    }
    Ok(res)
}
