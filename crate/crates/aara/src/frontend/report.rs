//! Versioned JSON reports and golden bound files.
//!
//! A report is `{"schema": "aara-report/1", ...}`. Its `bounds` object is the
//! deterministic part: it depends only on the program, the configuration and
//! the model, and is what golden files store.

use super::kind_name;
use crate::inference::run::{AnalysisResult, Bound, Status};
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::soundness::SigReport;
use crate::templates::Instance;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA: &str = "aara-report/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCoeff {
    pub term: String,
    /// Exact rational, `p` or `p/q`.
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundJson {
    pub fun: String,
    pub kind: String,
    pub params: Vec<String>,
    /// Amortised cost: Ψ minus Φ spread over the parameters.
    pub cost: Vec<TermCoeff>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lhs: Vec<TermCoeff>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rhs: Vec<TermCoeff>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub schema: String,
    pub lang: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    pub bounds: Vec<BoundJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoreEntry {
    pub node: usize,
    pub rule: String,
    pub tag: String,
    pub constraint: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stats {
    pub constraints: usize,
    pub variables: usize,
    pub derivation_nodes: usize,
    pub certificates: usize,
    pub certificate_failures: usize,
    pub derive_ms: u128,
    pub solve_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub file: String,
    #[serde(flatten)]
    pub bounds: Bounds,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub core: Vec<CoreEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soundness: Option<Vec<SigReport>>,
}

fn terms(i: &Instance) -> Vec<TermCoeff> {
    i.terms.iter().map(|(t, q)| TermCoeff { term: t.to_string(), coeff: fmt_rat(q) }).collect()
}

fn bound_json(b: &Bound) -> BoundJson {
    BoundJson {
        fun: b.fun.clone(),
        kind: kind_name(b.kind).into(),
        params: b.params.clone(),
        cost: terms(&b.cost),
        lhs: terms(&b.lhs),
        rhs: terms(&b.rhs),
    }
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Sat => "sat",
        Status::Unsat => "unsat",
        Status::Timeout => "timeout",
    }
}

pub fn bounds(res: &AnalysisResult) -> Bounds {
    Bounds {
        schema: SCHEMA.into(),
        lang: res.analysis.cfg.lang.name(),
        status: status_name(res.status).into(),
        objective: res.objective.as_ref().map(fmt_rat),
        bounds: res.bounds.iter().map(bound_json).collect(),
    }
}

pub fn report(file: &str, res: &AnalysisResult) -> Report {
    let a = &res.analysis;
    let core = res
        .core
        .iter()
        .map(|&i| {
            let (c, p) = &a.cs.items[i];
            CoreEntry { node: p.node, rule: p.rule.to_string(), tag: p.tag.clone(), constraint: c.render(&a.cs.pool) }
        })
        .collect();
    Report {
        file: file.into(),
        bounds: bounds(res),
        stats: Stats {
            constraints: a.cs.len(),
            variables: a.cs.pool.len(),
            derivation_nodes: a.forest.nodes.len(),
            certificates: a.certs.len(),
            certificate_failures: res.cert_failures.len(),
            derive_ms: res.timings.derive.as_millis(),
            solve_ms: res.timings.solve.as_millis(),
        },
        core,
        soundness: None,
    }
}

/// One difference between expected and actual bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub fun: String,
    pub kind: String,
    pub term: String,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}] {}: expected {}, got {}", self.fun, self.kind, self.term, self.expected, self.actual)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error("malformed golden file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("golden file has schema `{0}`, expected `{SCHEMA}`")]
    Schema(String),
    #[error("bad coefficient `{0}`")]
    Coeff(String),
}

pub fn parse_golden(text: &str) -> Result<Bounds, GoldenError> {
    let g: Bounds = serde_json::from_str(text)?;
    if g.schema != SCHEMA {
        return Err(GoldenError::Schema(g.schema));
    }
    Ok(g)
}

fn coeffs(ts: &[TermCoeff]) -> Result<BTreeMap<String, Rat>, GoldenError> {
    ts.iter().map(|t| parse_rat(&t.coeff).map(|q| (t.term.clone(), q)).ok_or_else(|| GoldenError::Coeff(t.coeff.clone()))).collect()
}

/// Exact comparison of amortised costs for every bound listed in `expected`.
/// Functions absent from `expected` are not checked.
pub fn compare(expected: &Bounds, actual: &Bounds) -> Result<Vec<Mismatch>, GoldenError> {
    let mut out = Vec::new();
    let miss = |e: &BoundJson, term: &str, ex: String, ac: String| Mismatch {
        fun: e.fun.clone(),
        kind: e.kind.clone(),
        term: term.into(),
        expected: ex,
        actual: ac,
    };
    if expected.status != actual.status {
        out.push(Mismatch { fun: "*".into(), kind: "*".into(), term: "status".into(), expected: expected.status.clone(), actual: actual.status.clone() });
        return Ok(out);
    }
    for e in &expected.bounds {
        let Some(a) = actual.bounds.iter().find(|a| a.fun == e.fun && a.kind == e.kind) else {
            out.push(miss(e, "bound", "present".into(), "missing".into()));
            continue;
        };
        let (ec, ac) = (coeffs(&e.cost)?, coeffs(&a.cost)?);
        for t in ec.keys().chain(ac.keys()).collect::<std::collections::BTreeSet<_>>() {
            let (x, y) = (ec.get(t).cloned().unwrap_or_default(), ac.get(t).cloned().unwrap_or_default());
            if x != y {
                out.push(miss(e, t, fmt_rat(&x), fmt_rat(&y)));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(cost: &[(&str, &str)]) -> Bounds {
        Bounds {
            schema: SCHEMA.into(),
            lang: "rank".into(),
            status: "sat".into(),
            objective: None,
            bounds: vec![BoundJson {
                fun: "meld".into(),
                kind: "worst_case".into(),
                params: vec!["x".into(), "y".into()],
                cost: cost.iter().map(|(t, c)| TermCoeff { term: t.to_string(), coeff: c.to_string() }).collect(),
                lhs: vec![],
                rhs: vec![],
            }],
        }
    }

    #[test]
    fn compares_exact_rationals() {
        let e = b(&[("†x", "1"), ("†y", "1")]);
        assert!(compare(&e, &b(&[("†y", "2/2"), ("†x", "1")])).unwrap().is_empty());
        let m = compare(&e, &b(&[("†x", "1"), ("†y", "1"), ("log|x|", "1/1000")])).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].term, "log|x|");
    }

    #[test]
    fn golden_round_trips() {
        let e = b(&[("†x", "1")]);
        let text = serde_json::to_string_pretty(&e).unwrap();
        assert_eq!(parse_golden(&text).unwrap(), e);
        assert!(parse_golden(&text.replace(SCHEMA, "other/9")).is_err());
    }
}
