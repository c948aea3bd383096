//! Command line, bound tables, JSON reports and HTML proof trees.

pub mod cli;
pub mod html;
pub mod report;

use crate::inference::run::{AnalysisResult, Bound, Status};
use crate::inference::{Config, SigKind};
use crate::potentials::{Lang, SolParams};
use crate::rat::{fmt_rat, one, to_f64, zero, Rat};
use crate::syntax::{load, FrontError, Program};
use crate::templates::Instance;
use std::fmt::Write;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Front { path: String, source: FrontError },
}

pub fn load_file(path: &Path) -> Result<Program, LoadError> {
    let p = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: p.clone(), source })?;
    load(&src).map_err(|source| LoadError::Front { path: p, source })
}

/// Language from an explicit override, else the POTENTIAL pragma, else `log`.
pub fn choose_lang(prog: &Program, name: Option<&str>, sol: Option<&SolParams>) -> Result<Lang, String> {
    let name = name.map(str::to_string).or_else(|| prog.potential.as_ref().map(|p| p.lang.clone()));
    match name {
        None => Ok(Lang::Log),
        Some(n) => Lang::from_name(&n, sol).ok_or_else(|| format!("unknown template language `{n}`")),
    }
}

/// Builds an analysis configuration; `k_set` defaults to `[1]`.
pub fn config(lang: Lang, k_set: Option<Vec<u32>>, strict: bool) -> Config {
    let mut cfg = Config::new(lang);
    if let Some(k) = k_set {
        cfg.k_set = k;
    }
    cfg.strict_refinements = strict;
    cfg
}

/// `3/2·log|x| + †y`, or `0`.
pub fn render_instance(i: &Instance) -> String {
    render_terms(i.terms.iter().map(|(t, q)| (t.to_string(), q)))
}

fn render_terms<'a>(terms: impl Iterator<Item = (String, &'a Rat)>) -> String {
    let mut out = String::new();
    for (t, q) in terms {
        let neg = *q < zero();
        let mag = if neg { -q.clone() } else { q.clone() };
        match (out.is_empty(), neg) {
            (true, true) => out.push('-'),
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
            (true, false) => {}
        }
        if mag != one() {
            let _ = write!(out, "{}·", fmt_rat(&mag));
        }
        out.push_str(&t);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn approx(i: &Instance) -> Option<String> {
    if i.terms.iter().all(|(_, q)| q.is_integer()) {
        return None;
    }
    let parts: Vec<String> = i.terms.iter().map(|(t, q)| format!("{:.4}·{t}", to_f64(q))).collect();
    Some(parts.join(" + "))
}

pub fn kind_name(k: SigKind) -> &'static str {
    match k {
        SigKind::Costed => "costed",
        SigKind::WorstCase => "worst_case",
        SigKind::CostFree => "cost_free",
    }
}

fn row(b: &Bound, many: bool) -> String {
    let name = if many { format!("{} [{}]", b.fun, kind_name(b.kind)) } else { b.fun.clone() };
    let mut s = format!("{name}: {}", render_instance(&b.cost));
    if let Some(a) = approx(&b.cost) {
        let _ = write!(s, "\n    ≈ {a}");
    }
    s
}

const CORE_LINES: usize = 24;

/// The bound table: one amortised cost per costed signature, then Φ.
/// A pure function of the result.
pub fn bound_table(res: &AnalysisResult) -> String {
    let mut out = String::new();
    match res.status {
        Status::Sat => {}
        Status::Unsat => {
            let _ = writeln!(out, "unsat: {} core constraint(s) at node(s) {:?}", res.core.len(), res.core_nodes());
            for &i in res.core.iter().take(CORE_LINES) {
                let (c, p) = &res.analysis.cs.items[i];
                let _ = writeln!(out, "  node {} {} {}: {}", p.node, p.rule, p.tag, c.render(&res.analysis.cs.pool));
            }
            if res.core.len() > CORE_LINES {
                let _ = writeln!(out, "  … {} more", res.core.len() - CORE_LINES);
            }
            return out;
        }
        Status::Timeout => {
            let _ = writeln!(out, "timeout after {:.1}s", res.timings.solve.as_secs_f64());
            return out;
        }
    }
    for b in &res.bounds {
        let many = res.bounds.iter().filter(|c| c.fun == b.fun).count() > 1;
        let _ = writeln!(out, "{}", row(b, many));
    }
    let phis: Vec<&Bound> = res.bounds.iter().filter(|b| b.kind == SigKind::Costed).collect();
    if let Some(b) = phis.first() {
        let _ = writeln!(out, "Φ(v) = {}", render_instance(&b.rhs));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};
    use crate::templates::Term;

    #[test]
    fn renders_signs_and_units() {
        let i = Instance { terms: vec![(Term::log(&["x"], 0), int(1)), (Term::Rank("y".into()), rat(-3, 2))] };
        assert_eq!(render_instance(&i), "log|x| - 3/2·†y");
        assert_eq!(render_instance(&Instance::default()), "0");
        assert_eq!(approx(&i).unwrap(), "1.0000·log|x| + -1.5000·†y");
    }
}
