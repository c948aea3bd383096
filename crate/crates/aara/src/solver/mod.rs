//! External solver driver: emits SMT-LIB, runs z3 as a subprocess and reads
//! models and unsat cores back.

pub mod sexp;
pub mod smtlib;

use crate::constraints::{ConstraintSet, LinExpr, Model, VarId};
use crate::rat::Rat;
use sexp::Sexp;
use smtlib::Query;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "AARA_SOLVER";

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub command: PathBuf,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        let command = std::env::var_os(SOLVER_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig { command, timeout: Duration::from_secs(15 * 60) }
    }
}

#[derive(Debug)]
pub enum Outcome {
    Sat { model: Model, objectives: Vec<Rat> },
    /// Constraint indices of the core.
    Unsat { core: Vec<usize> },
    Timeout { elapsed: Duration },
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver {cmd}: {err}")]
    Spawn { cmd: String, err: std::io::Error },
    #[error("solver exited abnormally ({status}): {stderr}")]
    Crash { status: String, stderr: String },
    #[error("unparsable solver output: {0}")]
    Parse(String),
    #[error("solver returned unknown: {0}")]
    Unknown(String),
    #[error("solver model violates constraint(s) {0:?}")]
    BadModel(Vec<usize>),
}

struct Run {
    stdout: String,
    timed_out: bool,
    elapsed: Duration,
}

fn run(cfg: &SolverConfig, script: &str) -> Result<Run, SolverError> {
    let secs = cfg.timeout.as_secs().max(1);
    let start = Instant::now();
    let mut child = Command::new(&cfg.command)
        .arg("-in")
        .arg("-smt2")
        .arg(format!("-T:{secs}"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|err| SolverError::Spawn { cmd: cfg.command.display().to_string(), err })?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = script.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    // z3 enforces -T itself; the grace period only guards against a hung process.
    let hard = cfg.timeout + Duration::from_secs(5);
    let mut killed = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(st)) => break Some(st),
            Ok(None) if start.elapsed() > hard => {
                let _ = child.kill();
                let _ = child.wait();
                killed = true;
                break None;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(_) => break None,
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    let elapsed = start.elapsed();
    let first = out.split_whitespace().next().unwrap_or("");
    let timed_out = killed || first == "timeout" || (first == "unknown" && elapsed >= cfg.timeout);
    if !timed_out {
        if let Some(st) = status {
            if !st.success() && !matches!(first, "sat" | "unsat" | "unknown") {
                return Err(SolverError::Crash { status: st.to_string(), stderr: format!("{err}{out}") });
            }
        }
    }
    Ok(Run { stdout: out, timed_out, elapsed })
}

/// Solves `cs`, minimizing `objectives` lexicographically. On unsat a second
/// run extracts a core.
pub fn solve(cs: &ConstraintSet, objectives: &[LinExpr], cfg: &SolverConfig) -> Result<Outcome, SolverError> {
    let r = run(cfg, &smtlib::emit(cs, objectives, Query::Values))?;
    if r.timed_out {
        return Ok(Outcome::Timeout { elapsed: r.elapsed });
    }
    let items = sexp::parse_all(&r.stdout).map_err(SolverError::Parse)?;
    match items.first() {
        Some(Sexp::Atom(s)) if s == "sat" => {}
        Some(Sexp::Atom(s)) if s == "unsat" => return core(cs, cfg),
        Some(Sexp::Atom(s)) if s == "unknown" => return Err(SolverError::Unknown(r.stdout.trim().to_string())),
        _ => return Err(SolverError::Parse(r.stdout.chars().take(400).collect())),
    }
    let model = read_model(cs, &items[1..])?;
    let bad = cs.violations(&model);
    if !bad.is_empty() {
        return Err(SolverError::BadModel(bad));
    }
    let objectives = objectives.iter().map(|o| o.eval(&model)).collect();
    Ok(Outcome::Sat { model, objectives })
}

fn read_model(cs: &ConstraintSet, replies: &[Sexp]) -> Result<Model, SolverError> {
    let by_name: HashMap<String, VarId> = cs.pool.ids().map(|v| (smtlib::symbol(cs.pool.name(v)), v)).collect();
    let mut m = Model::new();
    for reply in replies {
        let Sexp::List(pairs) = reply else {
            return Err(SolverError::Parse(format!("{reply:?}")));
        };
        for p in pairs {
            match p {
                Sexp::List(kv) if kv.len() == 2 => {
                    let Sexp::Atom(name) = &kv[0] else { return Err(SolverError::Parse(format!("{p:?}"))) };
                    if let Some(v) = by_name.get(name) {
                        m.set(*v, sexp::to_rat(&kv[1]).map_err(SolverError::Parse)?);
                    }
                }
                Sexp::List(kv) if matches!(kv.first(), Some(Sexp::Atom(a)) if a == "error") => {
                    return Err(SolverError::Parse(format!("{p:?}")));
                }
                _ => return Err(SolverError::Parse(format!("{p:?}"))),
            }
        }
    }
    Ok(m)
}

fn core(cs: &ConstraintSet, cfg: &SolverConfig) -> Result<Outcome, SolverError> {
    let r = run(cfg, &smtlib::emit(cs, &[], Query::Core))?;
    if r.timed_out {
        return Ok(Outcome::Unsat { core: Vec::new() });
    }
    let items = sexp::parse_all(&r.stdout).map_err(SolverError::Parse)?;
    let mut core = Vec::new();
    if let Some(Sexp::List(xs)) = items.get(1) {
        for x in xs {
            if let Sexp::Atom(a) = x {
                if let Some(i) = a.strip_prefix('a').and_then(|n| n.parse().ok()) {
                    core.push(i);
                }
            }
        }
    }
    core.sort_unstable();
    Ok(Outcome::Unsat { core })
}

/// Re-solves with the first objective pinned strictly below `value`; the
/// reply must be unsat when `value` was optimal.
pub fn below_is_unsat(cs: &ConstraintSet, objective: &LinExpr, value: &Rat, cfg: &SolverConfig) -> Result<bool, SolverError> {
    let mut script = smtlib::emit(cs, &[], Query::Core);
    let pin = format!("(assert (< {} {}))\n", smtlib::linexpr(objective, &cs.pool), smtlib::number(value));
    let at = script.find("(check-sat)").expect("script has check-sat");
    script.insert_str(at, &pin);
    let r = run(cfg, &script)?;
    Ok(!r.timed_out && r.stdout.split_whitespace().next() == Some("unsat"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{Provenance, VarKind};
    use crate::rat::{int, rat};

    fn z3() -> Option<SolverConfig> {
        let cfg = SolverConfig { timeout: Duration::from_secs(20), ..SolverConfig::default() };
        Command::new(&cfg.command).arg("-version").output().ok().map(|_| cfg)
    }

    #[test]
    fn toy_unsat_core_names_both() {
        let Some(cfg) = z3() else { return };
        let mut cs = ConstraintSet::new();
        let q = cs.fresh("q".into(), VarKind::Coeff, 0);
        let r = cs.fresh("r".into(), VarKind::Coeff, 0);
        cs.ge(LinExpr::var(r), &LinExpr::zero(), Provenance::new(0, "T", "r"));
        cs.eq(LinExpr::var(q), &LinExpr::zero(), Provenance::new(1, "T", "zero"));
        cs.eq(LinExpr::var(q), &LinExpr::constant(int(1)), Provenance::new(2, "T", "one"));
        match solve(&cs, &[], &cfg).unwrap() {
            Outcome::Unsat { core } => assert_eq!(core, vec![1, 2]),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn minimizes_exactly() {
        let Some(cfg) = z3() else { return };
        let mut cs = ConstraintSet::new();
        let q = cs.fresh("q".into(), VarKind::Coeff, 0);
        let s = cs.fresh("s".into(), VarKind::Indicator, 0);
        // 3q ≥ 1 + s, and s = 0 is allowed
        cs.ge(LinExpr::term(q, int(3)), &LinExpr::constant(int(1)).plus(&LinExpr::var(s)), Provenance::new(0, "T", ""));
        let obj = LinExpr::var(q);
        match solve(&cs, std::slice::from_ref(&obj), &cfg).unwrap() {
            Outcome::Sat { model, objectives } => {
                assert_eq!(model.get(q), rat(1, 3));
                assert_eq!(objectives, vec![rat(1, 3)]);
                assert!(below_is_unsat(&cs, &obj, &rat(1, 3), &cfg).unwrap());
            }
            o => panic!("{o:?}"),
        }
    }
}
