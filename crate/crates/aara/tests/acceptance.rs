//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The extended golden-ratio runs (criterion 5) take tens of minutes and only
//! run with AARA_EXTENDED=1; otherwise the line reads SKIP.

use aara::frontend::{choose_lang, config, load_file, report};
use aara::inference::run::{run, AnalysisResult, Status};
use aara::inference::{Rule, SigKind};
use aara::potentials::lemmas::{check_lemma, LemmaId};
use aara::rat::{int, rat, Rat};
use aara::semantics::TreeKind;
use aara::solver::smtlib::{emit, Query};
use aara::solver::SolverConfig;
use aara::soundness::local::check_forest;
use aara::soundness::{check_result, mutation_check, sequence_check, Settings};
use aara::templates::Term;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

enum Verdict {
    Pass(String),
    Fail(String),
    /// Fails, but exactly as documented; does not change the exit status.
    KnownFail(String),
    Skip(String),
}

/// Halving one log term of the piecewise skew heap meld bound leaves a bound
/// that still holds (no violation up to size 1024): the inferred coefficients
/// are not individually tight, so no test can detect these three mutations.
const UNDETECTABLE: [&str; 3] = [
    "skew_pw.ml meld:costed0 log|x|",
    "skew_pw.ml meld:costed0 log|y|",
    "skew_pw.ml meld:costed0 log(|x| + |y| - 1)",
];

fn bench(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("bench").join(name)
}

struct Solved {
    name: &'static str,
    res: AnalysisResult,
    elapsed: Duration,
    kind: TreeKind,
}

fn solve(name: &'static str, budget: Duration, kind: TreeKind) -> Result<Solved, String> {
    let prog = load_file(&bench(name)).map_err(|e| e.to_string())?;
    let lang = choose_lang(&prog, None, None)?;
    let solver = SolverConfig { timeout: budget, ..SolverConfig::default() };
    let t = Instant::now();
    let res = run(&prog, &config(lang, None, false), &solver).map_err(|e| format!("{name}: {e}"))?;
    let elapsed = t.elapsed();
    match res.status {
        Status::Sat => Ok(Solved { name, res, elapsed, kind }),
        s => Err(format!("{name}: {s:?} after {:.0}s", elapsed.as_secs_f64())),
    }
}

fn log(vars: &[&str], c: i8) -> Term {
    Term::log(vars, c)
}

fn rank(x: &str) -> Term {
    Term::Rank(x.into())
}

/// Exact comparison of one bound's amortised cost.
fn expect(s: &Solved, fun: &str, kind: SigKind, want: &[(Term, Rat)]) -> Result<(), String> {
    let b = s.res.bound_of(fun, kind).ok_or_else(|| format!("{}: no {fun} bound", s.name))?;
    let mut got = b.cost.terms.clone();
    got.sort();
    let mut want = want.to_vec();
    want.sort();
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: {fun} = {}", s.name, aara::frontend::render_instance(&b.cost)))
    }
}

fn timed(s: &Solved, budget: Duration) -> Result<(), String> {
    if s.elapsed <= budget {
        Ok(())
    } else {
        Err(format!("{} took {:.0}s, budget {}s", s.name, s.elapsed.as_secs_f64(), budget.as_secs()))
    }
}

fn verdict(r: Result<String, String>) -> Verdict {
    match r {
        Ok(d) => Verdict::Pass(d),
        Err(d) => Verdict::Fail(d),
    }
}

fn secs(s: &Solved) -> String {
    format!("{:.1}s", s.elapsed.as_secs_f64())
}

fn c1(swap: &Result<Solved, String>) -> Verdict {
    verdict(swap.as_ref().map_err(Clone::clone).and_then(|s| {
        timed(s, Duration::from_secs(60))?;
        expect(s, "swap", SigKind::Costed, &[(log(&["x"], 0), int(1))])?;
        let b = s.res.bound("swap").unwrap();
        let phi = Term::Phi("x".into());
        let lhs_ok = b.lhs.terms.len() == 2 && b.lhs.coefficient(&log(&["x"], 0)) == int(1) && b.lhs.coefficient(&phi) == int(1);
        let rhs_ok = b.rhs.terms == vec![(Term::Phi(aara::templates::RESULT.into()), int(1))];
        if !(lhs_ok && rhs_ok) {
            return Err(format!("swap signature {:?} -> {:?}", b.lhs.terms, b.rhs.terms));
        }
        if s.res.objective != Some(int(4)) {
            return Err(format!("objective {:?}", s.res.objective));
        }
        Ok(format!("log|x|, objective 4, {}", secs(s)))
    }))
}

fn c2(pw: &Result<Solved, String>) -> Verdict {
    verdict(pw.as_ref().map_err(Clone::clone).and_then(|s| {
        timed(s, Duration::from_secs(600))?;
        expect(s, "meld", SigKind::Costed, &[(log(&["x", "y"], -1), int(1)), (log(&["x"], 0), int(1)), (log(&["y"], 0), int(1))])?;
        expect(s, "delete_min", SigKind::Costed, &[(log(&["x"], 0), int(3))])?;
        Ok(format!("meld log(|x|+|y|-1) + log|x| + log|y|, delete_min 3·log|x|, {}", secs(s)))
    }))
}

fn c3(rw: &Result<Solved, String>) -> Verdict {
    verdict(rw.as_ref().map_err(Clone::clone).and_then(|s| {
        timed(s, Duration::from_secs(600))?;
        expect(s, "meld", SigKind::WorstCase, &[(rank("x"), int(1)), (rank("y"), int(1))])?;
        expect(s, "delete_min", SigKind::WorstCase, &[(log(&["x"], 0), int(2))])?;
        Ok(format!("meld †x + †y, delete_min 2·log|x|, {}", secs(s)))
    }))
}

fn c4(ww: &Result<Solved, String>) -> Verdict {
    verdict(ww.as_ref().map_err(Clone::clone).and_then(|s| {
        timed(s, Duration::from_secs(900))?;
        expect(s, "meld", SigKind::WorstCase, &[(log(&["x"], 0), int(1)), (log(&["y"], 0), int(1))])?;
        expect(s, "delete_min", SigKind::WorstCase, &[(log(&["x"], 0), int(2))])?;
        Ok(format!("meld log|x| + log|y|, delete_min 2·log|x|, {}", secs(s)))
    }))
}

fn c5() -> Verdict {
    if std::env::var_os("AARA_EXTENDED").is_none() {
        return Verdict::Skip("extended run; set AARA_EXTENDED=1 (golden ratio ≤ 60 min, Sol(-1/2,0,1/2) ≤ 30 min)".into());
    }
    let golden = solve("skew_golden.ml", Duration::from_secs(3600), TreeKind::Any);
    let golden_line = match &golden {
        Ok(s) => expect(
            s,
            "meld",
            SigKind::Costed,
            &[(log(&["x", "y"], -1), rat(105, 163)), (log(&["x"], 0), rat(3115, 7824)), (log(&["y"], 0), rat(3115, 7824))],
        )
        .map(|_| format!("golden ratio coefficients in {}", secs(s))),
        Err(e) => Err(e.clone()),
    };
    if let Ok(d) = golden_line {
        return Verdict::Pass(d);
    }
    let half = solve("skew_sol_minus_left.ml", Duration::from_secs(1800), TreeKind::Any);
    verdict(half.and_then(|s| {
        let h = rat(1, 2);
        expect(&s, "meld", SigKind::Costed, &[(log(&["x", "y"], -1), h.clone()), (log(&["x"], 0), h.clone()), (log(&["y"], 0), h)])?;
        expect(&s, "delete_min", SigKind::Costed, &[(log(&["x"], 0), rat(3, 2))])?;
        Ok(format!("fallback Sol(-1/2,0,1/2) row in {} ({})", secs(&s), golden_line.unwrap_err()))
    }))
}

fn c6() -> Verdict {
    let t = Instant::now();
    let mut worst: Vec<String> = Vec::new();
    for id in LemmaId::suite() {
        let r = check_lemma(&id, 10_000, 6);
        if !r.passed {
            worst.push(format!("{} margin {:e} at {:?}", r.lemma, r.worst_margin, r.witness));
        }
    }
    let el = t.elapsed();
    if !worst.is_empty() {
        Verdict::Fail(worst.join("; "))
    } else if el > Duration::from_secs(30) {
        Verdict::Fail(format!("{:.1}s > 30s", el.as_secs_f64()))
    } else {
        Verdict::Pass(format!("{} lemmas × 10^4 samples in {:.1}s", LemmaId::suite().len(), el.as_secs_f64()))
    }
}

fn c7(by_lang: &[&Result<Solved, String>]) -> Verdict {
    let t = Instant::now();
    let mut notes = Vec::new();
    for s in by_lang {
        let s = match s {
            Ok(s) => s,
            Err(e) => return Verdict::Fail(e.clone()),
        };
        let rep = check_forest(&s.res.analysis, s.res.model.as_ref().unwrap(), s.kind, 100, 7);
        if !rep.ok() {
            return Verdict::Fail(format!("{}: {}", s.name, rep.failures[0]));
        }
        for r in [Rule::ConstLeaf, Rule::ConstNode, Rule::Match, Rule::Let, Rule::W, Rule::Tick, Rule::App] {
            if rep.count(r) < 100 {
                return Verdict::Fail(format!("{}: {r} checked only {} times", s.name, rep.count(r)));
            }
        }
        notes.push(format!("{} {}", s.res.analysis.cfg.lang.name(), rep.checked.values().sum::<usize>()));
    }
    let el = t.elapsed();
    if el > Duration::from_secs(300) {
        return Verdict::Fail(format!("{:.0}s > 300s", el.as_secs_f64()));
    }
    Verdict::Pass(format!("valuations per language: {} ({:.0}s)", notes.join(", "), el.as_secs_f64()))
}

fn c8(all: &[&Result<Solved, String>]) -> Verdict {
    let (mut w, mut certs, mut samples) = (0, 0, 0);
    for s in all {
        let s = match s {
            Ok(s) => s,
            Err(e) => return Verdict::Fail(e.clone()),
        };
        let a = &s.res.analysis;
        let model = s.res.model.as_ref().unwrap();
        let w_nodes: Vec<_> = a.forest.nodes.iter().filter(|n| n.rule == Rule::W).collect();
        if w_nodes.iter().any(|n| n.cert.is_none()) {
            return Verdict::Fail(format!("{}: W node without certificate", s.name));
        }
        if let Some((n, e)) = s.res.cert_failures.first() {
            return Verdict::Fail(format!("{}: node {n}: {e}", s.name));
        }
        w += w_nodes.len();
        for c in &a.certs {
            match c.check_samples(&a.cfg.lang, s.kind, model, 20, 8) {
                Ok(k) => samples += k,
                Err(e) => return Verdict::Fail(format!("{}: node {}: {e}", s.name, c.node)),
            }
        }
        certs += a.certs.len();
    }
    Verdict::Pass(format!("{w} W nodes, {certs} certificates exact, {samples} numeric samples"))
}

fn c9(all: &[&Result<Solved, String>]) -> Verdict {
    let st = Settings { trials: 1000, max_size: 64, seed: 9 };
    let (mut sigs, mut seqs, mut muts) = (0, 0, 0);
    let mut missed = Vec::new();
    for s in all {
        let s = match s {
            Ok(s) => s,
            Err(e) => return Verdict::Fail(e.clone()),
        };
        for r in check_result(&s.res, &st) {
            if let Some(w) = &r.violation {
                return Verdict::Fail(format!("{} {}: {:?}", s.name, r.signature, w));
            }
            sigs += 1;
        }
        if let Some(q) = sequence_check(&s.res, 64, 9) {
            if !q.ok() {
                return Verdict::Fail(format!("{}: sequence cost {} > budget {}", s.name, q.actual, q.budget));
            }
            seqs += 1;
        }
        for m in mutation_check(&s.res, &st) {
            muts += 1;
            if !m.detected {
                missed.push(format!("{} {} {}", s.name, m.signature, m.term));
            }
        }
    }
    let summary = format!("{sigs} signatures × 1000 trials, {seqs} sequence checks, {}/{muts} mutations caught", muts - missed.len());
    if missed.is_empty() {
        Verdict::Pass(summary)
    } else if missed.iter().all(|m| UNDETECTABLE.contains(&m.as_str())) {
        Verdict::KnownFail(format!("{summary}; halved bounds that remain valid: {}", missed.join(", ")))
    } else {
        Verdict::Fail(format!("{summary}; undetected: {}", missed.join(", ")))
    }
}

fn c10() -> Verdict {
    let once = |name: &str| -> Result<(String, String), String> {
        let prog = load_file(&bench(name)).map_err(|e| e.to_string())?;
        let cfg = config(choose_lang(&prog, None, None)?, None, false);
        let res = run(&prog, &cfg, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let smt = emit(&res.analysis.cs, &aara::inference::run::objectives(&res.analysis), Query::Values);
        let json = serde_json::to_string(&report::bounds(&res)).map_err(|e| e.to_string())?;
        Ok((smt, json))
    };
    verdict((|| {
        let a = once("swap.ml")?;
        let b = once("swap.ml")?;
        if a.0 != b.0 {
            return Err("SMT emissions differ".into());
        }
        if a.1 != b.1 {
            return Err("bound JSON differs".into());
        }
        let emit_only = |name: &str| -> Result<String, String> {
            let prog = load_file(&bench(name)).map_err(|e| e.to_string())?;
            let cfg = config(choose_lang(&prog, None, None)?, None, false);
            let an = aara::inference::analyze(&prog, &cfg).map_err(|e| e.to_string())?;
            Ok(emit(&an.cs, &aara::inference::run::objectives(&an), Query::Values))
        };
        for name in ["skew_pw.ml", "rank_worst.ml", "weight_worst.ml"] {
            if emit_only(name)? != emit_only(name)? {
                return Err(format!("{name}: SMT emissions differ"));
            }
        }
        Ok(format!("swap SMT {} bytes and bound JSON identical across runs; skew/rank/weight emissions identical", a.0.len()))
    })())
}

fn main() {
    let swap = solve("swap.ml", Duration::from_secs(60), TreeKind::Any);
    let pw = solve("skew_pw.ml", Duration::from_secs(600), TreeKind::Any);
    let rw = solve("rank_worst.ml", Duration::from_secs(600), TreeKind::RankBiased);
    let ww = solve("weight_worst.ml", Duration::from_secs(900), TreeKind::WeightBiased);

    let lines: Vec<(&str, Verdict)> = vec![
        ("swap bound", c1(&swap)),
        ("skew heap, piecewise", c2(&pw)),
        ("rank-biased worst case", c3(&rw)),
        ("weight-biased worst case", c4(&ww)),
        ("golden ratio (extended)", c5()),
        ("lemma oracles", c6()),
        ("constraint generator soundness", c7(&[&ww, &swap, &pw, &rw])),
        ("Farkas audit", c8(&[&swap, &pw, &rw, &ww])),
        ("differential soundness", c9(&[&swap, &pw, &rw, &ww])),
        ("determinism", c10()),
    ];
    let mut failed = 0;
    for (i, (name, v)) in lines.iter().enumerate() {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::KnownFail(d) => ("FAIL", d),
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {:>2} {name}: {tag} ({detail})", i + 1);
    }
    let known = lines.iter().filter(|(_, v)| matches!(v, Verdict::KnownFail(_))).count();
    if known > 0 {
        println!("{known} known failure(s), see README");
    }
    if failed > 0 {
        println!("{failed} unexpected failure(s)");
        std::process::exit(1);
    }
}
