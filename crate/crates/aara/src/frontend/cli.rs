//! The `aara` command line.
//!
//! Exit codes: 0 success, 1 analysis failure (unsat, timeout, derivation
//! error, golden mismatch, soundness violation), 2 tool error.

use super::report::{self, Report};
use super::{bound_table, choose_lang, config, html, load_file, LoadError};
use crate::inference::run::{run, AnalysisResult, RunError, Status};
use crate::potentials::lemmas::{check_lemma, LemmaId};
use crate::potentials::SolParams;
use crate::semantics::eval::{call, EvalOptions};
use crate::semantics::value::parse_value;
use crate::solver::smtlib::{emit, Query};
use crate::solver::{SolverConfig, SolverError};
use crate::soundness::{self, Settings};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

pub const OK: i32 = 0;
pub const FAILED: i32 = 1;
pub const TOOL_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "aara", version, about = "Amortised resource analysis for functional heap programs")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Template language: log, sol, pw, rank, logr or sol(a,b,c). Overrides the POTENTIAL pragma.
    #[arg(long)]
    pub lang: Option<String>,
    /// Parameters a,b,c of the sol language.
    #[arg(long, value_name = "A,B,C")]
    pub sol_params: Option<String>,
    /// Solver budget in seconds.
    #[arg(long, value_name = "SEC")]
    pub timeout: Option<u64>,
    /// Solver executable (default: $AARA_SOLVER or z3).
    #[arg(long)]
    pub solver: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multipliers for cost-free signatures at call sites.
    #[arg(long, value_delimiter = ',', value_name = "K,...")]
    pub k_set: Option<Vec<u32>>,
    /// Constructor refinements must be literally among the guards.
    #[arg(long)]
    pub strict_refinements: bool,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Run the full pipeline and print the bound table.
    Analyze {
        files: Vec<PathBuf>,
        /// Analyze every .ml file in a directory.
        #[arg(long, value_name = "DIR")]
        all: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, value_name = "PATH")]
        proof_html: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Print the let-normal AST as JSON and stop.
        #[arg(long)]
        dump_ast: bool,
    },
    /// Compare bounds against a golden file with exact rationals.
    Check {
        file: PathBuf,
        #[arg(long, value_name = "BOUNDS.json")]
        expect: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Evaluate a function under the cost semantics.
    Eval {
        file: PathBuf,
        #[arg(long = "fn", value_name = "NAME")]
        fun: String,
        /// One argument, e.g. `(node leaf 1 (node leaf 2 leaf))` or `3`. Repeat per parameter.
        #[arg(long, value_name = "VALUE")]
        input: Vec<String>,
        #[arg(long)]
        erase_ticks: bool,
        #[arg(long)]
        trace: bool,
    },
    /// Check the numeric lemma oracles.
    Lemmas {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Differential check of the solved bounds against the interpreter.
    Soundness {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        max_size: u64,
        /// Also halve each costed coefficient and expect detection.
        #[arg(long)]
        mutations: bool,
        /// Length of the insert/delete_min sequence check (0 disables).
        #[arg(long, default_value_t = 64)]
        sequence: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Print the SMT-LIB script handed to the solver.
    DumpSmt {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn solver_cfg(o: &Opts) -> SolverConfig {
    let mut s = SolverConfig::default();
    if let Some(c) = &o.solver {
        s.command = c.clone();
    }
    if let Some(t) = o.timeout {
        s.timeout = Duration::from_secs(t);
    }
    s
}

fn prepare(file: &Path, o: &Opts) -> Result<(crate::syntax::Program, crate::inference::Config)> {
    let prog = load_file(file)?;
    let sol = match &o.sol_params {
        Some(s) => Some(SolParams::parse(s).ok_or_else(|| CliError::Usage(format!("bad --sol-params `{s}`")))?),
        None => None,
    };
    let lang = choose_lang(&prog, o.lang.as_deref(), sol.as_ref()).map_err(CliError::Usage)?;
    Ok((prog, config(lang, o.k_set.clone(), o.strict_refinements)))
}

/// Derivation errors are analysis failures; solver trouble is a tool error.
enum Analyzed {
    Done(Box<AnalysisResult>),
    Failed(String),
}

fn analyze_file(file: &Path, o: &Opts) -> Result<Analyzed> {
    let (prog, cfg) = prepare(file, o)?;
    match run(&prog, &cfg, &solver_cfg(o)) {
        Ok(r) => Ok(Analyzed::Done(Box::new(r))),
        Err(RunError::Derive(e)) => Ok(Analyzed::Failed(format!("{}: derivation failed: {e}", file.display()))),
        Err(RunError::Solver(e)) => Err(e.into()),
    }
}

fn verdict(res: &AnalysisResult) -> i32 {
    if res.status == Status::Sat && res.cert_failures.is_empty() {
        OK
    } else {
        FAILED
    }
}

fn analyze_one(file: &Path, opts: &Opts, html_out: Option<&Path>) -> Outcome {
    let res = match analyze_file(file, opts)? {
        Analyzed::Done(r) => r,
        Analyzed::Failed(msg) => return Ok((FAILED, msg + "\n", None)),
    };
    let mut text = format!("== {} ({})\n{}", file.display(), res.analysis.cfg.lang.name(), bound_table(&res));
    for (n, e) in &res.cert_failures {
        text.push_str(&format!("certificate at node {n} failed: {e}\n"));
    }
    if let Some(p) = html_out {
        write_file(p, &html::render_proof_tree(&res, &file.display().to_string()))?;
    }
    Ok((verdict(&res), text, Some(report::report(&file.display().to_string(), &res))))
}

fn ml_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let mut v: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "ml")).collect();
    v.sort();
    Ok(v)
}

type Outcome = Result<(i32, String, Option<Report>)>;

/// Per-file jobs on a small worker pool; output stays in file order.
fn analyze_many(files: &[PathBuf], opts: &Opts) -> Vec<Outcome> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(files.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..files.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let r = analyze_one(&files[i], opts, None);
                slots.lock().expect("no poisoned worker")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no poisoned worker").into_iter().map(|r| r.expect("every job ran")).collect()
}

fn cmd_analyze(mut files: Vec<PathBuf>, all: Option<PathBuf>, opts: Opts, proof_html: Option<PathBuf>, json: Option<PathBuf>, dump_ast: bool) -> Result<i32> {
    if let Some(d) = all {
        files.extend(ml_files(&d)?);
    }
    if files.is_empty() {
        return Err(CliError::Usage("no input files".into()));
    }
    if dump_ast {
        for f in &files {
            println!("{}", serde_json::to_string_pretty(&load_file(f)?)?);
        }
        return Ok(OK);
    }
    if files.len() > 1 && proof_html.is_some() {
        return Err(CliError::Usage("--proof-html takes a single input file".into()));
    }
    let results = if files.len() == 1 { vec![analyze_one(&files[0], &opts, proof_html.as_deref())] } else { analyze_many(&files, &opts) };
    let mut code = OK;
    let mut reports = Vec::new();
    for r in results {
        let (c, text, rep) = r?;
        print!("{text}");
        code = code.max(c);
        reports.extend(rep);
    }
    if let Some(p) = json {
        let text = if reports.len() == 1 { serde_json::to_string_pretty(&reports[0])? } else { serde_json::to_string_pretty(&reports)? };
        write_file(&p, &(text + "\n"))?;
    }
    Ok(code)
}

fn cmd_check(file: PathBuf, expect: PathBuf, opts: Opts) -> Result<i32> {
    let golden = report::parse_golden(&read_file(&expect)?).map_err(|e| CliError::Usage(format!("{}: {e}", expect.display())))?;
    let res = match analyze_file(&file, &opts)? {
        Analyzed::Done(r) => r,
        Analyzed::Failed(msg) => {
            println!("{msg}");
            return Ok(FAILED);
        }
    };
    let mism = report::compare(&golden, &report::bounds(&res)).map_err(|e| CliError::Usage(format!("{}: {e}", expect.display())))?;
    if mism.is_empty() {
        println!("{}: pass", file.display());
        Ok(verdict(&res))
    } else {
        println!("{}: FAIL", file.display());
        for m in mism {
            println!("  {m}");
        }
        Ok(FAILED)
    }
}

fn cmd_eval(file: PathBuf, fun: String, input: Vec<String>, erase_ticks: bool, trace: bool) -> Result<i32> {
    let prog = load_file(&file)?;
    let args = input.iter().map(|s| parse_value(s).map_err(|e| CliError::Usage(format!("bad --input `{s}`: {e}")))).collect::<Result<Vec<_>>>()?;
    let opts = EvalOptions { erase_ticks, trace, strict_refinements: true, ..EvalOptions::default() };
    match call(&prog, &fun, &args, &opts) {
        Ok(o) => {
            for t in &o.trace {
                println!("{}{} {} cost {}", "  ".repeat(t.depth), t.rule, t.span, crate::rat::fmt_rat(&t.cost));
            }
            println!("value: {}", o.value);
            println!("cost: {}", crate::rat::fmt_rat(&o.cost));
            Ok(OK)
        }
        Err(e) => Err(CliError::Usage(format!("evaluation failed: {e}"))),
    }
}

fn cmd_lemmas(samples: usize, seed: u64, json: Option<PathBuf>) -> Result<i32> {
    let reports: Vec<_> = LemmaId::suite().iter().map(|id| check_lemma(id, samples, seed)).collect();
    for r in &reports {
        println!("{:<12} {:>7} samples  worst margin {:>12.3e}  {}", r.lemma, r.samples, r.worst_margin, if r.passed { "ok" } else { "VIOLATED" });
    }
    if let Some(p) = json {
        write_file(&p, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    }
    Ok(if reports.iter().all(|r| r.passed) { OK } else { FAILED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_soundness(file: PathBuf, opts: Opts, trials: usize, max_size: u64, mutations: bool, sequence: usize, json: Option<PathBuf>) -> Result<i32> {
    let res = match analyze_file(&file, &opts)? {
        Analyzed::Done(r) if r.status == Status::Sat => r,
        Analyzed::Done(r) => {
            print!("{}", bound_table(&r));
            return Ok(FAILED);
        }
        Analyzed::Failed(msg) => {
            println!("{msg}");
            return Ok(FAILED);
        }
    };
    let st = Settings { trials, max_size, seed: opts.seed };
    let sigs = soundness::check_result(&res, &st);
    let mut ok = true;
    for r in &sigs {
        let tight = r.tightest.as_ref().map_or(f64::NAN, |w| w.margin);
        match &r.violation {
            None => println!("{:<22} {} trials ({} skipped)  min margin {tight:.6}", r.signature, r.trials, r.skipped),
            Some(w) => {
                ok = false;
                println!("{:<22} VIOLATED: args {:?} X {:?}: ψ {:.6} < cost {} + φ {:.6}", r.signature, w.args, w.x_size, w.psi, w.cost, w.phi);
            }
        }
    }
    if sequence > 0 {
        match soundness::sequence_check(&res, sequence, opts.seed) {
            Some(s) => {
                ok &= s.ok();
                println!("sequence of {} ops: actual {:.3} ≤ budget {:.3}: {}", s.operations, s.actual, s.budget, if s.ok() { "ok" } else { "VIOLATED" });
            }
            None => println!("sequence check skipped (needs meld and delete_min)"),
        }
    }
    if mutations {
        let ms = soundness::mutation_check(&res, &Settings { trials: trials.max(1000), ..st.clone() });
        let missed: Vec<_> = ms.iter().filter(|m| !m.detected).collect();
        println!("mutations: {}/{} detected", ms.len() - missed.len(), ms.len());
        for m in missed {
            println!("  undetected: {} {}", m.signature, m.term);
        }
    }
    if let Some(p) = json {
        let mut rep = report::report(&file.display().to_string(), &res);
        rep.soundness = Some(sigs);
        write_file(&p, &(serde_json::to_string_pretty(&rep)? + "\n"))?;
    }
    Ok(if ok { OK } else { FAILED })
}

fn cmd_dump_smt(file: PathBuf, opts: Opts, output: Option<PathBuf>) -> Result<i32> {
    let (prog, cfg) = prepare(&file, &opts)?;
    let a = match crate::inference::analyze(&prog, &cfg) {
        Ok(a) => a,
        Err(e) => {
            println!("{}: derivation failed: {e}", file.display());
            return Ok(FAILED);
        }
    };
    let text = emit(&a.cs, &crate::inference::run::objectives(&a), Query::Values);
    match output {
        Some(p) => write_file(&p, &text)?,
        None => print!("{text}"),
    }
    Ok(OK)
}

/// Runs one command line and returns the exit code.
pub fn cli_run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { TOOL_ERROR } else { OK };
        }
    };
    let r = match cli.cmd {
        Cmd::Analyze { files, all, opts, proof_html, json, dump_ast } => cmd_analyze(files, all, opts, proof_html, json, dump_ast),
        Cmd::Check { file, expect, opts } => cmd_check(file, expect, opts),
        Cmd::Eval { file, fun, input, erase_ticks, trace } => cmd_eval(file, fun, input, erase_ticks, trace),
        Cmd::Lemmas { samples, seed, json } => cmd_lemmas(samples, seed, json),
        Cmd::Soundness { file, opts, trials, max_size, mutations, sequence, json } => cmd_soundness(file, opts, trials, max_size, mutations, sequence, json),
        Cmd::DumpSmt { file, opts, output } => cmd_dump_smt(file, opts, output),
    };
    r.unwrap_or_else(|e| {
        eprintln!("aara: {e}");
        TOOL_ERROR
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let c = Cli::try_parse_from(["aara", "analyze", "a.ml", "--lang", "sol", "--sol-params", "0,1/2,0", "--k-set", "0,1", "--strict-refinements"]).unwrap();
        let Cmd::Analyze { opts, .. } = c.cmd else { panic!() };
        assert_eq!(opts.k_set, Some(vec![0, 1]));
        assert!(opts.strict_refinements);
        assert_eq!(opts.sol_params.as_deref(), Some("0,1/2,0"));
    }

    #[test]
    fn missing_file_is_a_tool_error() {
        assert_eq!(cli_run(["aara", "analyze", "/nonexistent/x.ml"]), TOOL_ERROR);
        assert_eq!(cli_run(["aara", "frobnicate"]), TOOL_ERROR);
    }
}
