//! Running queries end to end: configuration, statistics, benchmark
//! sidecars and suites.

use crate::cdcl::{synthesize, Mode, PruneRecord};
use crate::corelang::{alpha_normalize, expr_size, parse_program, Expr};
use crate::engine_fw::{Ctx, SynthError};
use crate::problem::Problem;
use crate::smt::{SmtError, Solver, SolverConfig};
use crate::speclang::{parse_spec_file, SpecError};
use crate::verify::{typecheck, VerifyError};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(#[from] SpecError),
    #[error("{0}")]
    Solver(#[from] SmtError),
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("bad expectation file {0}: {1}")]
    Expect(PathBuf, String),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) | RunError::Io(..) | RunError::Expect(..) => 2,
            RunError::Solver(_) => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub depth: usize,
    pub solver: SolverConfig,
    /// Budget for the whole run.
    pub timeout: Duration,
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Cobalt,
            depth: 5,
            solver: SolverConfig::default(),
            timeout: Duration::from_secs(600),
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Solved,
    Failed,
    Timeout,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Solved => "solved",
            Outcome::Failed => "failed",
            Outcome::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub outcome: Outcome,
    pub program: Option<String>,
    pub program_size: Option<usize>,
    pub nodes_expanded: usize,
    pub nodes_pruned: usize,
    pub smt_issued: usize,
    pub smt_cache_hits: usize,
    pub stuck_nodes: usize,
    pub wall_ms: u64,
}

/// A finished run with the program and prune log kept for inspection.
#[derive(Debug, Clone)]
pub struct Run {
    pub stats: RunStats,
    pub program: Option<Expr>,
    pub prunes: Vec<PruneRecord>,
}

pub fn load_problem(text: &str) -> Result<Problem, RunError> {
    Ok(Problem::from_spec(&parse_spec_file(text)?))
}

pub fn read(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| RunError::Io(path.to_path_buf(), e))
}

/// Synthesize the query of `problem` under `cfg`.
pub fn run_problem(problem: &Problem, cfg: &RunConfig) -> Result<Run, RunError> {
    let start = Instant::now();
    let mut solver = Solver::new(cfg.solver.clone())?;
    let mut ctx = Ctx::new(problem, &mut solver);
    ctx.deadline = Some(start + cfg.timeout);
    ctx.trace = cfg.trace;
    let (outcome, program) = match synthesize(&mut ctx, &problem.goal, cfg.depth, cfg.mode) {
        Ok(Some(e)) => (Outcome::Solved, Some(e)),
        Ok(None) => (Outcome::Failed, None),
        Err(SynthError::Timeout) => (Outcome::Timeout, None),
        Err(SynthError::Solver(e)) => return Err(e.into()),
    };
    let search = ctx.stats;
    let prunes = std::mem::take(&mut ctx.prunes);
    let smt = solver.stats();
    let stats = RunStats {
        outcome,
        program: program.as_ref().map(|e| e.to_string()),
        program_size: program.as_ref().map(expr_size),
        nodes_expanded: search.nodes_expanded,
        nodes_pruned: search.nodes_pruned,
        smt_issued: smt.issued,
        smt_cache_hits: smt.cache_hits,
        stuck_nodes: search.stuck_nodes,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Run { stats, program, prunes })
}

pub fn run_file(path: &Path, cfg: &RunConfig) -> Result<Run, RunError> {
    run_problem(&load_problem(&read(path)?)?, cfg)
}

/// Check `program` against the query of `problem`. Returns the failed
/// side conditions, empty when the program verifies.
pub fn verify_program(problem: &Problem, program: &str, solver: SolverConfig) -> Result<Vec<String>, RunError> {
    let e = parse_program(program)?;
    let mut solver = Solver::new(solver)?;
    match typecheck(problem, &problem.goal, &e, &mut solver) {
        Ok(r) => Ok(r.trace.iter().filter(|t| !t.result.is_valid()).map(|t| t.what.clone()).collect()),
        Err(VerifyError::IllTyped { .. }) => Ok(vec!["program is ill-typed".into()]),
        Err(VerifyError::Solver(e)) => Err(e.into()),
    }
}

/// What a benchmark is expected to do, read from its `.expect` sidecar:
///
/// ```text
/// outcome: solved
/// golden:
/// <program text up to the end of the file>
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Expect {
    pub solvable: bool,
    pub golden: Option<Expr>,
}

impl Expect {
    pub fn parse(text: &str) -> Result<Expect, String> {
        let mut solvable = None;
        let mut golden = None;
        let mut lines = text.lines();
        while let Some(line) = lines.next() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| format!("expected `key: value`, found `{}`", line))?;
            match (key.trim(), value.trim()) {
                ("outcome", "solved") => solvable = Some(true),
                ("outcome", "failed") => solvable = Some(false),
                ("outcome", v) => return Err(format!("unknown outcome `{}`", v)),
                ("golden", "") => {
                    let rest: Vec<&str> = lines.by_ref().collect();
                    golden = Some(parse_program(&rest.join("\n")).map_err(|e| e.to_string())?);
                }
                (k, _) => return Err(format!("unknown key `{}`", k)),
            }
        }
        let solvable = solvable.ok_or("missing `outcome:`")?;
        if golden.is_some() && !solvable {
            return Err("a failing benchmark has no golden program".into());
        }
        Ok(Expect { solvable, golden })
    }

    /// Whether the runs of all modes, cobalt first, meet the expectation.
    pub fn met_by(&self, runs: &[(Mode, &Run)]) -> bool {
        if !self.solvable {
            return runs.iter().all(|(_, r)| r.stats.outcome != Outcome::Solved);
        }
        runs.iter().filter(|(m, _)| *m == Mode::Cobalt).all(|(_, r)| match (&r.program, &self.golden) {
            (Some(e), Some(g)) => alpha_normalize(e) == alpha_normalize(g),
            (Some(_), None) => true,
            (None, _) => false,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub mode: String,
    #[serde(flatten)]
    pub stats: RunStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub expected: String,
    pub pass: bool,
    pub modes: Vec<ModeRow>,
}

fn bench_one(spec: &Path, cfg: &RunConfig) -> Result<BenchRow, RunError> {
    let name = spec.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let sidecar = spec.with_extension("expect");
    let expect = Expect::parse(&read(&sidecar)?).map_err(|m| RunError::Expect(sidecar.clone(), m))?;
    let problem = load_problem(&read(spec)?)?;
    let mut runs = Vec::new();
    for mode in Mode::ALL {
        let cfg = RunConfig { mode, trace: false, ..cfg.clone() };
        runs.push((mode, run_problem(&problem, &cfg)?));
    }
    let pass = expect.met_by(&runs.iter().map(|(m, r)| (*m, r)).collect::<Vec<_>>());
    Ok(BenchRow {
        name,
        expected: if expect.solvable { "solved".into() } else { "failed".into() },
        pass,
        modes: runs.into_iter().map(|(m, r)| ModeRow { mode: m.to_string(), stats: r.stats }).collect(),
    })
}

/// Every `*.spec` in `dir` with a sidecar, in name order.
pub fn suite(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let entries = std::fs::read_dir(dir).map_err(|e| RunError::Io(dir.to_path_buf(), e))?;
    let mut specs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "spec") && p.with_extension("expect").is_file())
        .collect();
    specs.sort();
    Ok(specs)
}

/// Run every benchmark of `dir` in all modes, `jobs` queries at a time.
pub fn bench(dir: &Path, cfg: &RunConfig, jobs: usize) -> Result<Vec<BenchRow>, RunError> {
    let specs = suite(dir)?;
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(specs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(spec) = specs.get(i) else { break };
                let row = bench_one(spec, cfg);
                results.lock().expect("no poisoned lock").push((i, row));
            });
        }
    });
    let mut results = results.into_inner().expect("no poisoned lock");
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

/// Aligned text table, one line per query and mode.
pub fn report_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:<14} {:<11} {:<8} {:>8} {:>8} {:>9} {:>10}  {}\n", "query", "mode", "outcome", "nodes", "pruned", "smt", "ms", "pass");
    for row in rows {
        for (i, m) in row.modes.iter().enumerate() {
            let (name, pass) = if i == 0 { (row.name.as_str(), if row.pass { "pass" } else { "FAIL" }) } else { ("", "") };
            out.push_str(&format!(
                "{:<14} {:<11} {:<8} {:>8} {:>8} {:>9} {:>10}  {}\n",
                name,
                m.mode,
                m.stats.outcome.to_string(),
                m.stats.nodes_expanded,
                m.stats.nodes_pruned,
                m.stats.smt_issued,
                m.stats.wall_ms,
                pass
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests;
