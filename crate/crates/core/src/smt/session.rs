use super::{encode, encode_body, SmtError, Validity};
use crate::logic::{Prop, Sort, Vocab};
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Explicit solver executable, possibly with arguments.
    pub command: Option<String>,
    pub timeout_ms: u64,
    pub emit_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { command: None, timeout_ms: 2000, emit_dir: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub issued: usize,
    pub cache_hits: usize,
    pub unknowns: usize,
}

struct Proc {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = self.stdin.write_all(b"(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// One long-lived SMT-LIB process driven through `push`/`pop`, with a
/// result cache keyed on the exact query text.
pub struct Solver {
    program: String,
    args: Vec<String>,
    config: SolverConfig,
    proc: Option<Proc>,
    cache: HashMap<String, Validity>,
    stats: SolverStats,
    emitted: usize,
}

fn on_path(name: &str) -> Option<PathBuf> {
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path).map(|d| d.join(name)).find(|p| p.is_file())
}

fn resolve_command(explicit: Option<&str>) -> Result<(String, Vec<String>), SmtError> {
    let spec = explicit
        .map(str::to_string)
        .or_else(|| std::env::var("COBALT_SOLVER").ok().filter(|s| !s.trim().is_empty()))
        .unwrap_or_else(|| "z3".to_string());
    let mut words = spec.split_whitespace().map(str::to_string);
    let program = words.next().ok_or_else(|| SmtError::SolverNotFound("empty solver command".into()))?;
    let mut args: Vec<String> = words.collect();
    let exists = if program.contains('/') { Path::new(&program).is_file() } else { on_path(&program).is_some() };
    if !exists {
        return Err(SmtError::SolverNotFound(program));
    }
    if args.is_empty() && Path::new(&program).file_name().is_some_and(|n| n.to_string_lossy().contains("z3")) {
        args.push("-in".into());
    }
    Ok((program, args))
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self, SmtError> {
        let (program, args) = resolve_command(config.command.as_deref())?;
        if let Some(dir) = &config.emit_dir {
            std::fs::create_dir_all(dir).map_err(|e| SmtError::ProtocolError(format!("{}: {}", dir.display(), e)))?;
        }
        let mut s = Solver {
            program,
            args,
            config,
            proc: None,
            cache: HashMap::new(),
            stats: SolverStats::default(),
            emitted: 0,
        };
        s.spawn()?;
        Ok(s)
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn timeout_ms(&self) -> u64 {
        self.config.timeout_ms
    }

    fn is_z3(&self) -> bool {
        Path::new(&self.program).file_name().is_some_and(|n| n.to_string_lossy().contains("z3"))
    }

    fn spawn(&mut self) -> Result<(), SmtError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SmtError::SolverNotFound(format!("{}: {}", self.program, e)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        let mut p = Proc { child, stdin, lines: rx };
        let mut init = String::from("(set-option :print-success false)\n");
        if self.is_z3() {
            init.push_str(&format!("(set-option :timeout {})\n", self.config.timeout_ms));
        }
        init.push_str("(set-logic ALL)\n");
        p.stdin.write_all(init.as_bytes()).map_err(|e| SmtError::SolverCrash(e.to_string()))?;
        self.proc = Some(p);
        Ok(())
    }

    fn send(&mut self, text: &str) -> Result<(), SmtError> {
        let p = self.proc.as_mut().ok_or_else(|| SmtError::SolverCrash("no solver process".into()))?;
        p.stdin
            .write_all(text.as_bytes())
            .and_then(|_| p.stdin.flush())
            .map_err(|e| SmtError::SolverCrash(e.to_string()))
    }

    fn read_line(&mut self, wait: Duration) -> Result<Option<String>, SmtError> {
        let p = self.proc.as_mut().ok_or_else(|| SmtError::SolverCrash("no solver process".into()))?;
        match p.lines.recv_timeout(wait) {
            Ok(l) => Ok(Some(l)),
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(SmtError::SolverCrash("solver exited".into())),
        }
    }

    fn restart(&mut self) -> Result<(), SmtError> {
        self.proc = None;
        self.spawn()
    }

    fn emit(&mut self, script: &str) {
        if let Some(dir) = &self.config.emit_dir {
            self.emitted += 1;
            let _ = std::fs::write(dir.join(format!("q{}.smt2", self.emitted)), script);
        }
    }

    fn run(&mut self, body: &str) -> Result<Validity, SmtError> {
        let wait = Duration::from_millis(self.config.timeout_ms + 2000);
        self.send(&format!("(push 1)\n{}", body))?;
        let answer = loop {
            match self.read_line(wait)? {
                None => {
                    self.restart()?;
                    return Ok(Validity::Unknown("timeout".into()));
                }
                Some(l) => {
                    let l = l.trim().to_string();
                    if l.starts_with("(error") {
                        let _ = self.restart();
                        return Err(SmtError::ProtocolError(l));
                    }
                    if matches!(l.as_str(), "sat" | "unsat" | "unknown") {
                        break l;
                    }
                }
            }
        };
        let result = match answer.as_str() {
            "unsat" => Validity::Valid,
            "sat" => Validity::Invalid(None),
            _ => {
                self.send("(get-info :reason-unknown)\n")?;
                let reason = match self.read_line(wait)? {
                    Some(l) => l
                        .trim()
                        .trim_start_matches("(:reason-unknown")
                        .trim_end_matches(')')
                        .trim()
                        .trim_matches('"')
                        .to_string(),
                    None => {
                        self.restart()?;
                        return Ok(Validity::Unknown("timeout".into()));
                    }
                };
                Validity::Unknown(if reason.is_empty() { "unknown".into() } else { reason })
            }
        };
        self.send("(pop 1)\n")?;
        Ok(result)
    }

    /// Decide whether `facts ⇒ goal` holds for all values of the free
    /// variables.
    pub fn check(
        &mut self,
        vocab: &Vocab,
        consts: &BTreeMap<String, Sort>,
        facts: &[Prop],
        goal: &Prop,
    ) -> Result<Validity, SmtError> {
        if goal.is_true() {
            return Ok(Validity::Valid);
        }
        let body = encode_body(vocab, consts, facts, goal)?;
        if let Some(v) = self.cache.get(&body) {
            self.stats.cache_hits += 1;
            return Ok(v.clone());
        }
        self.stats.issued += 1;
        if self.config.emit_dir.is_some() {
            let script = encode(vocab, consts, facts, goal)?;
            self.emit(&script);
        }
        let v = self.run(&body)?;
        if matches!(v, Validity::Unknown(_)) {
            self.stats.unknowns += 1;
        } else {
            self.cache.insert(body, v.clone());
        }
        Ok(v)
    }

    /// Validity of `goal` alone.
    pub fn valid(&mut self, vocab: &Vocab, goal: &Prop) -> Result<Validity, SmtError> {
        self.check(vocab, &BTreeMap::new(), &[], goal)
    }
}
