use clap::{Parser, Subcommand};
use cobalt::cdcl::Mode;
use cobalt::run::{self, Outcome, RunConfig, RunError};
use cobalt::smt::SolverConfig;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "cobalt", version, about = "Synthesize effectful programs from library specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SolverArgs {
    /// SMT solver command; defaults to $COBALT_SOLVER, then z3 on PATH.
    #[arg(long)]
    solver: Option<String>,
    /// Per-query solver budget in milliseconds.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    smt_timeout: u64,
    /// Write every solver script into this directory.
    #[arg(long)]
    emit_smt: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { command: self.solver.clone(), timeout_ms: self.smt_timeout, emit_dir: self.emit_smt.clone() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a program for the query of FILE.
    Synth {
        file: PathBuf,
        #[arg(long, default_value_t = Mode::Cobalt)]
        mode: Mode,
        /// Maximum number of calls along any path.
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Budget for the whole run in seconds.
        #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
        timeout: u64,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Print hypotheses and prunes to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Check a program against the query of FILE.
    Verify {
        file: PathBuf,
        /// File holding the program, or `-` for stdin.
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run every benchmark of DIR in all modes.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[command(flatten)]
        solver: SolverArgs,
        /// Budget per query and mode in seconds.
        #[arg(long, default_value_t = 600, value_parser = clap::value_parser!(u64).range(1..))]
        timeout: u64,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write(path: &PathBuf, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Io(path.clone(), e))
}

fn read_program(path: &PathBuf) -> Result<String, RunError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| RunError::Io(path.clone(), e))?;
        Ok(s)
    } else {
        run::read(path)
    }
}

fn main_inner(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Synth { file, mode, depth, solver, timeout, stats, trace } => {
            let cfg = RunConfig {
                mode,
                depth: depth as usize,
                solver: solver.config(),
                timeout: Duration::from_secs(timeout),
                trace,
            };
            let r = run::run_file(&file, &cfg)?;
            if let Some(path) = stats {
                write(&path, &serde_json::to_string_pretty(&r.stats).expect("plain data serializes"))?;
            }
            match (&r.stats.outcome, &r.stats.program) {
                (Outcome::Solved, Some(p)) => {
                    println!("{}", p);
                    Ok(0)
                }
                (Outcome::Timeout, _) => {
                    eprintln!("timeout after {} ms", r.stats.wall_ms);
                    Ok(4)
                }
                _ => {
                    eprintln!("no program within depth {}", depth);
                    Ok(1)
                }
            }
        }
        Command::Verify { file, program, solver } => {
            let problem = run::load_problem(&run::read(&file)?)?;
            let failed = run::verify_program(&problem, &read_program(&program)?, solver.config())?;
            if failed.is_empty() {
                println!("ok");
                Ok(0)
            } else {
                for f in failed {
                    println!("failed: {}", f);
                }
                Ok(1)
            }
        }
        Command::Bench { dir, jobs, depth, solver, timeout, json } => {
            let cfg = RunConfig {
                depth: depth as usize,
                solver: solver.config(),
                timeout: Duration::from_secs(timeout),
                ..RunConfig::default()
            };
            let rows = run::bench(&dir, &cfg, jobs)?;
            print!("{}", run::report_table(&rows));
            if let Some(path) = json {
                write(&path, &serde_json::to_string_pretty(&rows).expect("plain data serializes"))?;
            }
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
