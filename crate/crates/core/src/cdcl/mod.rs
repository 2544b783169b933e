//! Conflict-driven forward enumeration and the top-level synthesis loop.

mod learn;

pub use learn::{DiscriminatingMap, DiscriminatingProp, LearnMode, Learner, LoggedCheck, NodeView, PruneRecord};

use crate::corelang::Expr;
use crate::engine_bw::{bw_outcomes, term_key, BwConfig, BwOutcome, BW_DEPTH};
use crate::engine_fw::{solve, tidy, Ctx, Shape, SynthError};
use crate::problem::Goal;
use crate::verify::{typecheck, VerifyError};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Search strategy of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Cobalt,
    FwAlone,
    BwAlone,
    FwNoCdcl,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Cobalt, Mode::FwAlone, Mode::BwAlone, Mode::FwNoCdcl];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cobalt => "cobalt",
            Mode::FwAlone => "fw-alone",
            Mode::BwAlone => "bw-alone",
            Mode::FwNoCdcl => "fw-no-cdcl",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Mode, String> {
        Mode::ALL.into_iter().find(|m| m.to_string() == s).ok_or_else(|| format!("unknown mode `{}`", s))
    }
}

/// Forward search for the holes of `shape` followed by its tail, with
/// learning. On failure, the stuck paths met on the way.
pub fn cdcl_search(
    ctx: &mut Ctx<'_>,
    goal: &Goal,
    shape: &Shape,
    k: usize,
    mode: LearnMode,
) -> Result<Result<Expr, Vec<Expr>>, SynthError> {
    let st = ctx.initial_state(goal);
    let mut stuck = Vec::new();
    Ok(match solve(ctx, goal, &st, shape, k, Some(mode), &mut stuck)? {
        Some(e) => Ok(e),
        None => Err(stuck),
    })
}

fn checks(ctx: &mut Ctx<'_>, goal: &Goal, e: &Expr) -> Result<bool, SynthError> {
    match typecheck(ctx.problem, goal, e, ctx.solver) {
        Ok(r) => Ok(r.ok),
        Err(VerifyError::IllTyped { .. }) => Ok(false),
        Err(VerifyError::Solver(err)) => Err(err.into()),
    }
}

/// `e` with its `n`-th discarded call removed, counting in pre-order.
fn drop_discarded(e: &Expr, n: &mut usize) -> Option<Expr> {
    match e {
        Expr::Seq(x, a, b) => {
            if x == "_" && matches!(**a, Expr::Call(..)) {
                if *n == 0 {
                    return Some((**b).clone());
                }
                *n -= 1;
            }
            drop_discarded(b, n).map(|b| Expr::seq(x, (**a).clone(), b))
        }
        Expr::If(c, t, f) => match drop_discarded(t, n) {
            Some(t) => Some(Expr::ite((**c).clone(), t, (**f).clone())),
            None => drop_discarded(f, n).map(|f| Expr::ite((**c).clone(), (**t).clone(), f)),
        },
        _ => None,
    }
}

/// Tidy `e`, check it, and drop discarded calls the proof does not need.
fn verified(ctx: &mut Ctx<'_>, goal: &Goal, e: &Expr) -> Result<Option<Expr>, SynthError> {
    let mut e = tidy(ctx.problem, goal, e);
    if !checks(ctx, goal, &e)? {
        return Ok(None);
    }
    let mut i = 0;
    while let Some(shorter) = drop_discarded(&e, &mut i.clone()) {
        if checks(ctx, goal, &shorter)? {
            e = shorter;
        } else {
            i += 1;
        }
    }
    Ok(Some(e))
}

fn calls_in(e: &Option<Expr>) -> usize {
    e.as_ref().map(|e| e.calls().len()).unwrap_or(0)
}

/// Synthesize a program for `goal` with at most `k` calls per path.
pub fn synthesize(ctx: &mut Ctx<'_>, goal: &Goal, k: usize, mode: Mode) -> Result<Option<Expr>, SynthError> {
    let forward = |ctx: &mut Ctx<'_>, lm: LearnMode| -> Result<Option<Expr>, SynthError> {
        match cdcl_search(ctx, goal, &Shape::trivial(), k, lm)? {
            Ok(e) => verified(ctx, goal, &e),
            Err(_) => Ok(None),
        }
    };
    match mode {
        Mode::FwAlone => return forward(ctx, LearnMode::Prune),
        Mode::FwNoCdcl => return forward(ctx, LearnMode::ForcePass),
        Mode::Cobalt | Mode::BwAlone => {}
    }
    let cfg = BwConfig { depth: BW_DEPTH.min(k), allow_fw: mode == Mode::Cobalt };
    let mut failed: BTreeSet<String> = BTreeSet::new();
    loop {
        let next = bw_outcomes(ctx, goal, &failed, cfg)?.into_iter().next();
        let outcome = match next {
            Some(o) => o,
            None => return Ok(None),
        };
        failed.insert(outcome.key());
        if ctx.trace {
            eprintln!("hypothesis {}", outcome.key().replace('\n', " "));
        }
        match outcome {
            BwOutcome::Complete(e) => {
                if let Some(e) = verified(ctx, goal, &e)? {
                    return Ok(Some(e));
                }
            }
            BwOutcome::Partial { .. } if mode == Mode::BwAlone => {}
            BwOutcome::Partial { shape, .. } => {
                let room = k.saturating_sub(calls_in(&shape.tail));
                match cdcl_search(ctx, goal, &shape, room, LearnMode::Prune)? {
                    Ok(e) => {
                        if let Some(e) = verified(ctx, goal, &e)? {
                            return Ok(Some(e));
                        }
                    }
                    Err(stuck) => failed.extend(stuck.iter().map(term_key)),
                }
            }
        }
    }
}
