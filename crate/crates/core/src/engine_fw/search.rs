use super::{fw_candidates, synth_pure, Candidate, Ctx, SynthError};
use crate::cdcl::{LearnMode, Learner, NodeView};
use crate::corelang::{path_to_expr, sequence, Expr, Path, Step};
use crate::logic::{Prop, Sort, Term};
use crate::problem::Goal;
use crate::verify::{sort_fits, typecheck_from, SymState};

/// What the forward search must produce: calls filling `holes` in order
/// as the last steps, followed by `tail`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub holes: Vec<(String, Sort)>,
    pub tail: Option<Expr>,
}

impl Shape {
    pub fn trivial() -> Shape {
        Shape { holes: Vec::new(), tail: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRec {
    pub comp: String,
    pub args: Vec<Expr>,
    pub binder: String,
}

struct Node {
    st: SymState,
    steps: Vec<StepRec>,
    filled: usize,
    free: usize,
    /// Remaining children, next one last.
    pending: Option<Vec<(Candidate, bool)>>,
    applicable: Vec<Prop>,
}

fn as_path(steps: &[StepRec]) -> Path {
    Path {
        steps: steps
            .iter()
            .map(|s| Step { component: s.comp.clone(), args: s.args.clone(), binder: s.binder.clone() })
            .collect(),
    }
}

fn program(steps: &[StepRec], tail: Expr) -> Expr {
    sequence(&path_to_expr(&as_path(steps)), &tail)
}

/// FW_SUB at a node: the tail (or a pure result) checks from this state.
fn finish(ctx: &mut Ctx<'_>, goal: &Goal, node: &Node, shape: &Shape) -> Result<Option<Expr>, SynthError> {
    if node.filled < shape.holes.len() {
        return Ok(None);
    }
    let tails: Vec<Expr> = match &shape.tail {
        Some(t) => vec![t.clone()],
        None => synth_pure(ctx.problem, &node.st, &goal.result).into_iter().map(Expr::ret).collect(),
    };
    for t in tails {
        ctx.tick()?;
        match typecheck_from(ctx.problem, goal, node.st.clone(), &t, ctx.solver) {
            Ok(r) if r.ok => return Ok(Some(program(&node.steps, t))),
            Ok(_) | Err(crate::verify::VerifyError::IllTyped { .. }) => {}
            Err(crate::verify::VerifyError::Solver(e)) => return Err(e.into()),
        }
    }
    Ok(None)
}

fn children(ctx: &mut Ctx<'_>, node: &mut Node, shape: &Shape, room: usize) -> Result<(), SynthError> {
    let depth = node.steps.len();
    let nh = shape.holes.len();
    let mut out: Vec<(Candidate, bool)> = Vec::new();
    if depth < room {
        let cands = fw_candidates(ctx, &node.st, &|_| true)?;
        node.applicable = cands.iter().map(|c| c.pre.clone()).collect();
        if node.filled < nh {
            let want = &shape.holes[node.filled].1;
            for c in &cands {
                if sort_fits(&c.result_sort, want) {
                    out.push((c.clone(), true));
                }
            }
        }
        if node.filled == 0 && node.free + nh < room {
            for c in cands {
                out.push((c, false));
            }
        }
    }
    out.reverse();
    node.pending = Some(out);
    Ok(())
}

fn view<'n>(node: &'n Node, depth0: usize) -> NodeView<'n> {
    NodeView {
        st: &node.st,
        depth: depth0 + node.steps.len(),
        filled: node.filled,
        last: node.steps.last().map(|s| s.comp.as_str()),
    }
}

/// One straight-line search (no guard splits) from `st`, with at most
/// `room` further calls.
#[allow(clippy::too_many_arguments)]
fn straight(
    ctx: &mut Ctx<'_>,
    goal: &Goal,
    st: &SymState,
    shape: &Shape,
    room: usize,
    depth0: usize,
    mode: Option<LearnMode>,
    stuck: &mut Vec<Expr>,
) -> Result<Option<Expr>, SynthError> {
    let mut learner = mode.map(|m| Learner::new(m, ctx.problem, &goal.result));
    let root = Node { st: st.clone(), steps: Vec::new(), filled: 0, free: 0, pending: None, applicable: Vec::new() };
    ctx.stats.nodes_expanded += 1;
    if let Some(e) = finish(ctx, goal, &root, shape)? {
        return Ok(Some(e));
    }
    let mut stack = vec![root];
    while let Some(top) = stack.last_mut() {
        ctx.tick()?;
        if top.pending.is_none() {
            children(ctx, top, shape, room)?;
        }
        let next = top.pending.as_mut().expect("computed").pop();
        match next {
            Some((cand, hole)) => {
                let top = stack.last().expect("non-empty");
                let binder = if hole { shape.holes[top.filled].0.clone() } else { ctx.fresh_binder() };
                let mut st1 = cand.next.clone();
                st1.bind(&binder, cand.result.clone(), cand.result_sort.clone());
                let mut steps = top.steps.clone();
                steps.push(StepRec { comp: cand.comp.clone(), args: cand.args.clone(), binder });
                let child = Node {
                    st: st1,
                    steps,
                    filled: top.filled + hole as usize,
                    free: top.free + (!hole) as usize,
                    pending: None,
                    applicable: Vec::new(),
                };
                if let Some(l) = learner.as_mut() {
                    if !l.admit(ctx, &view(top, depth0), &view(&child, depth0), &cand.comp)? {
                        ctx.stats.nodes_pruned += 1;
                        if ctx.trace {
                            eprintln!("prune {}", program(&child.steps, Expr::Skip).to_string().replace('\n', " "));
                        }
                        continue;
                    }
                }
                ctx.stats.nodes_expanded += 1;
                if let Some(e) = finish(ctx, goal, &child, shape)? {
                    return Ok(Some(e));
                }
                if child.steps.len() < room {
                    stack.push(child);
                }
            }
            None => {
                let node = stack.pop().expect("non-empty");
                if node.steps.is_empty() {
                    return Ok(None);
                }
                ctx.stats.stuck_nodes += 1;
                stuck.push(path_to_expr(&as_path(&node.steps)));
                if let Some(l) = learner.as_mut() {
                    l.learn(ctx, &view(&node, depth0), &node.applicable)?;
                }
            }
        }
    }
    Ok(None)
}

fn guards_in(e: &Expr) -> usize {
    let mut n = 0;
    e.walk(&mut |x| {
        if matches!(x, Expr::If(..)) {
            n += 1;
        }
    });
    n
}

/// Search from `st` with `room` calls left: straight-line first, then a
/// guard split whose branches are solved recursively.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    ctx: &mut Ctx<'_>,
    goal: &Goal,
    st: &SymState,
    shape: &Shape,
    room: usize,
    mode: Option<LearnMode>,
    stuck: &mut Vec<Expr>,
) -> Result<Option<Expr>, SynthError> {
    let guards = ctx.max_guards;
    split_solve(ctx, goal, st, shape, room, 0, guards, mode, stuck)
}

#[allow(clippy::too_many_arguments)]
fn split_solve(
    ctx: &mut Ctx<'_>,
    goal: &Goal,
    st: &SymState,
    shape: &Shape,
    room: usize,
    depth0: usize,
    guards: usize,
    mode: Option<LearnMode>,
    stuck: &mut Vec<Expr>,
) -> Result<Option<Expr>, SynthError> {
    if let Some(e) = straight(ctx, goal, st, shape, room, depth0, mode, stuck)? {
        return Ok(Some(e));
    }
    if guards == 0 || room < 2 {
        return Ok(None);
    }
    let problem = ctx.problem;
    let guard_cands = fw_candidates(ctx, st, &|c| problem.guard(&c.name).is_some())?;
    for cand in guard_cands {
        let binder = ctx.fresh_binder();
        let mut base = cand.next.clone();
        base.bind(&binder, cand.result.clone(), Sort::Bool);
        let mut st_t = base.clone();
        st_t.assume(Prop::eq(cand.result.clone(), Term::Bool(true)));
        let mut st_f = base;
        st_f.assume(Prop::eq(cand.result.clone(), Term::Bool(false)));
        // A split with an unreachable side is a plain call; straight search covers it.
        if ctx.holds(&st_t, &Prop::False)? || ctx.holds(&st_f, &Prop::False)? {
            continue;
        }
        ctx.stats.nodes_expanded += 1;
        let t = match split_solve(ctx, goal, &st_t, shape, room - 1, depth0 + 1, guards - 1, mode, stuck)? {
            Some(t) => t,
            None => continue,
        };
        let left = guards - 1 - guards_in(&t).min(guards - 1);
        let f = match split_solve(ctx, goal, &st_f, shape, room - 1, depth0 + 1, left, mode, stuck)? {
            Some(f) => f,
            None => continue,
        };
        return Ok(Some(Expr::seq(
            &binder,
            Expr::Call(cand.comp.clone(), cand.args.clone()),
            Expr::ite(Expr::var(&binder), t, f),
        )));
    }
    Ok(None)
}
