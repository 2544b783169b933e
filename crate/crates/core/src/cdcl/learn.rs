use crate::engine_fw::{Ctx, SynthError};
use crate::logic::{and_all, canonical_state, free_vars, or_all, substitute, Prop, Sort, Subst, Term};
use crate::problem::Problem;
use crate::smt::{Solver, Validity};
use crate::verify::{sort_fits, SymState};
use std::collections::{BTreeMap, BTreeSet};

/// Learned pair for one component: conjunction of the stuck states that
/// ended in it and disjunction of the calls the bound cut off there.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatingProp {
    pub stuck: Prop,
    pub truncated: Prop,
}

impl Default for DiscriminatingProp {
    fn default() -> Self {
        DiscriminatingProp { stuck: Prop::True, truncated: Prop::False }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscriminatingMap {
    entries: BTreeMap<String, DiscriminatingProp>,
}

impl DiscriminatingMap {
    pub fn new(problem: &Problem) -> DiscriminatingMap {
        let entries = problem.library.iter().map(|c| (c.name.clone(), DiscriminatingProp::default())).collect();
        DiscriminatingMap { entries }
    }

    pub fn get(&self, comp: &str) -> DiscriminatingProp {
        self.entries.get(comp).cloned().unwrap_or_default()
    }

    /// `D[c] := (S ∧ φs, T ∨ φt)`.
    pub fn update(&mut self, comp: &str, phi_s: Prop, phi_t: Prop) {
        let d = self.entries.entry(comp.to_string()).or_default();
        d.stuck = and_all([d.stuck.clone(), phi_s]);
        d.truncated = or_all([d.truncated.clone(), phi_t]);
    }
}

/// How the learner takes part in the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnMode {
    /// Prune with stuck entries at the same depth or shallower.
    Prune,
    /// Prune with any stuck entry, whatever its depth. This loses
    /// solutions that need the extra room of a shallower node.
    PruneAnyDepth,
    /// Learn but admit every choice.
    ForcePass,
}

/// What the learner sees of a search node.
pub struct NodeView<'n> {
    pub st: &'n SymState,
    /// Calls from the start of the goal.
    pub depth: usize,
    pub filled: usize,
    pub last: Option<&'n str>,
}

/// One solver question of a prune decision, kept verbatim for replay.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedCheck {
    pub consts: BTreeMap<String, Sort>,
    pub facts: Vec<Prop>,
    pub goal: Prop,
    pub verdict: Validity,
}

impl LoggedCheck {
    fn run(solver: &mut Solver, problem: &Problem, consts: BTreeMap<String, Sort>, facts: Vec<Prop>, goal: Prop) -> Result<LoggedCheck, SynthError> {
        let verdict = if goal.is_true() { Validity::Valid } else { solver.check(&problem.vocab, &consts, &facts, &goal)? };
        Ok(LoggedCheck { consts, facts, goal, verdict })
    }
}

/// A skipped choice: the component, the stuck entry that justified it and
/// the three checks behind the decision.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneRecord {
    pub comp: String,
    pub stuck_depth: usize,
    pub node_depth: usize,
    /// `S_A ⇒ S_B`; valid means the first disjunct is false.
    pub subsumed: LoggedCheck,
    /// `S_B ⇒ T_A`.
    pub reaches_truncated: LoggedCheck,
    /// `S_parent ⇒ T_A`.
    pub parent_reaches: LoggedCheck,
}

impl PruneRecord {
    pub fn first_disjunct_false(&self) -> bool {
        self.subsumed.verdict == Validity::Valid
    }

    pub fn second_disjunct_false(&self) -> bool {
        !(self.reaches_truncated.verdict == Validity::Valid
            && matches!(self.parent_reaches.verdict, Validity::Invalid(_)))
    }

    /// Re-ask every logged question; true when all verdicts repeat.
    pub fn replay(&self, problem: &Problem, solver: &mut Solver) -> Result<bool, SynthError> {
        for c in [&self.subsumed, &self.reaches_truncated, &self.parent_reaches] {
            let again = LoggedCheck::run(solver, problem, c.consts.clone(), c.facts.clone(), c.goal.clone())?;
            if !same_verdict(&again.verdict, &c.verdict) {
                return Ok(false);
            }
        }
        Ok(self.first_disjunct_false() && self.second_disjunct_false())
    }
}

fn same_verdict(a: &Validity, b: &Validity) -> bool {
    matches!(
        (a, b),
        (Validity::Valid, Validity::Valid) | (Validity::Invalid(_), Validity::Invalid(_)) | (Validity::Unknown(_), Validity::Unknown(_))
    )
}

#[derive(Debug, Clone)]
struct Stuck {
    st: SymState,
    depth: usize,
    filled: usize,
    /// Preconditions of the calls applicable at the stuck node.
    truncated: Prop,
}

const MAX_ENTRIES: usize = 8;

/// Stuck-node memory for one straight-line search.
pub struct Learner {
    mode: LearnMode,
    pub map: DiscriminatingMap,
    stuck: BTreeMap<String, Vec<Stuck>>,
    sorts: Vec<Sort>,
}

impl Learner {
    pub fn new(mode: LearnMode, problem: &Problem, result: &Sort) -> Learner {
        let mut sorts: Vec<Sort> = Vec::new();
        let mut add = |s: &Sort| {
            if *s != Sort::Unit && !sorts.contains(s) {
                sorts.push(s.clone());
            }
        };
        for c in &problem.library {
            c.params.iter().for_each(|(_, s)| add(s));
        }
        for c in &problem.ctors {
            c.params.iter().for_each(|(_, s)| add(s));
        }
        add(result);
        Learner { mode, map: DiscriminatingMap::new(problem), stuck: BTreeMap::new(), sorts }
    }

    /// Values a continuation from `st` could pass as arguments or return.
    fn values(&self, st: &SymState) -> BTreeSet<Term> {
        let mut seen = BTreeSet::new();
        let mut out = BTreeSet::new();
        for (x, t, s) in st.vars.iter().rev() {
            if seen.insert(x.clone()) && self.sorts.iter().any(|r| sort_fits(s, r)) {
                out.insert(t.clone());
            }
        }
        out
    }

    /// CDCL_LEARN for a node whose choices are exhausted.
    pub fn learn(&mut self, ctx: &mut Ctx<'_>, node: &NodeView<'_>, applicable: &[Prop]) -> Result<(), SynthError> {
        let comp = match node.last {
            Some(c) => c.to_string(),
            None => return Ok(()),
        };
        let truncated = or_all(applicable.iter().cloned());
        let params: BTreeSet<String> =
            node.st.vars.iter().filter(|(x, t, _)| *t == Term::var(x)).map(|(x, _, _)| x.clone()).collect();
        let (phi_s, _) = canonical_state(&node.st.fact(), &node.st.hs, &hidden(node.st, &params));
        self.map.update(&comp, phi_s, truncated.clone());
        ctx.stats.learned += 1;
        let list = self.stuck.entry(comp).or_default();
        list.push(Stuck { st: node.st.clone(), depth: node.depth, filled: node.filled, truncated });
        if list.len() > MAX_ENTRIES {
            list.remove(0);
        }
        Ok(())
    }

    /// CDCL_CHOICE's discriminating check for extending `parent` by `comp`
    /// into `child`; false means the choice is skipped.
    pub fn admit(&mut self, ctx: &mut Ctx<'_>, parent: &NodeView<'_>, child: &NodeView<'_>, comp: &str) -> Result<bool, SynthError> {
        if self.mode == LearnMode::ForcePass {
            return Ok(true);
        }
        let entries = match self.stuck.get(comp) {
            Some(v) => v.clone(),
            None => return Ok(true),
        };
        let child_vals = self.values(child.st);
        for a in entries.iter().rev() {
            // A stuck entry only speaks for nodes with no more room than it had.
            let too_shallow = self.mode == LearnMode::Prune && child.depth < a.depth;
            if too_shallow || a.filled != child.filled || !child_vals.is_subset(&self.values(&a.st)) {
                continue;
            }
            if let Some(rec) = prune_check(ctx, a, parent, child, comp)? {
                ctx.prunes.push(rec);
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Consts of `st` other than shared ones, to be closed existentially.
fn hidden(st: &SymState, shared: &BTreeSet<String>) -> Vec<(String, Sort)> {
    st.consts
        .iter()
        .filter(|(k, _)| !shared.contains(*k) && !st.hs.initial.values().any(|g| g == *k))
        .map(|(k, s)| (k.clone(), s.clone()))
        .collect()
}

fn shared_consts(a: &SymState, b: &SymState) -> BTreeSet<String> {
    a.consts.keys().filter(|k| b.consts.get(*k) == a.consts.get(*k)).cloned().collect()
}

/// Track every location of `other` in `st` too.
fn widened(st: &SymState, other: &SymState) -> SymState {
    let mut s = st.clone();
    for (loc, g) in &other.hs.current {
        let sort = other.hs.ghost_sorts.get(g).cloned().unwrap_or(Sort::Int);
        s.hs.ensure(loc, &sort);
    }
    s
}

struct Canon {
    prop: Prop,
    syms: BTreeMap<String, Sort>,
}

fn canon(st: &SymState, shared: &BTreeSet<String>) -> Canon {
    let (prop, finals) = canonical_state(&st.fact(), &st.hs, &hidden(st, shared));
    let mut syms: BTreeMap<String, Sort> = finals.into_iter().collect();
    for (k, s) in &st.consts {
        if shared.contains(k) {
            syms.insert(k.clone(), s.clone());
        }
    }
    for g in st.hs.initial.values() {
        if let Some(s) = st.hs.ghost_sorts.get(g) {
            syms.insert(g.clone(), s.clone());
        }
    }
    syms.insert(st.hs.heap_initial.clone(), Sort::Heap);
    Canon { prop, syms }
}

/// `T_A` over the canonical final names, private constants closed.
fn truncated_canon(a: &SymState, t: &Prop, shared: &BTreeSet<String>) -> Prop {
    let mut s = Subst::new();
    for (loc, g) in &a.hs.current {
        s.insert(g.clone(), Term::Var(format!("F_{}", loc.replace('\'', "p"))));
    }
    s.insert(a.hs.heap_current.clone(), Term::var("H_F"));
    let body = substitute(t, &s);
    let fv = free_vars(&body);
    let initial: BTreeSet<&String> = a.hs.initial.values().collect();
    let syms = a.symbols();
    let mut out = body;
    for (x, sort) in syms.iter().rev() {
        let private = !shared.contains(x) && !initial.contains(x) && *x != a.hs.heap_initial;
        if fv.contains(x) && private {
            out = Prop::Exists(x.clone(), sort.clone(), Box::new(out));
        }
    }
    out
}

fn merged(a: &BTreeMap<String, Sort>, b: &BTreeMap<String, Sort>) -> BTreeMap<String, Sort> {
    let mut m = a.clone();
    for (k, v) in b {
        m.entry(k.clone()).or_insert_with(|| v.clone());
    }
    m
}

fn prune_check(
    ctx: &mut Ctx<'_>,
    a: &Stuck,
    parent: &NodeView<'_>,
    child: &NodeView<'_>,
    comp: &str,
) -> Result<Option<PruneRecord>, SynthError> {
    let problem = ctx.problem;
    let sa = widened(&widened(&a.st, child.st), parent.st);
    let sb = widened(&widened(child.st, &a.st), parent.st);
    let sp = widened(&widened(parent.st, &a.st), child.st);
    let shared_b = shared_consts(&sb, &sa);
    let ca = canon(&sa, &shared_b);
    let cb = canon(&sb, &shared_b);
    let subsumed = LoggedCheck::run(ctx.solver, problem, merged(&ca.syms, &cb.syms), vec![ca.prop.clone()], cb.prop.clone())?;
    if subsumed.verdict != Validity::Valid {
        return Ok(None);
    }
    let t_b = truncated_canon(&sa, &a.truncated, &shared_b);
    let reaches_truncated = LoggedCheck::run(ctx.solver, problem, merged(&cb.syms, &ca.syms), vec![cb.prop.clone()], t_b)?;
    let shared_p = shared_consts(&sp, &sa);
    let cp = canon(&sp, &shared_p);
    let t_p = truncated_canon(&sa, &a.truncated, &shared_p);
    let parent_reaches = LoggedCheck::run(ctx.solver, problem, merged(&cp.syms, &canon(&sa, &shared_p).syms), vec![cp.prop], t_p)?;
    let rec = PruneRecord {
        comp: comp.to_string(),
        stuck_depth: a.depth,
        node_depth: child.depth,
        subsumed,
        reaches_truncated,
        parent_reaches,
    };
    let unknown = [&rec.reaches_truncated, &rec.parent_reaches].iter().any(|c| matches!(c.verdict, Validity::Unknown(_)));
    if unknown || !rec.second_disjunct_false() {
        return Ok(None);
    }
    Ok(Some(rec))
}
