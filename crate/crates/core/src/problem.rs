//! Lowering of a parsed spec file into the form the checker and the
//! engines work on: ghost-free call specs with heaps named `h`/`h'`.

use crate::corelang::SortEnv;
use crate::logic::{
    and_all, eliminate_ghosts, free_vars, guard_split, simplify, substitute, CallSpec, Prop, Sort, Subst, Term,
    Vocab, POST_HEAP, PRE_HEAP,
};
use crate::speclang::{ComponentSpec, SpecFile};

/// A synthesis or checking goal: `(params) -> {pre} v : result {post}`,
/// with `pre` over `h` and `post` over `h` (initial) and `h'` (final).
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub pre: Prop,
    pub post: Prop,
    pub result_var: String,
    pub result: Sort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ctor {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    pub datatype: String,
    /// Constraint on the parameters, over the parameter names.
    pub refinement: Prop,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub vocab: Vocab,
    pub library: Vec<CallSpec>,
    pub ctors: Vec<Ctor>,
    pub globals: Vec<(String, Sort)>,
    pub goal: Goal,
}

fn rename_heaps(p: &Prop, pairs: &[(&str, &str)]) -> Prop {
    let mut s = Subst::new();
    for (from, to) in pairs {
        if from != to {
            s.insert(from.to_string(), Term::var(to));
        }
    }
    substitute(p, &s)
}

fn param_facts(params: &[(String, crate::speclang::RefinementType)]) -> Vec<Prop> {
    params
        .iter()
        .map(|(x, t)| {
            let mut s = Subst::new();
            s.insert(t.var.clone(), Term::var(x));
            substitute(&t.prop, &s)
        })
        .collect()
}

struct Lowered {
    params: Vec<(String, Sort)>,
    pre: Prop,
    post: Prop,
    pre_left: Vec<(String, Sort)>,
    post_left: Vec<(String, Sort)>,
}

fn lower(c: &ComponentSpec, vocab: &Vocab) -> Lowered {
    let mut pre_parts = param_facts(&c.params);
    pre_parts.push(rename_heaps(&c.pre, &[(&c.pre_heap, PRE_HEAP)]));
    let pre = and_all(pre_parts);
    let (pre, defs) = eliminate_ghosts(&pre, &c.pre_ghosts, &Subst::new(), vocab);
    let mut s = Subst::new();
    s.insert(c.result.var.clone(), Term::var(&c.result_var));
    let result_fact = substitute(&c.result.prop, &s);
    let post = and_all([
        result_fact,
        rename_heaps(&c.post, &[(&c.post_pre_heap, PRE_HEAP), (&c.post_heap, POST_HEAP)]),
    ]);
    let shared: Subst = defs
        .into_iter()
        .filter(|(g, _)| c.post_ghosts.iter().any(|(n, _)| n == g))
        .collect();
    let (post, _) = eliminate_ghosts(&post, &c.post_ghosts, &shared, vocab);
    let fv_pre = free_vars(&pre);
    let fv_post = free_vars(&post);
    let pre_left: Vec<(String, Sort)> = c.pre_ghosts.iter().filter(|(g, _)| fv_pre.contains(g)).cloned().collect();
    let post_left: Vec<(String, Sort)> = c
        .post_ghosts
        .iter()
        .filter(|(g, _)| fv_post.contains(g) && !pre_left.iter().any(|(n, _)| n == g))
        .cloned()
        .collect();
    Lowered {
        params: c.params.iter().map(|(x, t)| (x.clone(), t.sort.clone())).collect(),
        pre,
        post,
        pre_left,
        post_left,
    }
}

pub fn call_spec(c: &ComponentSpec, vocab: &Vocab) -> CallSpec {
    let l = lower(c, vocab);
    let mut ghosts = l.pre_left;
    ghosts.extend(l.post_left);
    CallSpec {
        name: c.name.clone(),
        params: l.params,
        pre: l.pre,
        post: l.post,
        result_var: c.result_var.clone(),
        result: c.result.sort.clone(),
        ghosts,
    }
}

pub fn goal_of(q: &ComponentSpec, vocab: &Vocab) -> Goal {
    let l = lower(q, vocab);
    let mut post = l.post;
    for (g, s) in l.post_left.into_iter().rev() {
        post = Prop::Exists(g, s, Box::new(post));
    }
    Goal {
        name: q.name.clone(),
        params: l.params,
        pre: l.pre,
        post: simplify(&post),
        result_var: q.result_var.clone(),
        result: q.result.sort.clone(),
    }
}

impl Problem {
    pub fn from_spec(file: &SpecFile) -> Problem {
        let vocab = file.vocab();
        let library = file.library.iter().map(|c| call_spec(c, &vocab)).collect();
        let mut ctors = Vec::new();
        for d in &file.datatypes {
            for c in &d.ctors {
                ctors.push(Ctor {
                    name: c.name.clone(),
                    params: c.params.iter().map(|(x, t)| (x.clone(), t.sort.clone())).collect(),
                    datatype: d.name.clone(),
                    refinement: and_all(param_facts(&c.params).into_iter().chain([c.refinement.clone()])),
                });
            }
        }
        Problem {
            goal: goal_of(file.query(), &vocab),
            vocab,
            library,
            ctors,
            globals: file.globals.iter().map(|g| (g.name.clone(), g.sort.clone())).collect(),
        }
    }

    pub fn component(&self, name: &str) -> Option<&CallSpec> {
        self.library.iter().find(|c| c.name == name)
    }

    pub fn ctor(&self, name: &str) -> Option<&Ctor> {
        self.ctors.iter().find(|c| c.name == name)
    }

    /// Guard components: bool results whose post splits into branch facts.
    pub fn guard(&self, name: &str) -> Option<(Prop, Prop)> {
        let c = self.component(name)?;
        if c.result != Sort::Bool {
            return None;
        }
        guard_split(&c.post, &c.result_var)
    }

    /// Sort environment for the goal's parameters and the globals.
    pub fn sort_env(&self) -> SortEnv {
        let mut env = SortEnv::default();
        env.vars.extend(self.globals.iter().cloned());
        env.vars.extend(self.goal.params.iter().cloned());
        for c in &self.library {
            env.comps.insert(c.name.clone(), c.result.clone());
        }
        for c in &self.ctors {
            env.ctors.insert(c.name.clone(), Sort::Named(c.datatype.clone()));
        }
        env
    }

    pub fn with_goal(&self, goal: Goal) -> Problem {
        Problem { goal, ..self.clone() }
    }
}
