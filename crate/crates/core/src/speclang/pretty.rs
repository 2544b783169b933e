use super::*;
use std::fmt::Write;

pub(super) fn rtype(t: &RefinementType) -> String {
    if t.var == "v" && t.prop == Prop::True {
        format!("{}", t.sort)
    } else {
        format!("{{{} : {} | {}}}", t.var, t.sort, t.prop)
    }
}

fn ghosts(gs: &[(String, Sort)]) -> String {
    if gs.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = gs.iter().map(|(g, s)| format!("({} : {})", g, s)).collect();
    format!("\\ {}. ", parts.join(", "))
}

pub(super) fn signature(c: &ComponentSpec) -> String {
    let mut s = String::new();
    for (x, t) in &c.params {
        let _ = write!(s, "({} : {}) -> ", x, rtype(t));
    }
    let _ = write!(
        s,
        "State {{\\({} : heap). {}{}}}\n  {} : {}\n  {{\\({} : heap), ({} : {}), ({} : heap). {}{}}}",
        c.pre_heap,
        ghosts(&c.pre_ghosts),
        c.pre,
        c.result_var,
        rtype(&c.result),
        c.post_pre_heap,
        c.result_var,
        c.result.sort,
        c.post_heap,
        ghosts(&c.post_ghosts),
        c.post
    );
    s
}

pub(super) fn file(f: &SpecFile) -> String {
    let mut s = String::new();
    for (n, _) in &f.sorts {
        let _ = writeln!(s, "sort {};", n);
    }
    for q in &f.qualifiers {
        let args: Vec<String> = q.args.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(s, "qualifier {} : ({}) -> {};", q.name, args.join(", "), q.result);
    }
    for d in &f.datatypes {
        let ctors: Vec<String> = d
            .ctors
            .iter()
            .map(|c| {
                let mut t = c.name.clone();
                if !c.params.is_empty() {
                    let ps: Vec<String> = c.params.iter().map(|(x, ty)| format!("({} : {})", x, rtype(ty))).collect();
                    let _ = write!(t, " of {}", ps.join(" * "));
                }
                if c.refinement != Prop::True {
                    let _ = write!(t, " {{{}}}", c.refinement);
                }
                t
            })
            .collect();
        let _ = writeln!(s, "type {} = {};", d.name, ctors.join(" | "));
    }
    for g in &f.globals {
        let _ = writeln!(s, "global {} : {};", g.name, g.sort);
    }
    for c in &f.library {
        let _ = writeln!(s, "\n{} : {};", c.name, signature(c));
    }
    if let Some(q) = &f.query {
        let _ = writeln!(s, "\nquery {} : {};", q.name, signature(q));
    }
    s
}
