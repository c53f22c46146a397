use std::fmt::Write;

use crate::semantics::{Configuration, Constraint, Problem, Rule, SpecPair};
use crate::term::TimedPattern;

/// Canonical text form; parsing it yields a structurally equal problem.
pub fn serialize(p: &Problem) -> String {
    let mut out = String::new();
    writeln!(out, "dmax {}", p.dmax).unwrap();
    writeln!(out, "init {}", configuration(&p.initial)).unwrap();
    for r in &p.rules {
        writeln!(out, "rule {}", rule(r)).unwrap();
    }
    for pair in &p.critical.pairs {
        writeln!(out, "critical {}", spec_pair(pair)).unwrap();
    }
    for pair in &p.goal.pairs {
        writeln!(out, "goal {}", spec_pair(pair)).unwrap();
    }
    out
}

fn configuration(c: &Configuration) -> String {
    let items: Vec<String> = c.canonical_order().iter().map(|f| format!("{}@{}", f.fact, f.time)).collect();
    format!("{{ {} }}", items.join(", "))
}

fn patterns(ps: &[TimedPattern]) -> String {
    ps.iter().map(TimedPattern::to_string).collect::<Vec<_>>().join(", ")
}

fn guard(cs: &[Constraint]) -> String {
    if cs.is_empty() {
        return String::new();
    }
    format!(" | {}", cs.iter().map(Constraint::to_string).collect::<Vec<_>>().join(", "))
}

fn rule(r: &Rule) -> String {
    let mut post: Vec<String> = Vec::new();
    let time = r.pre.iter().find(|p| p.fact.is_time());
    if let Some(t) = time {
        post.push(t.to_string());
    }
    post.extend(r.persistent().filter(|(_, p)| !p.fact.is_time()).map(|(_, p)| p.to_string()));
    let tv = r.time_var().unwrap_or("T");
    post.extend(r.created.iter().map(|c| format!("{}@({tv} + {})", c.fact, c.delay)));
    let exists = if r.existentials.is_empty() {
        String::new()
    } else {
        format!("exists {}. ", r.existentials.join(" "))
    };
    format!("{}: {}{} -o {exists}{}", r.name, patterns(&r.pre), guard(&r.guard), post.join(", "))
}

fn spec_pair(p: &SpecPair) -> String {
    format!("{{ {}{} }}", patterns(&p.patterns), guard(&p.constraints))
}
