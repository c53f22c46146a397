use std::collections::HashMap;

use super::{ConcreteStep, ConcreteTrace, SolveError};
use crate::circle::{abstract_config, canonicalize};
use crate::semantics::{equivalent, immediate_successor_reps, Configuration, DiffClass, Problem};
use crate::term::{Fact, Term};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConcreteOptions {
    /// Nodes at this depth are not expanded.
    pub max_depth: Option<usize>,
    pub max_states: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteVerdict {
    pub reachable: bool,
    /// False when the depth limit cut some branch off.
    pub complete: bool,
    pub states_visited: usize,
    pub trace: Option<ConcreteTrace>,
}

/// Equal for equivalent configurations; used to bucket the pairwise test.
fn bucket(s: &Configuration, dmax: u64) -> Vec<(Fact, DiffClass)> {
    fn mask(t: &Term) -> Term {
        match t {
            Term::Nonce(_) => Term::Nonce(String::new()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(mask).collect()),
            other => other.clone(),
        }
    }
    let now = s.now();
    let mut out: Vec<(Fact, DiffClass)> = s
        .facts()
        .iter()
        .map(|f| {
            let masked = Fact::new(f.fact.predicate.clone(), f.fact.args.iter().map(mask).collect());
            (masked, DiffClass::of(&(&f.time - now), dmax))
        })
        .collect();
    out.sort();
    out
}

struct Node {
    config: Configuration,
    parent: Option<(usize, ConcreteStep)>,
    depth: usize,
}

/// Breadth-first search over dense-time configurations. Time only advances
/// to immediate-successor representatives, and states are deduplicated by
/// equivalence. Works for unbalanced rules too, where it may not terminate
/// without a depth limit.
pub fn concrete_search(p: &Problem, options: &ConcreteOptions) -> Result<ConcreteVerdict, SolveError> {
    let dmax = p.dmax;
    let mut nodes = vec![Node { config: p.initial.clone(), parent: None, depth: 0 }];
    let mut buckets: HashMap<Vec<(Fact, DiffClass)>, Vec<usize>> = HashMap::new();
    buckets.entry(bucket(&p.initial, dmax)).or_default().push(0);
    let done = |nodes: &Vec<Node>, reachable: bool, complete: bool, goal: Option<usize>| ConcreteVerdict {
        reachable,
        complete,
        states_visited: nodes.len(),
        trace: goal.map(|g| trace_to(nodes, g)),
    };
    if p.is_critical(&p.initial) {
        return Ok(done(&nodes, false, true, None));
    }
    if p.is_goal(&p.initial) {
        return Ok(done(&nodes, true, true, Some(0)));
    }
    let mut complete = true;
    let mut head = 0;
    while head < nodes.len() {
        let idx = head;
        head += 1;
        let s = nodes[idx].config.clone();
        if p.is_critical(&s) {
            continue;
        }
        if options.max_depth.is_some_and(|d| nodes[idx].depth >= d) {
            complete = false;
            continue;
        }
        let mut succ: Vec<(ConcreteStep, Configuration)> = p
            .rule_successors(&s)?
            .into_iter()
            .map(|(r, inst)| {
                let key = canonicalize(&abstract_config(&inst.result, dmax));
                (ConcreteStep::Rule { rule: p.rules[r].name.clone(), state: Some(key) }, inst.result)
            })
            .collect();
        if let Some(rep) = immediate_successor_reps(&s, dmax).representative {
            let epsilon = rep.now() - s.now();
            succ.push((ConcreteStep::Tick { epsilon }, rep));
        }
        for (step, c) in succ {
            let b = bucket(&c, dmax);
            let seen = buckets.get(&b).is_some_and(|v| v.iter().any(|&i| equivalent(&nodes[i].config, &c, dmax)));
            if seen {
                continue;
            }
            let n = nodes.len();
            let is_goal = !p.is_critical(&c) && p.is_goal(&c);
            nodes.push(Node { config: c, parent: Some((idx, step)), depth: nodes[idx].depth + 1 });
            buckets.entry(b).or_default().push(n);
            if is_goal {
                return Ok(done(&nodes, true, complete, Some(n)));
            }
            if let Some(limit) = options.max_states {
                if nodes.len() > limit {
                    return Err(SolveError::StateBudgetExceeded { limit: limit as u64 });
                }
            }
        }
    }
    Ok(done(&nodes, false, complete, None))
}

fn trace_to(nodes: &[Node], goal: usize) -> ConcreteTrace {
    let mut steps = Vec::new();
    let mut cur = goal;
    while let Some((parent, step)) = &nodes[cur].parent {
        steps.push(step.clone());
        cur = *parent;
    }
    steps.reverse();
    ConcreteTrace { start: nodes[cur].config.clone(), steps }
}
