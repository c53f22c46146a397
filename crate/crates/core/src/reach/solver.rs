use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{problem_bound, SolveError, SymbolicStep, SymbolicStepKind, SymbolicTrace, Verdict};
use crate::circle::{abstract_config, canonicalize, cc_matches_spec, next, symbolic_instances, CanonicalKey, CircleConfiguration};
use crate::semantics::{Problem, SemanticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Breadth-first with a set of visited canonical keys.
    #[default]
    Visited,
    /// Iterative deepening that stores only the current path.
    Depth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: Mode,
    pub workers: usize,
    /// Visited-set mode fails once more states than this are stored.
    pub max_states: Option<u64>,
    /// Depth mode fails after this many node expansions.
    pub expansion_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Visited, workers: 1, max_states: None, expansion_budget: 50_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Successor {
    pub kind: SymbolicStepKind,
    pub result: CircleConfiguration,
    pub key: CanonicalKey,
}

/// Rule instances in rule order, then the single time step.
pub fn successors(p: &Problem, a: &CircleConfiguration) -> Result<Vec<Successor>, SolveError> {
    let mut out = Vec::new();
    for rule in &p.rules {
        for (sub, result) in symbolic_instances(rule, a)? {
            if let Some(o) = result.occurrences().iter().find(|o| o.fact.size() > p.k) {
                return Err(SemanticsError::SizeBoundExceeded {
                    fact: o.fact.to_string(),
                    size: o.fact.size(),
                    bound: p.k,
                }
                .into());
            }
            let mut summary: BTreeMap<String, String> =
                sub.terms.iter().map(|(v, t)| (v.clone(), t.to_string())).collect();
            summary.extend(sub.times.iter().map(|(v, t)| (v.clone(), t.to_string())));
            let key = canonicalize(&result);
            out.push(Successor { kind: SymbolicStepKind::Rule { rule: rule.name.clone(), substitution: summary }, result, key });
        }
    }
    let n = next(a);
    let key = canonicalize(&n);
    out.push(Successor { kind: SymbolicStepKind::Next, result: n, key });
    Ok(out)
}

fn check_problem(p: &Problem) -> Result<(), SolveError> {
    if let Some(r) = p.rules.iter().find(|r| !r.is_balanced()) {
        return Err(SolveError::NotBalanced(r.name.clone()));
    }
    let offset = p.critical.max_offset().max(p.goal.max_offset());
    if offset > p.dmax {
        return Err(SolveError::OffsetExceedsDmax { offset, dmax: p.dmax });
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Status {
    Critical,
    Goal,
    Open,
}

fn status(p: &Problem, a: &CircleConfiguration) -> Result<Status, SolveError> {
    Ok(if cc_matches_spec(a, &p.critical)? {
        Status::Critical
    } else if cc_matches_spec(a, &p.goal)? {
        Status::Goal
    } else {
        Status::Open
    })
}

pub fn solve(p: &Problem, options: &SolveOptions) -> Result<Verdict, SolveError> {
    check_problem(p)?;
    let start = abstract_config(&p.initial, p.dmax);
    let bound = problem_bound(p);
    match status(p, &start)? {
        Status::Critical => return Ok(Verdict { reachable: false, trace: None, states_visited: 1, bound }),
        Status::Goal => {
            let trace = SymbolicTrace { start, steps: Vec::new() };
            return Ok(Verdict { reachable: true, trace: Some(trace), states_visited: 1, bound });
        }
        Status::Open => {}
    }
    let (trace, visited) = match options.mode {
        Mode::Visited => bfs(p, start, options)?,
        Mode::Depth => {
            let cap = bound.to_u64().unwrap_or(u64::MAX);
            iddfs(p, start, cap, options.expansion_budget)?
        }
    };
    Ok(Verdict { reachable: trace.is_some(), trace, states_visited: visited, bound })
}

type Expansion = Vec<(Successor, Status)>;

fn expand(p: &Problem, a: &CircleConfiguration) -> Result<Expansion, SolveError> {
    successors(p, a)?
        .into_iter()
        .map(|s| {
            let st = status(p, &s.result)?;
            Ok((s, st))
        })
        .collect()
}

struct Parent {
    from: Option<CanonicalKey>,
    step: Option<SymbolicStepKind>,
    node: CircleConfiguration,
}

fn bfs(p: &Problem, start: CircleConfiguration, options: &SolveOptions) -> Result<(Option<SymbolicTrace>, u64), SolveError> {
    let pool = (options.workers > 1)
        .then(|| rayon::ThreadPoolBuilder::new().num_threads(options.workers).build().expect("thread pool"));
    let start_key = canonicalize(&start);
    let mut parents: HashMap<CanonicalKey, Parent> = HashMap::new();
    parents.insert(start_key.clone(), Parent { from: None, step: None, node: start.clone() });
    let mut layer = vec![(start_key, start)];
    while !layer.is_empty() {
        let expanded: Vec<Result<Expansion, SolveError>> = match &pool {
            Some(pool) => pool.install(|| layer.par_iter().map(|(_, a)| expand(p, a)).collect()),
            None => layer.iter().map(|(_, a)| expand(p, a)).collect(),
        };
        let mut next_layer = Vec::new();
        for ((from, _), succs) in layer.iter().zip(expanded) {
            for (succ, st) in succs? {
                if parents.contains_key(&succ.key) {
                    continue;
                }
                parents.insert(
                    succ.key.clone(),
                    Parent { from: Some(from.clone()), step: Some(succ.kind.clone()), node: succ.result.clone() },
                );
                if let Some(limit) = options.max_states {
                    if parents.len() as u64 > limit {
                        return Err(SolveError::StateBudgetExceeded { limit });
                    }
                }
                match st {
                    Status::Critical => {}
                    Status::Goal => {
                        let trace = reconstruct(&parents, &succ.key);
                        return Ok((Some(trace), parents.len() as u64));
                    }
                    Status::Open => next_layer.push((succ.key, succ.result)),
                }
            }
        }
        layer = next_layer;
    }
    Ok((None, parents.len() as u64))
}

fn reconstruct(parents: &HashMap<CanonicalKey, Parent>, goal: &CanonicalKey) -> SymbolicTrace {
    let mut steps = Vec::new();
    let mut cur = goal;
    loop {
        let entry = &parents[cur];
        match (&entry.from, &entry.step) {
            (Some(from), Some(kind)) => {
                steps.push(SymbolicStep { kind: kind.clone(), result: entry.node.clone() });
                cur = from;
            }
            _ => {
                steps.reverse();
                return SymbolicTrace { start: entry.node.clone(), steps };
            }
        }
    }
}

struct Deepening<'a> {
    p: &'a Problem,
    path: Vec<CanonicalKey>,
    steps: Vec<SymbolicStep>,
    expansions: u64,
    budget: u64,
    cut_off: bool,
}

impl Deepening<'_> {
    fn search(&mut self, a: &CircleConfiguration, depth: u64, limit: u64) -> Result<bool, SolveError> {
        self.expansions += 1;
        if self.expansions > self.budget {
            return Err(SolveError::BoundOverflow { budget: self.budget });
        }
        if depth == limit {
            self.cut_off = true;
            return Ok(false);
        }
        for (succ, st) in expand(self.p, a)? {
            if self.path.contains(&succ.key) {
                continue;
            }
            match st {
                Status::Critical => continue,
                Status::Goal => {
                    self.steps.push(SymbolicStep { kind: succ.kind, result: succ.result });
                    return Ok(true);
                }
                Status::Open => {}
            }
            self.path.push(succ.key.clone());
            self.steps.push(SymbolicStep { kind: succ.kind, result: succ.result.clone() });
            if self.search(&succ.result, depth + 1, limit)? {
                return Ok(true);
            }
            self.steps.pop();
            self.path.pop();
        }
        Ok(false)
    }
}

fn iddfs(p: &Problem, start: CircleConfiguration, cap: u64, budget: u64) -> Result<(Option<SymbolicTrace>, u64), SolveError> {
    let mut d = Deepening { p, path: vec![canonicalize(&start)], steps: Vec::new(), expansions: 0, budget, cut_off: false };
    let mut limit = 1;
    loop {
        d.cut_off = false;
        if d.search(&start, 0, limit)? {
            let trace = SymbolicTrace { start, steps: std::mem::take(&mut d.steps) };
            return Ok((Some(trace), d.expansions));
        }
        // Every simple path has a length below the number of states, so
        // a branch at depth `cap` can be abandoned.
        if !d.cut_off || limit >= cap {
            return Ok((None, d.expansions));
        }
        limit += 1;
    }
}
