use num_traits::{ToPrimitive, Zero};

use super::{problem_bound, ConcreteStep, ConcreteTrace, SymbolicStepKind, SymbolicTrace, TraceError};
use crate::circle::{abstract_config, canonicalize, next, next_case, CanonicalKey, CircleConfiguration, NextCase};
use crate::rational::{self, Rational};
use crate::semantics::{applicable_instances, matches_spec, tick, Configuration, Instance, Problem};

/// Case and length of the tick matching one time step of the abstraction.
/// Leaving a class stops halfway to the next fractional part; joining and
/// wrapping land exactly on it.
fn next_tick(s: &Configuration, dmax: u64) -> (NextCase, Rational) {
    let case = next_case(&abstract_config(s, dmax));
    let f_time = rational::fractional_part(s.now());
    let ti = s.time_index();
    let higher = s
        .facts()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ti)
        .map(|(_, f)| rational::fractional_part(&f.time))
        .filter(|f| f > &f_time)
        .min();
    let one = rational::int(1);
    let eps = match case {
        NextCase::Leave => (higher.unwrap_or(one) - &f_time) / rational::int(2),
        NextCase::Join => higher.expect("a later class exists") - &f_time,
        NextCase::Wrap => one - &f_time,
    };
    (case, eps)
}

fn instance_with_key(instances: Vec<Instance>, key: Option<&CanonicalKey>, dmax: u64) -> Option<Instance> {
    match key {
        None => instances.into_iter().next(),
        Some(k) => instances.into_iter().find(|i| &canonicalize(&abstract_config(&i.result, dmax)) == k),
    }
}

/// Replays a symbolic trace in dense time.
///
/// Starts from the problem's initial configuration when it abstracts to the
/// trace's start, else from the canonical representative. Consecutive time
/// steps are merged into one tick.
pub fn concretize_trace(t: &SymbolicTrace, p: &Problem) -> Result<ConcreteTrace, TraceError> {
    let dmax = t.start.dmax();
    let start = if abstract_config(&p.initial, dmax) == t.start {
        p.initial.clone()
    } else {
        crate::circle::concretize(&t.start)
    };
    let mut s = start.clone();
    let mut steps = Vec::new();
    let mut pending = Rational::zero();
    for (i, step) in t.steps.iter().enumerate() {
        let key = canonicalize(&step.result);
        match &step.kind {
            SymbolicStepKind::Next => {
                let (_, eps) = next_tick(&s, dmax);
                s = tick(&s, &eps)?;
                pending += eps;
            }
            SymbolicStepKind::Rule { rule, .. } => {
                if !pending.is_zero() {
                    steps.push(ConcreteStep::Tick { epsilon: std::mem::take(&mut pending) });
                }
                let r = p.rules.iter().find(|r| &r.name == rule).ok_or_else(|| TraceError::ReplayMismatch {
                    step: i,
                    detail: format!("unknown rule `{rule}`"),
                })?;
                let inst = instance_with_key(applicable_instances(r, &s)?, Some(&key), dmax).ok_or_else(|| {
                    TraceError::ReplayMismatch { step: i, detail: format!("no instance of `{rule}` reaches {key}") }
                })?;
                s = inst.result;
                steps.push(ConcreteStep::Rule { rule: rule.clone(), state: Some(key.clone()) });
            }
        }
        let got = canonicalize(&abstract_config(&s, dmax));
        if got != key {
            return Err(TraceError::ReplayMismatch { step: i, detail: format!("reached {got}, expected {key}") });
        }
    }
    if !pending.is_zero() {
        steps.push(ConcreteStep::Tick { epsilon: pending });
    }
    Ok(ConcreteTrace { start, steps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// A critical configuration is passed through; `configuration` is a
    /// concrete point on the offending tick, or the state after a rule.
    Critical { configuration: Configuration, class: CircleConfiguration },
    UnknownRule { rule: String },
    NotApplicable { rule: String },
    NegativeTick { epsilon: Rational },
    SizeBoundExceeded { fact: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending step; `None` for the start configuration.
    pub step: Option<usize>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violation: Option<Violation>,
    /// Present when the goal was checked.
    pub goal_reached: Option<bool>,
    pub final_configuration: Configuration,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none() && self.goal_reached != Some(false)
    }
}

fn critical(p: &Problem, s: &Configuration, step: Option<usize>) -> Option<Violation> {
    matches_spec(s, &p.critical).then(|| Violation {
        step,
        kind: ViolationKind::Critical { configuration: s.clone(), class: abstract_config(s, p.dmax) },
    })
}

/// Walks a tick through every class of the abstraction it crosses.
fn expand_tick(
    p: &Problem,
    s: &Configuration,
    epsilon: &Rational,
    step: usize,
) -> Result<Result<Configuration, Violation>, TraceError> {
    let dmax = p.dmax;
    let whole = epsilon.ceil().to_integer().to_u64().unwrap_or(u64::MAX);
    let events = 4 * (s.len() as u64 + 1) * whole.saturating_add(1);
    let budget = problem_bound(p).to_u64().unwrap_or(u64::MAX).max(events);
    let mut cur = s.clone();
    let mut rem = epsilon.clone();
    let mut count = 0u64;
    while rem > Rational::zero() {
        count += 1;
        if count > budget {
            return Err(TraceError::NonTerminatingExpansion { step, budget });
        }
        let before = abstract_config(&cur, dmax);
        let (case, dist) = next_tick(&cur, dmax);
        let reach = if case == NextCase::Leave { &dist * rational::int(2) } else { dist.clone() };
        let full = rem >= reach;
        let delta = match (case, full) {
            (_, false) => rem.clone(),
            (NextCase::Leave, true) => dist,
            (_, true) => reach,
        };
        cur = tick(&cur, &delta)?;
        rem -= delta;
        let expected = if case == NextCase::Leave || full { next(&before) } else { before };
        if abstract_config(&cur, dmax) != expected {
            return Err(TraceError::ReplayMismatch {
                step,
                detail: format!("tick expansion reached {}, expected {expected}", abstract_config(&cur, dmax)),
            });
        }
        if let Some(v) = critical(p, &cur, Some(step)) {
            return Ok(Err(v));
        }
    }
    Ok(Ok(cur))
}

/// Checks a concrete trace: legal steps, no critical configuration even
/// inside a tick, and optionally that it ends in a goal.
pub fn validate_concrete_trace(t: &ConcreteTrace, p: &Problem, check_goal: bool) -> Result<ValidationReport, TraceError> {
    let report = |violation, s: Configuration| {
        let goal_reached = check_goal.then(|| matches_spec(&s, &p.goal));
        ValidationReport { violation, goal_reached, final_configuration: s }
    };
    let mut s = t.start.clone();
    if let Some(v) = critical(p, &s, None) {
        return Ok(report(Some(v), s));
    }
    for (i, step) in t.steps.iter().enumerate() {
        let fail = |kind| Some(Violation { step: Some(i), kind });
        match step {
            ConcreteStep::Tick { epsilon } => {
                if epsilon < &Rational::zero() {
                    return Ok(report(fail(ViolationKind::NegativeTick { epsilon: epsilon.clone() }), s));
                }
                match expand_tick(p, &s, epsilon, i)? {
                    Ok(after) => s = after,
                    Err(v) => return Ok(report(Some(v), s)),
                }
            }
            ConcreteStep::Rule { rule, state } => {
                let Some(r) = p.rules.iter().find(|r| &r.name == rule) else {
                    return Ok(report(fail(ViolationKind::UnknownRule { rule: rule.clone() }), s));
                };
                let Some(inst) = instance_with_key(applicable_instances(r, &s)?, state.as_ref(), p.dmax) else {
                    return Ok(report(fail(ViolationKind::NotApplicable { rule: rule.clone() }), s));
                };
                if let Some(f) = inst.result.facts().iter().find(|f| f.fact.size() > p.k) {
                    return Ok(report(fail(ViolationKind::SizeBoundExceeded { fact: f.fact.to_string() }), s));
                }
                s = inst.result;
                if let Some(v) = critical(p, &s, Some(i)) {
                    return Ok(report(Some(v), s));
                }
            }
        }
    }
    Ok(report(None, s))
}
