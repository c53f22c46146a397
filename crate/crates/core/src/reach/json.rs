//! Versioned (`v1`) JSON forms of verdicts and traces.

use serde::{Deserialize, Serialize};

use super::{ConcreteStep, ConcreteTrace, SymbolicStepKind, SymbolicTrace, Verdict};
use crate::circle::{abstract_config, canonicalize, CanonicalKey};
use crate::lang::parse_configuration;
use crate::rational;
use crate::semantics::{tick, Configuration};

pub const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TraceEntry {
    Rule {
        rule: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
    },
    Next {
        state: String,
    },
    Tick {
        epsilon: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictJson {
    pub version: String,
    pub reachable: bool,
    pub states_visited: u64,
    pub bound: String,
    pub trace: Vec<TraceEntry>,
}

/// A concrete trace; `start` defaults to the problem's initial configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConcreteTraceJson {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("unsupported version `{0}`")]
    Version(String),
    #[error("entry {0}: `next` steps are not allowed in a concrete trace")]
    NextInConcrete(usize),
    #[error("entry {index}: {detail}")]
    Entry { index: usize, detail: String },
    #[error("start configuration: {0}")]
    Start(String),
}

pub fn symbolic_entries(t: &SymbolicTrace) -> Vec<TraceEntry> {
    t.steps
        .iter()
        .map(|s| {
            let state = canonicalize(&s.result).0;
            match &s.kind {
                SymbolicStepKind::Rule { rule, .. } => TraceEntry::Rule { rule: rule.clone(), state: Some(state) },
                SymbolicStepKind::Next => TraceEntry::Next { state },
            }
        })
        .collect()
}

pub fn verdict_json(v: &Verdict) -> VerdictJson {
    VerdictJson {
        version: VERSION.into(),
        reachable: v.reachable,
        states_visited: v.states_visited,
        bound: v.bound.to_string(),
        trace: v.trace.as_ref().map(symbolic_entries).unwrap_or_default(),
    }
}

/// Encodes a concrete trace, annotating ticks with the key they reach.
/// Rule keys are kept as recorded.
pub fn concrete_json(t: &ConcreteTrace, dmax: u64) -> ConcreteTraceJson {
    let mut s = t.start.clone();
    let trace = t
        .steps
        .iter()
        .map(|step| match step {
            ConcreteStep::Tick { epsilon } => {
                if let Ok(after) = tick(&s, epsilon) {
                    s = after;
                }
                let state = Some(canonicalize(&abstract_config(&s, dmax)).0);
                TraceEntry::Tick { epsilon: rational::display(epsilon), state }
            }
            ConcreteStep::Rule { rule, state } => {
                TraceEntry::Rule { rule: rule.clone(), state: state.as_ref().map(|k| k.0.clone()) }
            }
        })
        .collect();
    ConcreteTraceJson { version: VERSION.into(), start: Some(t.start.to_string()), trace }
}

/// Decodes a concrete trace. Tick states are informational and ignored.
pub fn concrete_from_json(j: &ConcreteTraceJson, initial: &Configuration) -> Result<ConcreteTrace, SchemaError> {
    if j.version != VERSION {
        return Err(SchemaError::Version(j.version.clone()));
    }
    let start = match &j.start {
        Some(text) => parse_configuration(text).map_err(|e| SchemaError::Start(e.to_string()))?,
        None => initial.clone(),
    };
    let steps = j
        .trace
        .iter()
        .enumerate()
        .map(|(index, e)| match e {
            TraceEntry::Next { .. } => Err(SchemaError::NextInConcrete(index)),
            TraceEntry::Tick { epsilon, .. } => rational::parse(epsilon)
                .map(|epsilon| ConcreteStep::Tick { epsilon })
                .map_err(|err| SchemaError::Entry { index, detail: err.to_string() }),
            TraceEntry::Rule { rule, state } => {
                Ok(ConcreteStep::Rule { rule: rule.clone(), state: state.clone().map(CanonicalKey) })
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(ConcreteTrace { start, steps })
}
