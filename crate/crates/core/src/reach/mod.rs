//! Non-critical reachability over circle-configurations, witness traces and
//! their validation against the dense-time semantics.

mod concrete;
pub mod json;
mod solver;
mod witness;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::circle::{CanonicalKey, CircleConfiguration, CircleError};
use crate::rational::Rational;
use crate::semantics::{Configuration, SemanticsError};

pub use concrete::{concrete_search, ConcreteOptions, ConcreteVerdict};
pub use solver::{solve, successors, Mode, SolveOptions, Successor};
pub use witness::{concretize_trace, validate_concrete_trace, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("rule `{0}` is not balanced; the symbolic search requires balanced rules")]
    NotBalanced(String),
    #[error("specification offset {offset} exceeds dmax {dmax}")]
    OffsetExceedsDmax { offset: u64, dmax: u64 },
    #[error("depth-bounded search gave up after {budget} expansions")]
    BoundOverflow { budget: u64 },
    #[error("search stopped after visiting {limit} states")]
    StateBudgetExceeded { limit: u64 },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("replay diverged from the symbolic trace at step {step}: {detail}")]
    ReplayMismatch { step: usize, detail: String },
    #[error("tick expansion at step {step} exceeded {budget} steps")]
    NonTerminatingExpansion { step: usize, budget: u64 },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

/// `J^m · (E + 2mk)^(mk) · m^m · (dmax + 2)^(m − 1)`, with `m = 0` giving 1.
pub fn state_bound(j: u64, e: u64, m: u64, k: u64, dmax: u64) -> BigUint {
    if m == 0 {
        return BigUint::one();
    }
    let big = BigUint::from;
    let mk = m * k;
    Pow::pow(big(j), m) * Pow::pow(big(e + 2 * mk), mk) * Pow::pow(big(m), m) * Pow::pow(big(dmax + 2), m - 1)
}

/// The bound for a problem's own parameters.
pub fn problem_bound(p: &crate::semantics::Problem) -> BigUint {
    state_bound(p.alphabet.j() as u64, p.alphabet.e() as u64, p.m() as u64, p.k as u64, p.dmax)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolicStepKind {
    Rule { rule: String, substitution: BTreeMap<String, String> },
    Next,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicStep {
    pub kind: SymbolicStepKind,
    pub result: CircleConfiguration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicTrace {
    pub start: CircleConfiguration,
    pub steps: Vec<SymbolicStep>,
}

impl SymbolicTrace {
    pub fn last(&self) -> &CircleConfiguration {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConcreteStep {
    Tick { epsilon: Rational },
    /// `state`, when present, selects the instance whose result has this key.
    Rule { rule: String, state: Option<CanonicalKey> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteTrace {
    pub start: Configuration,
    pub steps: Vec<ConcreteStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub reachable: bool,
    pub trace: Option<SymbolicTrace>,
    /// Distinct states in visited-set mode; node expansions in depth mode.
    pub states_visited: u64,
    pub bound: BigUint,
}
