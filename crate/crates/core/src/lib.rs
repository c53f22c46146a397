//! Decision procedure for reachability in balanced timed multiset rewriting
//! with dense time, via circle-configurations.

pub mod circle;
pub mod gen;
pub mod lang;
pub mod rational;
pub mod reach;
pub mod semantics;
pub mod term;

pub use circle::{abstract_config, canonicalize, concretize, next, CanonicalKey, CircleConfiguration, CircleError};
pub use rational::Rational;
pub use reach::{
    concrete_search, concretize_trace, solve, state_bound, validate_concrete_trace, ConcreteStep, ConcreteTrace, Mode,
    SolveError, SolveOptions, SymbolicTrace, TraceError, Verdict,
};
pub use semantics::{
    applicable_instances, compute_dmax, constraint_profile, equivalent, eval_constraint, immediate_successor_reps,
    matches_spec, tick, Configuration, Constraint, CreatedFact, PairSpec, Problem, Relation, Rule, SemanticsError,
    SpecPair, TimestampedFact,
};
pub use term::{Alphabet, Fact, NoncePool, Substitution, Term, TermError, TimedPattern};
