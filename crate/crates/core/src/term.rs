//! First-order terms, facts, substitutions, nonce pools and multiset matching.
//!
//! This is the untimed substrate of the rewriting engine. Timestamps only
//! appear here as time-variable bindings produced by [`match_multiset`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;
use crate::semantics::{Constraint, GroundConstraint, TimestampedFact};

/// Reserved predicate carrying the global clock.
pub const TIME: &str = "Time";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("nonce pool exhausted: {live} live nonces, capacity {capacity}")]
    PoolExhausted { live: usize, capacity: usize },
}

/// Returns true if `name` lies in the nonce namespace (`n` followed by digits).
pub fn is_nonce_name(name: &str) -> bool {
    name.len() > 1 && name.starts_with('n') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Returns true if `name` is written as a variable (uppercase-leading).
pub fn is_variable_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Nonce(String),
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn nonce(name: impl Into<String>) -> Self {
        Term::Nonce(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::App(name.into(), args)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Nonce(_) | Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Nonce(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.visit(f);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(n) | Term::Nonce(n) | Term::Var(n) => f.write_str(n),
            Term::App(n, args) => {
                write!(f, "{n}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

/// A predicate applied to terms. Ground iff no variable occurs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Fact { predicate: predicate.into(), args }
    }

    pub fn atom(predicate: impl Into<String>) -> Self {
        Fact::new(predicate, Vec::new())
    }

    pub fn time() -> Self {
        Fact::atom(TIME)
    }

    pub fn is_time(&self) -> bool {
        self.predicate == TIME && self.args.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Number of symbol occurrences: the predicate plus every function,
    /// constant, nonce and variable inside the arguments.
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(Term::size).sum::<usize>()
    }

    pub fn nonces(&self) -> impl Iterator<Item = &str> {
        self.terms().filter_map(|t| match t {
            Term::Nonce(n) => Some(n.as_str()),
            _ => None,
        })
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.terms().filter_map(|t| match t {
            Term::Var(n) => Some(n.as_str()),
            _ => None,
        })
    }

    /// All subterms, pre-order.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let mut out = Vec::new();
        for a in &self.args {
            a.visit(&mut |t| out.push(t));
        }
        out.into_iter()
    }
}

/// Symbol count of `f`.
pub fn fact_size(f: &Fact) -> usize {
    f.size()
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_list(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Predicate and function symbols with their arities.
///
/// Nonces are not part of the alphabet; `J` and `E` are always recomputed
/// from the two maps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    predicates: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlphabetError {
    #[error("`{name}` used with arity {found}, previously {expected}")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("`{0}` used both as a predicate and as a function or constant")]
    NameClash(String),
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of predicate symbols.
    pub fn j(&self) -> usize {
        self.predicates.len()
    }

    /// Number of constant and function symbols.
    pub fn e(&self) -> usize {
        self.functions.len()
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.predicates.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn declare_predicate(&mut self, name: &str, arity: usize) -> Result<(), AlphabetError> {
        if self.functions.contains_key(name) {
            return Err(AlphabetError::NameClash(name.to_string()));
        }
        declare(&mut self.predicates, name, arity)
    }

    pub fn declare_function(&mut self, name: &str, arity: usize) -> Result<(), AlphabetError> {
        if self.predicates.contains_key(name) {
            return Err(AlphabetError::NameClash(name.to_string()));
        }
        declare(&mut self.functions, name, arity)
    }

    /// Declares every symbol of `fact`, checking arities against earlier uses.
    pub fn declare_fact(&mut self, fact: &Fact) -> Result<(), AlphabetError> {
        self.declare_predicate(&fact.predicate, fact.args.len())?;
        for t in fact.terms() {
            match t {
                Term::Const(n) => self.declare_function(n, 0)?,
                Term::App(n, args) => self.declare_function(n, args.len())?,
                Term::Nonce(_) | Term::Var(_) => {}
            }
        }
        Ok(())
    }
}

fn declare(map: &mut BTreeMap<String, usize>, name: &str, arity: usize) -> Result<(), AlphabetError> {
    match map.get(name) {
        Some(&expected) if expected != arity => Err(AlphabetError::ArityMismatch {
            name: name.to_string(),
            expected,
            found: arity,
        }),
        Some(_) => Ok(()),
        None => {
            map.insert(name.to_string(), arity);
            Ok(())
        }
    }
}

/// Term bindings, time bindings and an injective nonce renaming.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    pub terms: BTreeMap<String, Term>,
    pub times: BTreeMap<String, Rational>,
    nonces: BTreeMap<String, String>,
    nonce_targets: BTreeSet<String>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_term(mut self, var: &str, t: Term) -> Self {
        self.terms.insert(var.to_string(), t);
        self
    }

    pub fn with_time(mut self, var: &str, t: Rational) -> Self {
        self.times.insert(var.to_string(), t);
        self
    }

    /// Adds `from ↦ to` to the nonce renaming. Fails (returns `None`) if that
    /// would break injectivity or contradict an existing entry.
    pub fn with_renaming(mut self, from: &str, to: &str) -> Option<Self> {
        self.rename(from, to).then_some(self)
    }

    pub fn nonce_renaming(&self) -> &BTreeMap<String, String> {
        &self.nonces
    }

    fn rename(&mut self, from: &str, to: &str) -> bool {
        match self.nonces.get(from) {
            Some(existing) => existing == to,
            None => {
                if self.nonce_targets.contains(to) {
                    return false;
                }
                self.nonces.insert(from.to_string(), to.to_string());
                self.nonce_targets.insert(to.to_string());
                true
            }
        }
    }

    /// Homomorphic replacement. Unbound variables are left in place.
    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.terms.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Nonce(n) => Term::Nonce(self.nonces.get(n).cloned().unwrap_or_else(|| n.clone())),
            Term::Const(_) => t.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply_term(a)).collect()),
        }
    }

    pub fn apply_fact(&self, f: &Fact) -> Fact {
        Fact::new(f.predicate.clone(), f.args.iter().map(|a| self.apply_term(a)).collect())
    }

    /// Like [`Substitution::apply_fact`] but every variable must be bound.
    pub fn ground_fact(&self, f: &Fact) -> Result<Fact, TermError> {
        if let Some(v) = f.variables().find(|v| !self.terms.contains_key(*v)) {
            return Err(TermError::UnboundVariable(v.to_string()));
        }
        Ok(self.apply_fact(f))
    }

    pub fn time(&self, var: &str) -> Result<&Rational, TermError> {
        self.times.get(var).ok_or_else(|| TermError::UnboundVariable(var.to_string()))
    }

    pub fn ground_constraint(&self, c: &Constraint) -> Result<GroundConstraint, TermError> {
        let lhs = self.time(&c.left)?.clone();
        let rhs = self.time(&c.right)? + Rational::from_integer(c.offset.into());
        Ok(GroundConstraint { lhs, relation: c.relation, rhs })
    }

    /// `self` followed by `other`: applying the result equals applying `self`
    /// and then `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.terms {
            out.terms.insert(v.clone(), other.apply_term(t));
        }
        for (v, t) in &other.terms {
            out.terms.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out.times = self.times.clone();
        for (v, t) in &other.times {
            out.times.entry(v.clone()).or_insert_with(|| t.clone());
        }
        for (from, to) in &self.nonces {
            let to = other.nonces.get(to).unwrap_or(to);
            out.nonces.insert(from.clone(), to.clone());
        }
        for (from, to) in &other.nonces {
            if !self.nonces.contains_key(from) && !self.nonce_targets.contains(from) {
                out.nonces.insert(from.clone(), to.clone());
            }
        }
        out.nonce_targets = out.nonces.values().cloned().collect();
        out
    }

    fn match_term(&mut self, pattern: &Term, target: &Term, renaming: bool) -> bool {
        match (pattern, target) {
            (Term::Var(v), _) => match self.terms.get(v) {
                Some(bound) => bound == target,
                None => {
                    self.terms.insert(v.clone(), target.clone());
                    true
                }
            },
            (Term::Const(a), Term::Const(b)) => a == b,
            (Term::Nonce(a), Term::Nonce(b)) => {
                if renaming {
                    self.rename(a, b)
                } else {
                    a == b
                }
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.match_term(x, y, renaming))
            }
            _ => false,
        }
    }

    fn match_fact(&mut self, pattern: &Fact, target: &Fact, renaming: bool) -> bool {
        pattern.predicate == target.predicate
            && pattern.args.len() == target.args.len()
            && pattern.args.iter().zip(&target.args).all(|(p, t)| self.match_term(p, t, renaming))
    }

    /// Extends the nonce renaming so that `from` becomes `to`. Both facts
    /// must be ground. On failure `self` may be partially extended.
    pub fn rename_ground(&mut self, from: &Fact, to: &Fact) -> bool {
        self.match_fact(from, to, true)
    }

    fn match_time(&mut self, var: &str, t: &Rational) -> bool {
        match self.times.get(var) {
            Some(bound) => bound == t,
            None => {
                self.times.insert(var.to_string(), t.clone());
                true
            }
        }
    }
}

/// A fact pattern paired with the time variable naming its timestamp.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedPattern {
    pub fact: Fact,
    pub time: String,
}

impl TimedPattern {
    pub fn new(fact: Fact, time: impl Into<String>) -> Self {
        TimedPattern { fact, time: time.into() }
    }
}

impl fmt::Display for TimedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.fact, self.time)
    }
}

/// Nonce handling during matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonceMode {
    /// Pattern nonces must equal target nonces (rule pre-conditions).
    Literal,
    /// Pattern nonces map to target nonces through an injective renaming
    /// (critical and goal specifications).
    Renaming,
}

/// Every substitution mapping `patterns` injectively onto distinct
/// occurrences of `target`, in pattern order then occurrence order.
///
/// Each returned substitution carries the chosen occurrence indices in the
/// second component, aligned with `patterns`.
pub fn match_multiset(
    patterns: &[TimedPattern],
    target: &[TimestampedFact],
    mode: NonceMode,
) -> Vec<(Substitution, Vec<usize>)> {
    let mut out = Vec::new();
    let mut used = vec![false; target.len()];
    let mut chosen = Vec::with_capacity(patterns.len());
    match_from(patterns, target, mode == NonceMode::Renaming, Substitution::new(), &mut used, &mut chosen, &mut out);
    out
}

fn match_from(
    patterns: &[TimedPattern],
    target: &[TimestampedFact],
    renaming: bool,
    sub: Substitution,
    used: &mut [bool],
    chosen: &mut Vec<usize>,
    out: &mut Vec<(Substitution, Vec<usize>)>,
) {
    let Some((p, rest)) = patterns.split_first() else {
        out.push((sub, chosen.clone()));
        return;
    };
    for (i, occ) in target.iter().enumerate() {
        if used[i] {
            continue;
        }
        let mut next = sub.clone();
        if !next.match_fact(&p.fact, &occ.fact, renaming) || !next.match_time(&p.time, &occ.time) {
            continue;
        }
        used[i] = true;
        chosen.push(i);
        match_from(rest, target, renaming, next, used, chosen, out);
        chosen.pop();
        used[i] = false;
    }
}

/// Source of nonce names `n1, n2, …`.
///
/// In bounded mode names come from a fixed pool of `capacity` names and the
/// smallest name not currently live is returned. In unbounded mode a
/// counter keeps minting, skipping live names.
#[derive(Debug, Clone)]
pub struct NoncePool {
    capacity: Option<usize>,
    counter: usize,
}

impl NoncePool {
    /// Pool of `2·m·k` names.
    pub fn bounded(m: usize, k: usize) -> Self {
        Self::with_capacity(2 * m * k)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        NoncePool { capacity: Some(capacity), counter: 0 }
    }

    pub fn unbounded() -> Self {
        NoncePool { capacity: None, counter: 0 }
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn fresh(&mut self, live: &BTreeSet<String>) -> Result<String, TermError> {
        match self.capacity {
            Some(capacity) => (1..=capacity)
                .map(|i| format!("n{i}"))
                .find(|n| !live.contains(n))
                .ok_or(TermError::PoolExhausted { live: live.len(), capacity }),
            None => loop {
                self.counter += 1;
                let name = format!("n{}", self.counter);
                if !live.contains(&name) {
                    return Ok(name);
                }
            },
        }
    }
}
