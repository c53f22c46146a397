//! Exact dense-time semantics: configurations, Tick, instantaneous rules,
//! constraint evaluation, equivalence and immediate successors.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::rational::{self, Rational};
use crate::term::{
    match_multiset, Alphabet, AlphabetError, Fact, NonceMode, NoncePool, Substitution, TermError,
    TimedPattern,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("configuration has no Time fact")]
    MissingTime,
    #[error("configuration has {0} Time facts")]
    MultipleTime(usize),
    #[error("negative timestamp on {0}")]
    NegativeTimestamp(String),
    #[error("non-ground fact {0} in configuration")]
    NonGround(String),
    #[error("negative tick {0}")]
    NegativeEpsilon(String),
    #[error("fact {fact} has size {size}, above the bound {bound}")]
    SizeBoundExceeded { fact: String, size: usize, bound: usize },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Gt,
    /// Disjunction of `Gt` and `Eq`.
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// `left rel right + offset` over time variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub left: String,
    pub relation: Relation,
    pub right: String,
    pub offset: i64,
}

impl Constraint {
    pub fn new(left: impl Into<String>, relation: Relation, right: impl Into<String>, offset: i64) -> Self {
        Constraint { left: left.into(), relation, right: right.into(), offset }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.relation.symbol(), self.right)?;
        match self.offset.cmp(&0) {
            Ordering::Greater => write!(f, " + {}", self.offset),
            Ordering::Less => write!(f, " - {}", -self.offset),
            Ordering::Equal => Ok(()),
        }
    }
}

/// A constraint after time variables have been replaced by values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConstraint {
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
}

impl GroundConstraint {
    pub fn holds(&self) -> bool {
        self.relation.holds(&self.lhs, &self.rhs)
    }
}

impl fmt::Display for GroundConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

/// Evaluates `c` under a time binding, exactly.
pub fn eval_constraint(c: &Constraint, binding: &Substitution) -> Result<bool, TermError> {
    Ok(binding.ground_constraint(c)?.holds())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimestampedFact {
    pub fact: Fact,
    pub time: Rational,
}

impl TimestampedFact {
    pub fn new(fact: Fact, time: Rational) -> Self {
        TimestampedFact { fact, time }
    }
}

impl fmt::Display for TimestampedFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.fact, self.time)
    }
}

/// Position of a fact's timestamp relative to the global time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    Past,
    Present,
    Future,
}

/// A multiset of ground timestamped facts with exactly one `Time` fact.
///
/// Occurrences are kept sorted by fact, then timestamp, so structural
/// equality is multiset equality. Ticks never reorder occurrences.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    facts: Vec<TimestampedFact>,
}

impl Configuration {
    pub fn new(mut facts: Vec<TimestampedFact>) -> Result<Self, SemanticsError> {
        let times = facts.iter().filter(|f| f.fact.is_time()).count();
        match times {
            0 => return Err(SemanticsError::MissingTime),
            1 => {}
            n => return Err(SemanticsError::MultipleTime(n)),
        }
        for f in &facts {
            if f.time.is_negative() {
                return Err(SemanticsError::NegativeTimestamp(f.to_string()));
            }
            if !f.fact.is_ground() {
                return Err(SemanticsError::NonGround(f.fact.to_string()));
            }
        }
        facts.sort();
        Ok(Configuration { facts })
    }

    pub fn facts(&self) -> &[TimestampedFact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn time_index(&self) -> usize {
        self.facts.iter().position(|f| f.fact.is_time()).expect("configuration invariant: one Time fact")
    }

    pub fn now(&self) -> &Rational {
        &self.facts[self.time_index()].time
    }

    pub fn nonces(&self) -> BTreeSet<String> {
        self.facts.iter().flat_map(|f| f.fact.nonces().map(str::to_string)).collect()
    }

    pub fn max_fact_size(&self) -> usize {
        self.facts.iter().map(|f| f.fact.size()).max().unwrap_or(0)
    }

    pub fn tense(&self, index: usize) -> Tense {
        match self.facts[index].time.cmp(self.now()) {
            Ordering::Less => Tense::Past,
            Ordering::Equal => Tense::Present,
            Ordering::Greater => Tense::Future,
        }
    }

    /// Occurrences in the canonical order used for equivalence: by timestamp,
    /// then alphabetically.
    pub fn canonical_order(&self) -> Vec<&TimestampedFact> {
        let mut v: Vec<_> = self.facts.iter().collect();
        v.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.fact.cmp(&b.fact)));
        v
    }

    fn check_size(&self, bound: usize) -> Result<(), SemanticsError> {
        match self.facts.iter().find(|f| f.fact.size() > bound) {
            Some(f) => Err(SemanticsError::SizeBoundExceeded { fact: f.fact.to_string(), size: f.fact.size(), bound }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, tf) in self.canonical_order().into_iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{tf}")?;
        }
        f.write_str("}")
    }
}

/// Advances only the `Time` timestamp by `epsilon`.
pub fn tick(s: &Configuration, epsilon: &Rational) -> Result<Configuration, SemanticsError> {
    if epsilon.is_negative() {
        return Err(SemanticsError::NegativeEpsilon(epsilon.to_string()));
    }
    let mut out = s.clone();
    let i = out.time_index();
    out.facts[i].time += epsilon;
    Ok(out)
}

/// A fact created by a rule at `T + delay`, where `T` is the rule's Time variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CreatedFact {
    pub fact: Fact,
    pub delay: u64,
}

/// An instantaneous rule.
///
/// `pre` includes the `Time@T` pattern; pre-condition facts whose index is
/// not in `consumed` are persistent and reappear unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub pre: Vec<TimedPattern>,
    pub guard: Vec<Constraint>,
    pub existentials: Vec<String>,
    pub created: Vec<CreatedFact>,
    pub consumed: Vec<usize>,
}

impl Rule {
    /// The time variable bound to the global clock.
    pub fn time_var(&self) -> Option<&str> {
        self.pre.iter().find(|p| p.fact.is_time()).map(|p| p.time.as_str())
    }

    pub fn is_balanced(&self) -> bool {
        self.consumed.len() == self.created.len()
    }

    pub fn persistent(&self) -> impl Iterator<Item = (usize, &TimedPattern)> {
        self.pre.iter().enumerate().filter(|(i, _)| !self.consumed.contains(i))
    }
}

/// One way of applying a rule: the extended substitution and the result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub substitution: Substitution,
    pub result: Configuration,
}

/// Every applicable instance of `rule` on `s`, in match order.
pub fn applicable_instances(rule: &Rule, s: &Configuration) -> Result<Vec<Instance>, SemanticsError> {
    let mut out = Vec::new();
    let now = s.now().clone();
    for (sub, chosen) in match_multiset(&rule.pre, s.facts(), NonceMode::Literal) {
        let mut ok = true;
        for c in &rule.guard {
            if !eval_constraint(c, &sub)? {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut sub = sub;
        let mut pool = NoncePool::unbounded();
        let mut live = s.nonces();
        for x in &rule.existentials {
            let n = pool.fresh(&live)?;
            live.insert(n.clone());
            sub.terms.insert(x.clone(), crate::term::Term::Nonce(n));
        }
        let removed: BTreeSet<usize> = rule.consumed.iter().map(|&i| chosen[i]).collect();
        let mut facts: Vec<TimestampedFact> =
            s.facts().iter().enumerate().filter(|(i, _)| !removed.contains(i)).map(|(_, f)| f.clone()).collect();
        for c in &rule.created {
            let fact = sub.ground_fact(&c.fact)?;
            facts.push(TimestampedFact::new(fact, &now + Rational::from_integer(c.delay.into())));
        }
        out.push(Instance { substitution: sub, result: Configuration::new(facts)? });
    }
    Ok(out)
}

/// One ⟨pattern multiset, constraints⟩ pair of a critical or goal specification.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpecPair {
    pub patterns: Vec<TimedPattern>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PairSpec {
    pub pairs: Vec<SpecPair>,
}

impl PairSpec {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn max_offset(&self) -> u64 {
        self.pairs.iter().flat_map(|p| &p.constraints).map(|c| c.offset.unsigned_abs()).max().unwrap_or(0)
    }
}

/// True iff some pair embeds into `s`, nonces renamed, with all constraints satisfied.
pub fn matches_spec(s: &Configuration, spec: &PairSpec) -> bool {
    spec.pairs.iter().any(|pair| {
        match_multiset(&pair.patterns, s.facts(), NonceMode::Renaming).into_iter().any(|(sub, _)| {
            pair.constraints.iter().all(|c| eval_constraint(c, &sub).unwrap_or(false))
        })
    })
}

/// Smallest natural strictly greater than `n + 1` for every listed number.
pub fn compute_dmax<'a>(numbers: impl IntoIterator<Item = &'a Rational>) -> u64 {
    let max = numbers.into_iter().max().cloned().unwrap_or_else(Rational::zero);
    let floor = rational::integer_part(&max).to_u64().expect("number fits u64");
    floor + 2
}

/// A timed MSR together with its reachability question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub alphabet: Alphabet,
    pub rules: Vec<Rule>,
    pub initial: Configuration,
    pub critical: PairSpec,
    pub goal: PairSpec,
    /// Upper bound on fact sizes.
    pub k: usize,
    pub dmax: u64,
}

impl Problem {
    /// Builds a problem with alphabet, `k` and `Dmax` derived from its parts.
    pub fn new(
        rules: Vec<Rule>,
        initial: Configuration,
        critical: PairSpec,
        goal: PairSpec,
    ) -> Result<Self, SemanticsError> {
        let mut p = Problem { alphabet: Alphabet::new(), rules, initial, critical, goal, k: 0, dmax: 0 };
        let mut alphabet = Alphabet::new();
        for f in p.all_facts() {
            alphabet.declare_fact(f)?;
        }
        p.k = p.all_facts().map(Fact::size).max().unwrap_or(1);
        p.alphabet = alphabet;
        p.dmax = p.auto_dmax();
        Ok(p)
    }

    pub fn all_facts(&self) -> impl Iterator<Item = &Fact> {
        let init = self.initial.facts().iter().map(|f| &f.fact);
        let rules = self.rules.iter().flat_map(|r| {
            r.pre.iter().map(|p| &p.fact).chain(r.created.iter().map(|c| &c.fact))
        });
        let specs = self.critical.pairs.iter().chain(&self.goal.pairs).flat_map(|p| p.patterns.iter().map(|q| &q.fact));
        init.chain(rules).chain(specs)
    }

    /// Every number the `Dmax` bound must dominate.
    pub fn numbers(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.initial.facts().iter().map(|f| f.time.clone()).collect();
        for r in &self.rules {
            out.extend(r.guard.iter().map(|c| Rational::from_integer(c.offset.unsigned_abs().into())));
            out.extend(r.created.iter().map(|c| Rational::from_integer(c.delay.into())));
        }
        for p in self.critical.pairs.iter().chain(&self.goal.pairs) {
            out.extend(p.constraints.iter().map(|c| Rational::from_integer(c.offset.unsigned_abs().into())));
        }
        out
    }

    pub fn auto_dmax(&self) -> u64 {
        compute_dmax(&self.numbers())
    }

    pub fn is_balanced(&self) -> bool {
        self.rules.iter().all(Rule::is_balanced)
    }

    /// Number of facts in the initial configuration.
    pub fn m(&self) -> usize {
        self.initial.len()
    }

    /// Every rule instance applicable to `s`, tagged with its rule index.
    /// Fails if a result exceeds the fact-size bound.
    pub fn rule_successors(&self, s: &Configuration) -> Result<Vec<(usize, Instance)>, SemanticsError> {
        let mut out = Vec::new();
        for (i, r) in self.rules.iter().enumerate() {
            for inst in applicable_instances(r, s)? {
                inst.result.check_size(self.k)?;
                out.push((i, inst));
            }
        }
        Ok(out)
    }

    pub fn is_critical(&self, s: &Configuration) -> bool {
        matches_spec(s, &self.critical)
    }

    pub fn is_goal(&self, s: &Configuration) -> bool {
        matches_spec(s, &self.goal)
    }
}

/// Where the difference `tᵢ − tⱼ` of two timestamps lies, as far as
/// constraints with offsets up to `d` can tell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiffClass {
    Below,
    /// Strictly between `n` and `n + 1`.
    Between(i64),
    Exact(i64),
    Above,
}

impl DiffClass {
    pub fn of(diff: &Rational, d: u64) -> Self {
        let bound = Rational::from_integer(d.into());
        if diff > &bound {
            DiffClass::Above
        } else if diff < &-bound {
            DiffClass::Below
        } else if diff.is_integer() {
            DiffClass::Exact(diff.to_integer().to_i64().expect("bounded by d"))
        } else {
            DiffClass::Between(diff.floor().to_integer().to_i64().expect("bounded by d"))
        }
    }

    /// Whether `diff relation offset` holds for every difference in this class.
    pub fn satisfies(self, relation: Relation, offset: i64) -> bool {
        let gt = match self {
            DiffClass::Above => true,
            DiffClass::Below => false,
            DiffClass::Exact(n) => n > offset,
            DiffClass::Between(n) => n >= offset,
        };
        let eq = matches!(self, DiffClass::Exact(n) if n == offset);
        match relation {
            Relation::Gt => gt,
            Relation::Eq => eq,
            Relation::Ge => gt || eq,
        }
    }
}

/// A constraint between two occurrences of one configuration:
/// `t[left] rel t[right] + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccurrenceConstraint {
    pub left: usize,
    pub relation: Relation,
    pub right: usize,
    pub offset: i64,
}

/// The constraints of `C_d` satisfied by a configuration, indexed by
/// occurrence position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintProfile {
    d: u64,
    classes: Vec<Vec<DiffClass>>,
}

impl ConstraintProfile {
    pub fn contains(&self, c: &OccurrenceConstraint) -> bool {
        c.offset.unsigned_abs() <= self.d && self.classes[c.left][c.right].satisfies(c.relation, c.offset)
    }

    pub fn class(&self, left: usize, right: usize) -> DiffClass {
        self.classes[left][right]
    }

    /// All satisfied constraints, enumerated explicitly.
    pub fn satisfied(&self) -> Vec<OccurrenceConstraint> {
        let n = self.classes.len();
        let d = self.d as i64;
        let mut out = Vec::new();
        for left in 0..n {
            for right in 0..n {
                for offset in -d..=d {
                    for relation in [Relation::Gt, Relation::Ge, Relation::Eq] {
                        let c = OccurrenceConstraint { left, relation, right, offset };
                        if self.contains(&c) {
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn constraint_profile(s: &Configuration, d: u64) -> ConstraintProfile {
    let facts = s.facts();
    let classes = facts
        .iter()
        .map(|a| facts.iter().map(|b| DiffClass::of(&(&a.time - &b.time), d)).collect())
        .collect();
    ConstraintProfile { d, classes }
}

/// Def.-7 style equivalence: same untimed facts up to a nonce bijection,
/// aligned in timestamp order, satisfying the same constraints with
/// offsets up to `dmax`.
pub fn equivalent(s1: &Configuration, s2: &Configuration, dmax: u64) -> bool {
    if s1.len() != s2.len() {
        return false;
    }
    let g1 = timestamp_groups(s1);
    let g2 = timestamp_groups(s2);
    if g1.len() != g2.len() || g1.iter().zip(&g2).any(|(a, b)| a.1.len() != b.1.len()) {
        return false;
    }
    for i in 0..g1.len() {
        for j in (i + 1)..g1.len() {
            let c1 = DiffClass::of(&(g1[j].0 - g1[i].0), dmax);
            let c2 = DiffClass::of(&(g2[j].0 - g2[i].0), dmax);
            if c1 != c2 {
                return false;
            }
        }
    }
    let groups: Vec<(Vec<&Fact>, Vec<&Fact>)> = g1.into_iter().zip(g2).map(|(a, b)| (a.1, b.1)).collect();
    align_groups(&groups, 0, Substitution::new())
}

fn timestamp_groups(s: &Configuration) -> Vec<(&Rational, Vec<&Fact>)> {
    let mut out: Vec<(&Rational, Vec<&Fact>)> = Vec::new();
    for tf in s.canonical_order() {
        match out.last_mut() {
            Some((t, fs)) if *t == &tf.time => fs.push(&tf.fact),
            _ => out.push((&tf.time, vec![&tf.fact])),
        }
    }
    out
}

fn align_groups(groups: &[(Vec<&Fact>, Vec<&Fact>)], g: usize, sub: Substitution) -> bool {
    let Some((left, right)) = groups.get(g) else {
        return true;
    };
    let mut used = vec![false; right.len()];
    align_within(groups, g, left, right, 0, &mut used, sub)
}

fn align_within(
    groups: &[(Vec<&Fact>, Vec<&Fact>)],
    g: usize,
    left: &[&Fact],
    right: &[&Fact],
    i: usize,
    used: &mut [bool],
    sub: Substitution,
) -> bool {
    if i == left.len() {
        return align_groups(groups, g + 1, sub);
    }
    for j in 0..right.len() {
        if used[j] {
            continue;
        }
        let mut next = sub.clone();
        if !next.rename_ground(left[i], right[j]) {
            continue;
        }
        used[j] = true;
        if align_within(groups, g, left, right, i + 1, used, next) {
            return true;
        }
        used[j] = false;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessorKind {
    /// The configuration satisfies an equality between Time and another
    /// fact; any small tick leaves it.
    Boundary,
    /// No such equality holds; the next profile change happens exactly at ε*.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImmediateSuccessor {
    pub kind: SuccessorKind,
    /// `None` only for an open configuration whose profile never changes.
    pub representative: Option<Configuration>,
    pub epsilon_star: Option<Rational>,
}

/// Least positive tick at which Time hits `t_F + n` for some other fact `F`
/// and `|n| ≤ d`.
pub fn next_event(s: &Configuration, d: u64) -> Option<Rational> {
    let ti = s.time_index();
    let now = s.now();
    let d = d as i64;
    s.facts()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ti)
        .filter_map(|(_, f)| {
            let base = &f.time - now;
            let n = (-&base).floor().to_integer().to_i64()? + 1;
            let n = n.max(-d);
            (n <= d).then(|| base + rational::int(n))
        })
        .min()
}

/// Least positive tick after which Time's fractional part meets that of
/// another fact or wraps to zero.
fn next_fraction(s: &Configuration) -> Rational {
    let ti = s.time_index();
    let now = rational::fractional_part(s.now());
    let one = rational::int(1);
    s.facts()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != ti)
        .map(|(_, f)| {
            let e = rational::fractional_part(&f.time) - &now;
            if e.is_positive() { e } else { e + &one }
        })
        .chain([&one - &now])
        .min()
        .expect("the wrap event always exists")
}

/// True if Time currently equals `t_F + n` for some other fact and `|n| ≤ d`.
pub fn on_boundary(s: &Configuration, d: u64) -> bool {
    let ti = s.time_index();
    let now = s.now();
    s.facts().iter().enumerate().any(|(i, f)| {
        i != ti && matches!(DiffClass::of(&(now - &f.time), d), DiffClass::Exact(_))
    })
}

pub fn immediate_successor_reps(s: &Configuration, d: u64) -> ImmediateSuccessor {
    let eps = next_event(s, d);
    if on_boundary(s, d) {
        // Without a later event every tick leaves the boundary for good; the
        // smallest natural choice keeps the representative next to `s` on
        // the unit circle.
        let step = eps.as_ref().unwrap_or(&next_fraction(s)) / rational::int(2);
        ImmediateSuccessor {
            kind: SuccessorKind::Boundary,
            representative: Some(tick(s, &step).expect("positive")),
            epsilon_star: eps,
        }
    } else {
        ImmediateSuccessor {
            kind: SuccessorKind::Open,
            representative: eps.as_ref().map(|e| tick(s, e).expect("positive")),
            epsilon_star: eps,
        }
    }
}

/// Whether `s2` is an immediate successor of `s1` with respect to `d`.
pub fn is_immediate_successor(s1: &Configuration, s2: &Configuration, d: u64) -> bool {
    let (t1, t2) = (s1.time_index(), s2.time_index());
    let same_rest = s1.len() == s2.len()
        && s1.facts().iter().enumerate().filter(|(i, _)| *i != t1).map(|(_, f)| f).eq(s2
            .facts()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t2)
            .map(|(_, f)| f));
    let eps = s2.now() - s1.now();
    if !same_rest || !eps.is_positive() {
        return false;
    }
    match (on_boundary(s1, d), next_event(s1, d)) {
        (true, None) => true,
        (true, Some(e)) => eps < e,
        (false, Some(e)) => eps == e,
        (false, None) => false,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{int, parse, ratio};
    use crate::term::Term;

    /// `{Time@2, F@0.4}` style literal with nullary facts.
    pub(crate) fn cfg(items: &[(&str, &str)]) -> Configuration {
        Configuration::new(
            items.iter().map(|(p, t)| TimestampedFact::new(Fact::atom(*p), parse(t).unwrap())).collect(),
        )
        .unwrap()
    }

    fn bind(pairs: &[(&str, &str)]) -> Substitution {
        pairs.iter().fold(Substitution::new(), |s, (v, t)| s.with_time(v, parse(t).unwrap()))
    }

    #[test]
    fn constraint_evaluation() {
        let c = Constraint::new("T", Relation::Gt, "T1", 2);
        assert!(eval_constraint(&c, &bind(&[("T", "4.5"), ("T1", "1")])).unwrap());
        let c = Constraint::new("T", Relation::Eq, "T1", -1);
        assert!(eval_constraint(&c, &bind(&[("T", "2"), ("T1", "3")])).unwrap());
        let c = Constraint::new("T", Relation::Ge, "T1", 0);
        assert!(eval_constraint(&c, &bind(&[("T", "1"), ("T1", "1")])).unwrap());
        assert!(matches!(eval_constraint(&c, &bind(&[("T", "1")])), Err(TermError::UnboundVariable(_))));
    }

    #[test]
    fn configuration_invariants() {
        assert_eq!(Configuration::new(vec![]), Err(SemanticsError::MissingTime));
        let t = TimestampedFact::new(Fact::time(), int(0));
        assert_eq!(Configuration::new(vec![t.clone(), t]), Err(SemanticsError::MultipleTime(2)));
        let neg = TimestampedFact::new(Fact::time(), int(-1));
        assert!(matches!(Configuration::new(vec![neg]), Err(SemanticsError::NegativeTimestamp(_))));
    }

    #[test]
    fn ticks() {
        let s = cfg(&[("Time", "1.5"), ("F", "3.5")]);
        assert_eq!(tick(&s, &int(3)).unwrap(), cfg(&[("Time", "4.5"), ("F", "3.5")]));
        assert_eq!(tick(&s, &int(0)).unwrap(), s);
        assert!(matches!(tick(&s, &int(-1)), Err(SemanticsError::NegativeEpsilon(_))));
        let a = tick(&tick(&s, &ratio(1, 3)).unwrap(), &ratio(1, 6)).unwrap();
        assert_eq!(a, tick(&s, &ratio(1, 2)).unwrap());
    }

    fn age_rule() -> Rule {
        Rule {
            name: "age".into(),
            pre: vec![
                TimedPattern::new(Fact::time(), "T"),
                TimedPattern::new(Fact::new("F", vec![Term::var("X")]), "T1"),
            ],
            guard: vec![Constraint::new("T", Relation::Ge, "T1", 1)],
            existentials: vec![],
            created: vec![CreatedFact { fact: Fact::new("G", vec![Term::var("X")]), delay: 2 }],
            consumed: vec![1],
        }
    }

    fn fa(p: &str, c: &str, t: &str) -> TimestampedFact {
        let arg = if crate::term::is_nonce_name(c) { Term::nonce(c) } else { Term::constant(c) };
        TimestampedFact::new(Fact::new(p, vec![arg]), parse(t).unwrap())
    }

    fn time(t: &str) -> TimestampedFact {
        TimestampedFact::new(Fact::time(), parse(t).unwrap())
    }

    #[test]
    fn rule_application() {
        let s = Configuration::new(vec![time("2"), fa("F", "a", "0.4")]).unwrap();
        let inst = applicable_instances(&age_rule(), &s).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].result, Configuration::new(vec![time("2"), fa("G", "a", "4")]).unwrap());

        let early = Configuration::new(vec![time("1"), fa("F", "a", "0.4")]).unwrap();
        assert!(applicable_instances(&age_rule(), &early).unwrap().is_empty());
    }

    #[test]
    fn rule_with_nonce() {
        let mint = Rule {
            name: "mint".into(),
            pre: vec![TimedPattern::new(Fact::time(), "T"), TimedPattern::new(Fact::atom("R"), "T1")],
            guard: vec![],
            existentials: vec!["N".into()],
            created: vec![CreatedFact { fact: Fact::new("S", vec![Term::var("N")]), delay: 1 }],
            consumed: vec![1],
        };
        let s = cfg(&[("Time", "0"), ("R", "0")]);
        let inst = applicable_instances(&mint, &s).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].result, Configuration::new(vec![time("0"), fa("S", "n1", "1")]).unwrap());
        assert_eq!(inst[0].substitution.terms["N"], Term::nonce("n1"));
    }

    #[test]
    fn dmax_extraction() {
        let nums = [parse("3.5").unwrap(), int(2), int(1)];
        assert_eq!(compute_dmax(&nums), 5);
        assert_eq!(compute_dmax(&[int(0)]), 2);
        assert_eq!(compute_dmax(&[int(3)]), 5);
        assert_eq!(compute_dmax(&[]), 2);
    }

    #[test]
    fn equivalence_examples() {
        let a = cfg(&[("Time", "1"), ("Q", "1.54"), ("S", "2.4")]);
        let b = cfg(&[("Time", "1.12"), ("Q", "1.66"), ("S", "2.52")]);
        assert!(equivalent(&a, &b, 3));
        assert!(equivalent(&cfg(&[("Time", "0")]), &cfg(&[("Time", "5")]), 1));
        let c = cfg(&[("Time", "2"), ("F", "0.4")]);
        let d = cfg(&[("Time", "2.4"), ("F", "0.4")]);
        assert!(!equivalent(&c, &d, 3));
    }

    #[test]
    fn equivalence_renames_nonces() {
        let a = Configuration::new(vec![time("0"), fa("P", "n1", "1"), fa("Q", "n2", "1")]).unwrap();
        let b = Configuration::new(vec![time("0"), fa("P", "n7", "1"), fa("Q", "n3", "1")]).unwrap();
        let c = Configuration::new(vec![time("0"), fa("P", "n7", "1"), fa("Q", "n7", "1")]).unwrap();
        assert!(equivalent(&a, &b, 2));
        assert!(!equivalent(&a, &c, 2));
    }

    #[test]
    fn spec_matching() {
        let crit = PairSpec {
            pairs: vec![SpecPair {
                patterns: vec![TimedPattern::new(Fact::time(), "T"), TimedPattern::new(Fact::atom("F"), "T1")],
                constraints: vec![Constraint::new("T1", Relation::Eq, "T", 0)],
            }],
        };
        assert!(matches_spec(&cfg(&[("Time", "3.5"), ("F", "3.5")]), &crit));
        assert!(!matches_spec(&cfg(&[("Time", "4.5"), ("F", "3.5")]), &crit));
        assert!(!matches_spec(&cfg(&[("Time", "4.5")]), &PairSpec::default()));

        let renamed = PairSpec {
            pairs: vec![SpecPair {
                patterns: vec![TimedPattern::new(Fact::new("P", vec![Term::nonce("n2")]), "T")],
                constraints: vec![],
            }],
        };
        let s = Configuration::new(vec![time("1"), fa("P", "n1", "1")]).unwrap();
        assert!(matches_spec(&s, &renamed));
    }

    #[test]
    fn profiles() {
        let s = cfg(&[("Time", "2"), ("H", "1")]);
        let (t, h) = (s.time_index(), 1 - s.time_index());
        let p = constraint_profile(&s, 2);
        let eq = OccurrenceConstraint { left: t, relation: Relation::Eq, right: h, offset: 1 };
        assert!(p.contains(&eq));
        let s2 = cfg(&[("Time", "2.05"), ("H", "1")]);
        let p2 = constraint_profile(&s2, 2);
        assert!(!p2.contains(&eq));
        assert!(p2.contains(&OccurrenceConstraint { relation: Relation::Gt, ..eq }));
        assert_eq!(constraint_profile(&tick(&s, &int(0)).unwrap(), 2), p);
        assert!(p.satisfied().contains(&eq));
    }

    #[test]
    fn diff_class_matches_direct_evaluation() {
        for num in -50..=50 {
            let diff = ratio(num, 4);
            for d in 0..4u64 {
                let class = DiffClass::of(&diff, d);
                for off in -(d as i64)..=(d as i64) {
                    for rel in [Relation::Gt, Relation::Ge, Relation::Eq] {
                        assert_eq!(class.satisfies(rel, off), rel.holds(&diff, &int(off)), "{diff} {d} {off}");
                    }
                }
            }
        }
    }

    #[test]
    fn successor_chain() {
        let s = cfg(&[("Time", "2"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]);
        let step = immediate_successor_reps(&s, 4);
        assert_eq!(step.kind, SuccessorKind::Boundary);
        assert_eq!(step.epsilon_star, Some(ratio(2, 5)));
        let rep = step.representative.unwrap();
        assert!(equivalent(&rep, &cfg(&[("Time", "2.05"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]), 4));

        let open = cfg(&[("Time", "2.15"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]);
        let step = immediate_successor_reps(&open, 4);
        assert_eq!(step.kind, SuccessorKind::Open);
        assert_eq!(step.representative.unwrap(), cfg(&[("Time", "2.4"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]));

        let far = cfg(&[("Time", "2.4"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]);
        assert!(!is_immediate_successor(&s, &far, 4));
        assert!(is_immediate_successor(&s, &cfg(&[("Time", "2.05"), ("F", "0.4"), ("G", "2.5"), ("H", "1")]), 4));
        assert!(is_immediate_successor(&open, &far, 4));
    }

    #[test]
    fn lone_time_never_changes_profile() {
        let s = cfg(&[("Time", "0.5")]);
        let step = immediate_successor_reps(&s, 3);
        assert_eq!(step.kind, SuccessorKind::Open);
        assert_eq!(step.epsilon_star, None);
        assert_eq!(step.representative, None);
    }

    #[test]
    fn tense() {
        let s = cfg(&[("Time", "2"), ("F", "1"), ("G", "2"), ("H", "3")]);
        let tenses: Vec<Tense> = (0..s.len()).filter(|&i| i != s.time_index()).map(|i| s.tense(i)).collect();
        assert_eq!(tenses, vec![Tense::Past, Tense::Present, Tense::Future]);
    }
}
