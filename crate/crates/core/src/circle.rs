//! Circle-configurations: the finite symbolic view of a configuration.
//!
//! The δ-configuration groups facts by the integer part of their timestamp
//! and records truncated distances between groups; the unit circle orders
//! facts by fractional part, with integer timestamps at the zero point.
//! Each occurrence stores both of its class indices, so repeated untimed
//! facts stay unambiguous.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::ToPrimitive;

use crate::rational;
use crate::semantics::{
    applicable_instances, matches_spec, Configuration, PairSpec, Rule, SemanticsError, TimestampedFact,
};
use crate::term::{Fact, Substitution, Term};

const KEY_PREFIX: &str = "cc1:";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircleError {
    #[error("inconsistent circle-configuration: {0}")]
    Inconsistent(String),
    #[error("rule `{0}` is not balanced")]
    NotBalanced(String),
    #[error("constraint offset {offset} exceeds dmax {dmax}")]
    OffsetExceedsDmax { offset: u64, dmax: u64 },
    #[error("malformed canonical key: {0}")]
    MalformedKey(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Truncated distance between consecutive δ-classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gap {
    Finite(u64),
    Infinite,
}

impl Gap {
    fn truncate(distance: i128, dmax: u64) -> Gap {
        if distance > dmax as i128 {
            Gap::Infinite
        } else {
            Gap::Finite(distance as u64)
        }
    }

    /// Integer distance used when laying classes out on a line; `Infinite`
    /// becomes `infinite`.
    fn span(self, infinite: u64) -> i128 {
        match self {
            Gap::Finite(g) => g as i128,
            Gap::Infinite => infinite as i128,
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gap::Finite(g) => write!(f, "{g}"),
            Gap::Infinite => f.write_str("inf"),
        }
    }
}

/// A fact occurrence with its δ-class index and unit-circle index
/// (0 is the zero point, `1..=K` the other classes in clockwise order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub delta: usize,
    pub circle: usize,
    pub fact: Fact,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircleConfiguration {
    occurrences: Vec<Occurrence>,
    gaps: Vec<Gap>,
    circle_classes: usize,
    dmax: u64,
}

impl CircleConfiguration {
    /// Checks every structural invariant.
    pub fn new(
        mut occurrences: Vec<Occurrence>,
        gaps: Vec<Gap>,
        circle_classes: usize,
        dmax: u64,
    ) -> Result<Self, CircleError> {
        let bad = |m: String| Err(CircleError::Inconsistent(m));
        occurrences.sort();
        let delta_classes = gaps.len() + 1;
        let times = occurrences.iter().filter(|o| o.fact.is_time()).count();
        if times != 1 {
            return bad(format!("{times} Time occurrences"));
        }
        for d in 0..delta_classes {
            if !occurrences.iter().any(|o| o.delta == d) {
                return bad(format!("δ-class {d} is empty"));
            }
        }
        for u in 1..=circle_classes {
            if !occurrences.iter().any(|o| o.circle == u) {
                return bad(format!("unit-circle class {u} is empty"));
            }
        }
        if let Some(o) = occurrences.iter().find(|o| o.delta >= delta_classes || o.circle > circle_classes) {
            return bad(format!("occurrence {} has out-of-range class indices", o.fact));
        }
        if let Some(g) = gaps.iter().find(|g| matches!(g, Gap::Finite(n) if *n == 0 || *n > dmax)) {
            return bad(format!("gap {g} outside 1..={dmax}"));
        }
        if let Some(o) = occurrences.iter().find(|o| !o.fact.is_ground()) {
            return bad(format!("non-ground fact {}", o.fact));
        }
        Ok(CircleConfiguration { occurrences, gaps, circle_classes, dmax })
    }

    /// Builds from the two separate views, linking occurrences of equal
    /// facts greedily in class order. With repeated facts spread over
    /// several classes the views alone are ambiguous; the first consistent
    /// linking is taken.
    pub fn from_views(
        delta: Vec<Vec<Fact>>,
        gaps: Vec<Gap>,
        zero: Vec<Fact>,
        circle: Vec<Vec<Fact>>,
        dmax: u64,
    ) -> Result<Self, CircleError> {
        if delta.len() != gaps.len() + 1 {
            return Err(CircleError::Inconsistent(format!("{} δ-classes but {} gaps", delta.len(), gaps.len())));
        }
        let mut pool: Vec<(Fact, usize)> = std::iter::once(zero)
            .chain(circle.iter().cloned())
            .enumerate()
            .flat_map(|(u, fs)| fs.into_iter().map(move |f| (f, u)))
            .collect();
        let k = circle.len();
        let mut occurrences = Vec::new();
        for (d, class) in delta.into_iter().enumerate() {
            for fact in class {
                let Some(pos) = pool.iter().position(|(f, _)| *f == fact) else {
                    return Err(CircleError::Inconsistent(format!("{fact} is in the δ-configuration only")));
                };
                let (_, u) = pool.remove(pos);
                occurrences.push(Occurrence { delta: d, circle: u, fact });
            }
        }
        if let Some((f, _)) = pool.first() {
            return Err(CircleError::Inconsistent(format!("{f} is on the unit circle only")));
        }
        CircleConfiguration::new(occurrences, gaps, k, dmax)
    }

    pub fn occurrences(&self) -> &[Occurrence] {
        &self.occurrences
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn dmax(&self) -> u64 {
        self.dmax
    }

    /// Number of non-zero unit-circle classes.
    pub fn circle_classes(&self) -> usize {
        self.circle_classes
    }

    pub fn delta_classes(&self) -> usize {
        self.gaps.len() + 1
    }

    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    pub fn time(&self) -> &Occurrence {
        self.occurrences.iter().find(|o| o.fact.is_time()).expect("one Time occurrence")
    }

    /// δ-classes as sorted fact lists, with the gaps between them.
    pub fn delta_view(&self) -> (Vec<Vec<Fact>>, Vec<Gap>) {
        let mut classes = vec![Vec::new(); self.delta_classes()];
        for o in &self.occurrences {
            classes[o.delta].push(o.fact.clone());
        }
        classes.iter_mut().for_each(|c| c.sort());
        (classes, self.gaps.clone())
    }

    /// Zero point and the clockwise classes, each sorted.
    pub fn circle_view(&self) -> (Vec<Fact>, Vec<Vec<Fact>>) {
        let mut classes = vec![Vec::new(); self.circle_classes + 1];
        for o in &self.occurrences {
            classes[o.circle].push(o.fact.clone());
        }
        classes.iter_mut().for_each(|c| c.sort());
        let zero = classes.remove(0);
        (zero, classes)
    }

    /// Lays occurrences out with integer positions and circle keys and
    /// re-derives both groupings.
    fn rebuild<K: Ord + Clone>(items: Vec<(Fact, i128, Option<K>)>, dmax: u64) -> Self {
        let mut positions: Vec<i128> = items.iter().map(|(_, p, _)| *p).collect();
        positions.sort();
        positions.dedup();
        let mut keys: Vec<K> = items.iter().filter_map(|(_, _, k)| k.clone()).collect();
        keys.sort();
        keys.dedup();
        let gaps = positions.windows(2).map(|w| Gap::truncate(w[1] - w[0], dmax)).collect();
        let mut occurrences: Vec<Occurrence> = items
            .into_iter()
            .map(|(fact, p, k)| Occurrence {
                delta: positions.binary_search(&p).expect("position present"),
                circle: k.map_or(0, |k| keys.binary_search(&k).expect("key present") + 1),
                fact,
            })
            .collect();
        occurrences.sort();
        CircleConfiguration { occurrences, gaps, circle_classes: keys.len(), dmax }
    }

    /// Integer position of each δ-class, with `Infinite` laid out as `infinite`.
    fn positions(&self, infinite: u64) -> Vec<i128> {
        let mut out = vec![0i128];
        for g in &self.gaps {
            out.push(out.last().unwrap() + g.span(infinite));
        }
        out
    }
}

/// The circle-configuration of `s`.
pub fn abstract_config(s: &Configuration, dmax: u64) -> CircleConfiguration {
    let items = s
        .facts()
        .iter()
        .map(|tf| {
            let int = rational::integer_part(&tf.time).to_i128().expect("timestamp fits i128");
            let frac = rational::fractional_part(&tf.time);
            let key = (!num_traits::Zero::is_zero(&frac)).then_some(frac);
            (tf.fact.clone(), int, key)
        })
        .collect();
    CircleConfiguration::rebuild(items, dmax)
}

/// Canonical representative: class `i` of the δ-configuration sits at an
/// integer obtained by summing gaps (`Infinite` counted as `dmax + 1`), and
/// circle class `j` of `K` gets fractional part `j / (K + 1)`.
pub fn concretize(a: &CircleConfiguration) -> Configuration {
    let base = a.positions(a.dmax + 1);
    let denom = (a.circle_classes + 1) as i64;
    let facts = a
        .occurrences
        .iter()
        .map(|o| {
            let int = rational::int(base[o.delta] as i64);
            TimestampedFact::new(o.fact.clone(), int + rational::ratio(o.circle as i64, denom))
        })
        .collect();
    Configuration::new(facts).expect("circle-configuration invariants give a valid configuration")
}

/// Which time-advancement case applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextCase {
    /// Time leaves a shared class or the zero point for a new class just after it.
    Leave,
    /// Time, alone, joins the next class clockwise.
    Join,
    /// Time, alone in the last class, reaches the next integer.
    Wrap,
}

pub fn next_case(a: &CircleConfiguration) -> NextCase {
    let t = a.time();
    let shared = a.occurrences.iter().filter(|o| o.circle == t.circle).count() > 1;
    if t.circle == 0 || shared {
        NextCase::Leave
    } else if t.circle < a.circle_classes {
        NextCase::Join
    } else {
        NextCase::Wrap
    }
}

/// The time-advanced circle-configuration.
pub fn next(a: &CircleConfiguration) -> CircleConfiguration {
    let case = next_case(a);
    let t_circle = a.time().circle;
    // Circle keys are doubled so Time can be placed between two classes.
    let key = |o: &Occurrence| -> Option<usize> {
        if !o.fact.is_time() {
            return (o.circle != 0).then_some(2 * o.circle);
        }
        match case {
            NextCase::Leave => Some(2 * o.circle + 1),
            NextCase::Join => Some(2 * (o.circle + 1)),
            NextCase::Wrap => None,
        }
    };
    debug_assert!(case != NextCase::Wrap || t_circle == a.circle_classes);
    // An infinite gap is laid out as dmax + 2 so that it stays infinite
    // when Time closes in by one.
    let pos = a.positions(a.dmax + 2);
    let items = a
        .occurrences
        .iter()
        .map(|o| {
            let p = pos[o.delta] + i128::from(o.fact.is_time() && case == NextCase::Wrap);
            (o.fact.clone(), p, key(o))
        })
        .collect();
    CircleConfiguration::rebuild(items, a.dmax)
}

/// Results of applying `rule` to `a`, one per concrete instance on the
/// canonical representative, in match order.
pub fn symbolic_instances(rule: &Rule, a: &CircleConfiguration) -> Result<Vec<(Substitution, CircleConfiguration)>, CircleError> {
    if !rule.is_balanced() {
        return Err(CircleError::NotBalanced(rule.name.clone()));
    }
    let s = concretize(a);
    Ok(applicable_instances(rule, &s)?
        .into_iter()
        .map(|i| (i.substitution, abstract_config(&i.result, a.dmax)))
        .collect())
}

pub fn apply_symbolic(rule: &Rule, a: &CircleConfiguration) -> Result<Vec<CircleConfiguration>, CircleError> {
    Ok(symbolic_instances(rule, a)?.into_iter().map(|(_, c)| c).collect())
}

pub fn cc_matches_spec(a: &CircleConfiguration, spec: &PairSpec) -> Result<bool, CircleError> {
    let offset = spec.max_offset();
    if offset > a.dmax {
        return Err(CircleError::OffsetExceedsDmax { offset, dmax: a.dmax });
    }
    Ok(matches_spec(&concretize(a), spec))
}

impl fmt::Display for CircleConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |fs: &[Fact]| format!("{{{}}}", fs.iter().map(Fact::to_string).collect::<Vec<_>>().join(","));
        let (classes, gaps) = self.delta_view();
        f.write_str("<")?;
        for (i, c) in classes.iter().enumerate() {
            if i > 0 {
                write!(f, ",{},", gaps[i - 1])?;
            }
            f.write_str(&set(c))?;
        }
        let (zero, circle) = self.circle_view();
        write!(f, "> / [{}_Z", set(&zero))?;
        for c in &circle {
            write!(f, ",{}", set(c))?;
        }
        f.write_str("]")
    }
}

/// Stable textual key; equal iff the configurations agree up to a nonce
/// bijection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(pub String);

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Default)]
struct Renaming {
    map: BTreeMap<String, String>,
}

impl Renaming {
    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Nonce(n) => {
                let next = self.map.len() + 1;
                Term::Nonce(self.map.entry(n.clone()).or_insert_with(|| format!("n{next}")).clone())
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.term(a)).collect()),
            other => other.clone(),
        }
    }

    fn fact(&mut self, f: &Fact) -> Fact {
        Fact::new(f.predicate.clone(), f.args.iter().map(|a| self.term(a)).collect())
    }
}

fn masked(f: &Fact) -> Fact {
    fn go(t: &Term) -> Term {
        match t {
            Term::Nonce(_) => Term::Nonce(String::new()),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(go).collect()),
            other => other.clone(),
        }
    }
    Fact::new(f.predicate.clone(), f.args.iter().map(go).collect())
}

fn token(o: &Occurrence, fact: &Fact) -> String {
    format!("{}:{}", o.circle, fact)
}

/// Smallest token sequence for `group[..]` in any order, continuing into the
/// following groups.
fn best_tokens(groups: &[Vec<&Occurrence>], g: usize, used: &mut Vec<bool>, ren: Renaming) -> (Vec<String>, Renaming) {
    let Some(group) = groups.get(g) else {
        return (Vec::new(), ren);
    };
    if used.iter().all(|&u| u) {
        let mut fresh = vec![false; groups.get(g + 1).map_or(0, Vec::len)];
        return best_tokens(groups, g + 1, &mut fresh, ren);
    }
    let candidates: Vec<(usize, String, Renaming)> = group
        .iter()
        .enumerate()
        .filter(|(i, _)| !used[*i])
        .map(|(i, o)| {
            let mut r = ren.clone();
            let f = r.fact(&o.fact);
            (i, token(o, &f), r)
        })
        .collect();
    let least = candidates.iter().map(|(_, t, _)| t).min().expect("unused member").clone();
    let mut best: Option<(Vec<String>, Renaming)> = None;
    let mut seen_renamings: Vec<BTreeMap<String, String>> = Vec::new();
    for (i, tok, r) in candidates {
        if tok != least || seen_renamings.contains(&r.map) {
            continue;
        }
        seen_renamings.push(r.map.clone());
        used[i] = true;
        let (mut rest, r2) = best_tokens(groups, g, used, r);
        used[i] = false;
        rest.insert(0, tok.clone());
        if best.as_ref().is_none_or(|(b, _)| rest < *b) {
            best = Some((rest, r2));
        }
    }
    best.expect("at least one candidate")
}

pub fn canonicalize(a: &CircleConfiguration) -> CanonicalKey {
    // Tie groups: same δ-class, circle class and fact up to nonce names.
    let mut sorted: Vec<&Occurrence> = a.occurrences.iter().collect();
    sorted.sort_by(|x, y| (x.delta, x.circle, masked(&x.fact)).cmp(&(y.delta, y.circle, masked(&y.fact))));
    let mut groups: Vec<Vec<&Occurrence>> = Vec::new();
    for o in sorted {
        match groups.last_mut() {
            Some(g) if g[0].delta == o.delta && g[0].circle == o.circle && masked(&g[0].fact) == masked(&o.fact) => {
                g.push(o)
            }
            _ => groups.push(vec![o]),
        }
    }
    let mut used = vec![false; groups.first().map_or(0, Vec::len)];
    let (tokens, _) = best_tokens(&groups, 0, &mut used, Renaming::default());
    let mut out = format!("{KEY_PREFIX}dmax={};circle={};", a.dmax, a.circle_classes);
    let mut tokens = tokens.into_iter();
    for d in 0..a.delta_classes() {
        if d > 0 {
            out.push_str(&format!(" {} ", a.gaps[d - 1]));
        }
        let n = a.occurrences.iter().filter(|o| o.delta == d).count();
        let members: Vec<String> = tokens.by_ref().take(n).collect();
        out.push_str(&format!("{{{}}}", members.join(" ")));
    }
    CanonicalKey(out)
}

/// Rebuilds a circle-configuration from its canonical key.
pub fn from_key(key: &CanonicalKey) -> Result<CircleConfiguration, CircleError> {
    let bad = || CircleError::MalformedKey(key.0.clone());
    let body = key.0.strip_prefix(KEY_PREFIX).ok_or_else(bad)?;
    let mut parts = body.splitn(3, ';');
    let dmax: u64 = parts.next().and_then(|p| p.strip_prefix("dmax=")).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let k: usize = parts.next().and_then(|p| p.strip_prefix("circle=")).and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let rest = parts.next().ok_or_else(bad)?;
    let mut occurrences = Vec::new();
    let mut gaps = Vec::new();
    let mut delta = 0usize;
    let mut chars = rest.trim();
    loop {
        let inner_end = chars.find('}').ok_or_else(bad)?;
        let inner = chars.strip_prefix('{').ok_or_else(bad)?;
        let inner = &inner[..inner_end - 1];
        for item in inner.split_whitespace() {
            let (u, f) = item.split_once(':').ok_or_else(bad)?;
            let circle = u.parse().map_err(|_| bad())?;
            let fact = crate::lang::parse_fact(f).map_err(|_| bad())?;
            occurrences.push(Occurrence { delta, circle, fact });
        }
        chars = chars[inner_end + 1..].trim_start();
        if chars.is_empty() {
            break;
        }
        let (gap, tail) = chars.split_once(' ').ok_or_else(bad)?;
        gaps.push(match gap {
            "inf" => Gap::Infinite,
            n => Gap::Finite(n.parse().map_err(|_| bad())?),
        });
        chars = tail.trim_start();
        delta += 1;
    }
    CircleConfiguration::new(occurrences, gaps, k, dmax)
}
