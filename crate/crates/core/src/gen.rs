//! Seeded generators for differential and property testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circle::{CircleConfiguration, Gap, Occurrence};
use crate::lang::{parse, ParseError};
use crate::rational::{self, Rational};
use crate::semantics::{Configuration, Problem, TimestampedFact};
use crate::term::{Fact, Term};

/// Every map `0..n -> 0..c` hitting each class, for every `c` in `1..=n`.
pub fn ordered_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for classes in 1..=n {
        let mut a = vec![0; n];
        loop {
            if (0..classes).all(|c| a.contains(&c)) {
                out.push(a.clone());
            }
            let Some(i) = (0..n).rev().find(|&i| a[i] + 1 < classes) else { break };
            a[i] += 1;
            a[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
    }
    if n == 0 {
        out.push(Vec::new());
    }
    out
}

/// Every placement on the unit circle: class 0 (the zero point) may be
/// empty, classes `1..=K` may not.
fn circle_placements(n: usize) -> Vec<(Vec<usize>, usize)> {
    let mut out = Vec::new();
    for zero in 0..(1usize << n) {
        let rest: Vec<usize> = (0..n).filter(|i| zero & (1 << i) == 0).collect();
        for part in ordered_partitions(rest.len()) {
            let k = part.iter().max().map_or(0, |m| m + 1);
            let mut a = vec![0; n];
            for (&i, &c) in rest.iter().zip(&part) {
                a[i] = c + 1;
            }
            out.push((a, k));
        }
    }
    out
}

fn gap_choices(dmax: u64) -> Vec<Gap> {
    (1..=dmax).map(Gap::Finite).chain([Gap::Infinite]).collect()
}

fn gap_vectors(len: usize, dmax: u64) -> Vec<Vec<Gap>> {
    let choices = gap_choices(dmax);
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out.into_iter().flat_map(|v| choices.iter().map(move |g| [v.clone(), vec![*g]].concat())).collect();
    }
    out
}

/// Every circle-configuration whose non-Time facts are exactly `facts`.
pub fn all_circles(facts: &[Fact], dmax: u64) -> Vec<CircleConfiguration> {
    let all: Vec<Fact> = std::iter::once(Fact::time()).chain(facts.iter().cloned()).collect();
    let n = all.len();
    let circles = circle_placements(n);
    let mut out = Vec::new();
    for delta in ordered_partitions(n) {
        let classes = delta.iter().max().unwrap() + 1;
        for gaps in gap_vectors(classes - 1, dmax) {
            for (circle, k) in &circles {
                let occ = (0..n).map(|i| Occurrence { delta: delta[i], circle: circle[i], fact: all[i].clone() }).collect();
                out.push(CircleConfiguration::new(occ, gaps.clone(), *k, dmax).expect("enumerated shape is valid"));
            }
        }
    }
    out
}

/// Every multiset of `size` facts drawn from `pool`.
pub fn multisets(pool: &[Fact], size: usize) -> Vec<Vec<Fact>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, f) in pool.iter().enumerate() {
        for mut rest in multisets(&pool[i..], size - 1) {
            rest.insert(0, f.clone());
            out.push(rest);
        }
    }
    out
}

/// Surjective random map `0..n -> 0..classes`.
fn random_partition(rng: &mut impl Rng, n: usize, classes: usize) -> Vec<usize> {
    let mut a: Vec<usize> = (0..n).map(|i| if i < classes { i } else { rng.gen_range(0..classes) }).collect();
    a.shuffle(rng);
    a
}

/// A random circle-configuration over Time plus `facts`.
pub fn random_circle(rng: &mut impl Rng, facts: &[Fact], dmax: u64) -> CircleConfiguration {
    let all: Vec<Fact> = std::iter::once(Fact::time()).chain(facts.iter().cloned()).collect();
    let n = all.len();
    let classes = rng.gen_range(1..=n);
    let delta = random_partition(rng, n, classes);
    let choices = gap_choices(dmax);
    let classes = delta.iter().max().unwrap() + 1;
    let gaps = (1..classes).map(|_| *choices.choose(rng).unwrap()).collect();
    let on_zero: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.25)).collect();
    let rest = on_zero.iter().filter(|z| !**z).count();
    let k = if rest == 0 { 0 } else { rng.gen_range(1..=rest) };
    let mut part = random_partition(rng, rest, k).into_iter();
    let occ = (0..n)
        .map(|i| {
            let circle = if on_zero[i] { 0 } else { part.next().unwrap() + 1 };
            Occurrence { delta: delta[i], circle, fact: all[i].clone() }
        })
        .collect();
    CircleConfiguration::new(occ, gaps, k, dmax).expect("generated shape is valid")
}

/// `count` facts from a small fixed alphabet: atoms, unary facts over two
/// constants and one nested term.
pub fn random_facts(rng: &mut impl Rng, count: usize) -> Vec<Fact> {
    let pool = [
        Fact::atom("P"),
        Fact::atom("Q"),
        Fact::new("R", vec![Term::constant("a")]),
        Fact::new("R", vec![Term::constant("b")]),
        Fact::new("S", vec![Term::app("f", vec![Term::constant("a")])]),
        Fact::new("S", vec![Term::nonce("n1")]),
    ];
    (0..count).map(|_| pool.choose(rng).unwrap().clone()).collect()
}

/// A timestamp with denominator up to 6, below `limit`.
pub fn random_time(rng: &mut impl Rng, limit: i64) -> Rational {
    let den = rng.gen_range(1..=6);
    rational::ratio(rng.gen_range(0..limit * den), den)
}

pub fn random_configuration(rng: &mut impl Rng, m: usize, limit: i64) -> Configuration {
    let mut facts = vec![TimestampedFact::new(Fact::time(), random_time(rng, limit))];
    facts.extend(random_facts(rng, m.saturating_sub(1)).into_iter().map(|f| TimestampedFact::new(f, random_time(rng, limit))));
    Configuration::new(facts).expect("generated configuration is valid")
}

/// Shape knobs for [`random_problem_text`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemShape {
    pub max_m: usize,
    pub max_rules: usize,
    pub nonce_rule: bool,
}

impl Default for ProblemShape {
    fn default() -> Self {
        ProblemShape { max_m: 4, max_rules: 3, nonce_rule: true }
    }
}

const INIT_TIMES: [&str; 6] = ["0", "1/3", "1/2", "1", "4/3", "3/2"];

fn pick<'a>(rng: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn guard(rng: &mut impl Rng, left: &str, right: &str) -> String {
    let rel = pick(rng, &[">", ">=", "="]);
    match rng.gen_range(0..3) {
        0 => format!("{left} {rel} {right}"),
        1 => format!("{left} {rel} {right} + 1"),
        _ => format!("{left} {rel} {right} - 1"),
    }
}

fn init_fact(rng: &mut impl Rng) -> String {
    let f = pick(rng, &["P", "Q", "R(a)", "R(b)", "S(a)", "S(f(a))"]);
    format!("{f}@{}", pick(rng, &INIT_TIMES))
}

/// Pattern for one consumed or kept fact and the term variable it binds.
fn pre_pattern(rng: &mut impl Rng, i: usize) -> (String, Option<String>) {
    match rng.gen_range(0..4) {
        0 => ("P".into(), None),
        1 => ("Q".into(), None),
        2 => (format!("R(X{i})"), Some(format!("X{i}"))),
        _ => (format!("S(X{i})"), Some(format!("X{i}"))),
    }
}

fn created_fact(rng: &mut impl Rng, bound: &[String], nonce: bool) -> String {
    if nonce {
        return "S(N)".into();
    }
    let arg = |rng: &mut _| match bound.choose(rng) {
        Some(v) if rand::Rng::gen_bool(rng, 0.6) => v.clone(),
        _ => pick(rng, &["a", "b"]).to_string(),
    };
    match rng.gen_range(0..4) {
        0 => "P".into(),
        1 => "Q".into(),
        2 => format!("R({})", arg(rng)),
        _ => format!("S({})", arg(rng)),
    }
}

fn rule(rng: &mut impl Rng, name: &str, nonce: bool) -> String {
    let n = rng.gen_range(1..=2);
    let mut pre = vec!["Time@T".to_string()];
    let mut bound = Vec::new();
    let mut kept = Vec::new();
    let mut consumed = 0;
    for i in 0..n {
        let (pat, var) = pre_pattern(rng, i);
        pre.push(format!("{pat}@T{i}"));
        bound.extend(var);
        if (i == 0 && nonce) || rng.gen_bool(0.7) {
            consumed += 1;
        } else {
            kept.push(format!("{pat}@T{i}"));
        }
    }
    let mut guards = Vec::new();
    if rng.gen_bool(0.7) {
        let other = format!("T{}", rng.gen_range(0..n));
        guards.push(guard(rng, "T", &other));
    }
    let mut post = vec!["Time@T".to_string()];
    post.extend(kept);
    for c in 0..consumed {
        let fact = created_fact(rng, &bound, nonce && c == 0);
        post.push(format!("{fact}@(T + {})", rng.gen_range(0..=1)));
    }
    let guard = if guards.is_empty() { String::new() } else { format!(" | {}", guards.join(", ")) };
    let exists = if nonce { "exists N. " } else { "" };
    format!("rule {name}: {}{guard} -o {exists}{}\n", pre.join(", "), post.join(", "))
}

fn spec_pair(rng: &mut impl Rng) -> String {
    let fact = pick(rng, &["P", "Q", "R(a)", "R(b)", "S(X)", "R(X)"]);
    if rng.gen_bool(0.5) {
        format!("{{ {fact}@T1 }}")
    } else {
        format!("{{ Time@T, {fact}@T1 | {} }}", guard(rng, "T", "T1"))
    }
}

/// Source text of a random balanced problem: timestamps below 2, offsets
/// and delays in {0, 1}, so `dmax` stays at most 3.
pub fn random_problem_text(rng: &mut impl Rng, shape: ProblemShape) -> String {
    let m = rng.gen_range(2..=shape.max_m.max(2));
    let mut out = format!("init {{ Time@{}", pick(rng, &INIT_TIMES));
    for _ in 1..m {
        out += &format!(", {}", init_fact(rng));
    }
    out += " }\n";
    let rules = rng.gen_range(1..=shape.max_rules.max(1));
    let nonce_at = (shape.nonce_rule && rng.gen_bool(0.3)).then(|| rng.gen_range(0..rules));
    for r in 0..rules {
        out += &rule(rng, &format!("r{r}"), nonce_at == Some(r));
    }
    if rng.gen_bool(0.7) {
        out += &format!("critical {}\n", spec_pair(rng));
    }
    out += &format!("goal {}\n", spec_pair(rng));
    out
}

pub fn random_problem(rng: &mut impl Rng, shape: ProblemShape) -> Result<(String, Problem), ParseError> {
    let text = random_problem_text(rng, shape);
    parse(&text).map(|p| (text, p))
}
