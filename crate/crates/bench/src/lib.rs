//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tempora::gen::{random_configuration, random_problem, ProblemShape};
use tempora::lang::parse;
use tempora::{Configuration, Problem};

pub const NONCE: &str = include_str!("../../../specs/nonce.tmsr");
pub const SKIPPING: &str = include_str!("../../../specs/skipping.tmsr");

pub fn problem(text: &str) -> Problem {
    parse(text).expect("fixture parses")
}

/// Seeded configurations with `m` facts, timestamps below 6.
pub fn configurations(count: usize, m: usize) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    (0..count).map(|_| random_configuration(&mut rng, m, 6)).collect()
}

pub fn problems(count: usize) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    (0..count).map(|_| random_problem(&mut rng, ProblemShape::default()).expect("generator output parses").1).collect()
}
