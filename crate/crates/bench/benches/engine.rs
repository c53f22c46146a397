use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use tempora::{abstract_config, canonicalize, next, solve, SolveOptions};
use tempora_bench::{configurations, problem, problems, NONCE, SKIPPING};

fn circles(c: &mut Criterion) {
    let mut g = c.benchmark_group("circle");
    for m in [2, 4, 6] {
        let configs = configurations(64, m);
        let circles: Vec<_> = configs.iter().map(|s| abstract_config(s, 3)).collect();
        g.bench_with_input(BenchmarkId::new("abstract", m), &configs, |b, cs| {
            b.iter(|| cs.iter().map(|s| abstract_config(black_box(s), 3)).count())
        });
        g.bench_with_input(BenchmarkId::new("next", m), &circles, |b, cs| b.iter(|| cs.iter().map(|a| next(black_box(a))).count()));
        g.bench_with_input(BenchmarkId::new("canonicalize", m), &circles, |b, cs| {
            b.iter(|| cs.iter().map(|a| canonicalize(black_box(a))).count())
        });
    }
    g.finish();
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for (name, text) in [("nonce", NONCE), ("skipping", SKIPPING)] {
        let p = problem(text);
        g.bench_function(name, |b| b.iter(|| solve(black_box(&p), &SolveOptions::default()).unwrap()));
    }
    let corpus = problems(40);
    g.sample_size(10);
    g.bench_function("random-40", |b| {
        b.iter(|| corpus.iter().filter(|p| solve(p, &SolveOptions::default()).map(|v| v.reachable).unwrap_or(false)).count())
    });
    g.finish();
}

criterion_group!(benches, circles, solver);
criterion_main!(benches);
