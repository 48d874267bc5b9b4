use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use robust_matching::harness::{gen_random, gen_random_metric};
use robust_matching::oracles::bruteforce_min_matching;
use robust_matching::unknown::stage1::{build_robust_matching_with, Stage1Options};
use robust_matching::unknown::stage2::{unknown_stage2, Stage2Options};
use robust_matching::{build_robust_matching, known_stage1};

fn stage1(c: &mut Criterion) {
    let mut g = c.benchmark_group("unknown_stage1");
    for pairs in [25, 100, 200] {
        let (line, _) = gen_random(1, pairs, 100_000, 1).unwrap();
        let opts = Stage1Options { keep_trace: false };
        g.bench_with_input(BenchmarkId::from_parameter(pairs), &line, |b, l| {
            b.iter(|| build_robust_matching_with(black_box(l), opts).unwrap())
        });
    }
    g.finish();
}

fn stage2(c: &mut Criterion) {
    let mut g = c.benchmark_group("unknown_stage2");
    for (pairs, k) in [(50, 5), (200, 10)] {
        let (line, arr) = gen_random(2, pairs, 100_000, k).unwrap();
        let s1 = build_robust_matching(&line).unwrap();
        for (name, budget) in [("plain", false), ("budget", true)] {
            let opts = Stage2Options { improve: true, budget };
            g.bench_function(BenchmarkId::new(name, format!("{pairs}x{k}")), |b| {
                b.iter(|| unknown_stage2(&line, &arr, black_box(&s1), opts).unwrap())
            });
        }
    }
    g.finish();
}

fn subset_dp(c: &mut Criterion) {
    let mut g = c.benchmark_group("subset_dp");
    g.sample_size(10);
    for n in [12, 16, 20] {
        let (_, g2) = gen_random_metric(3, n - 2, 1, 100).unwrap();
        g.bench_with_input(BenchmarkId::new("min_matching", n), &g2, |b, m| {
            b.iter(|| bruteforce_min_matching(black_box(m)).unwrap())
        });
    }
    let (g1, _) = gen_random_metric(4, 16, 2, 100).unwrap();
    g.bench_function("known_stage1/16", |b| b.iter(|| known_stage1(black_box(&g1), 2).unwrap()));
    g.finish();
}

criterion_group!(benches, stage1, stage2, subset_dp);
criterion_main!(benches);
