use compcq_bench::random_set;
use compcq_core::setmetrics::{aps, compare, diversity};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("setmetrics");
    for n in [8, 35, 100] {
        let a = random_set("a", n, 384, 1);
        let b = random_set("b", n, 384, 2);
        g.bench_with_input(BenchmarkId::new("aps", n), &a, |bch, a| bch.iter(|| aps(black_box(a))));
        g.bench_with_input(BenchmarkId::new("diversity_k5", n), &a, |bch, a| {
            bch.iter(|| diversity(black_box(a), 5, 46))
        });
        g.bench_with_input(BenchmarkId::new("compare", n), &(a, b), |bch, (a, b)| {
            bch.iter(|| compare(black_box(a), black_box(b), 0.7))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
