use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;

use orbitforge_bench::small_campaign;
use orbitforge_core::search::search_dependence;
use orbitforge_core::Factorizer;

fn factoring(c: &mut Criterion) {
    let mut group = c.benchmark_group("factor");
    for n in [210066388901u64, 999999000001, 18446744030759878681] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &BigUint::from(n), |b, n| {
            b.iter(|| Factorizer::default().factor(n).unwrap())
        });
    }
    group.finish();
}

fn dependence(c: &mut Criterion) {
    let mut group = c.benchmark_group("search_dependence H=log 50");
    group.sample_size(10);
    for shards in [1, 4] {
        let cfg = small_campaign(shards);
        group.bench_with_input(BenchmarkId::new("shards", shards), &cfg, |b, cfg| {
            b.iter(|| search_dependence(cfg).unwrap().witnesses.len())
        });
    }
    group.finish();
}

criterion_group!(benches, factoring, dependence);
criterion_main!(benches);
