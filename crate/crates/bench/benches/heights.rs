use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use orbitforge_core::heights::{canonical_height, height, height_value};
use orbitforge_core::{FieldSpec, Factorizer, OrbitStepper, Poly};

fn heights(c: &mut Criterion) {
    let k = FieldSpec::quadratic(2).unwrap();
    let x = k.parse("123456789/1024+987654321/343*w").unwrap();
    c.bench_function("height_value q(sqrt2)", |b| b.iter(|| height_value(&k, black_box(&x))));
    c.bench_function("height breakdown q(sqrt2)", |b| {
        b.iter(|| height(&k, black_box(&x), &mut Factorizer::default()).unwrap())
    });
}

fn canonical(c: &mut Criterion) {
    let q = FieldSpec::rational();
    let f = Poly::from_ints(&q, &[1, 0, 1]);
    let k = FieldSpec::quadratic(2).unwrap();
    let g = Poly::from_ints(&k, &[0, -1, 0, 1]);
    let mut group = c.benchmark_group("canonical_height");
    group.sample_size(10);
    for tol in [1e-3, 1e-4] {
        group.bench_with_input(BenchmarkId::new("x^2+1 at 2", tol), &tol, |b, &tol| {
            b.iter(|| canonical_height(&q, &f, &q.int(2), tol, 1 << 20).unwrap())
        });
        let x = k.parse("1/3+w").unwrap();
        group.bench_with_input(BenchmarkId::new("x^3-x at 1/3+w", tol), &tol, |b, &tol| {
            b.iter(|| canonical_height(&k, &g, &x, tol, 1 << 20).unwrap())
        });
    }
    group.finish();
}

fn orbit_steps(c: &mut Criterion) {
    let q = FieldSpec::rational();
    let f = Poly::from_ints(&q, &[0, -1, 0, 1]);
    let x0 = q.parse("2/15").unwrap();
    let mut group = c.benchmark_group("orbit 8 steps of x^3-x at 2/15");
    group.sample_size(10);
    group.bench_function("integer stepper", |b| {
        b.iter(|| {
            let mut s = OrbitStepper::new(&f, &x0, &mut Factorizer::default());
            for _ in 0..8 {
                s.step();
            }
            s.bit_size()
        })
    });
    group.bench_function("rational eval", |b| {
        b.iter(|| (0..8).fold(x0.clone(), |x, _| f.eval(&x)).bit_size())
    });
    group.finish();
}

criterion_group!(benches, heights, canonical, orbit_steps);
criterion_main!(benches);
