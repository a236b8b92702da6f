use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use caperc_core::theory::{a1, a2, rho};
use caperc_core::{ca_partition, census, enumerate_cycles, generate, ColorParams};

fn bench_generate(c: &mut Criterion) {
    let p = ColorParams::new(&[0.3, 0.3, 0.3]).unwrap();
    let mut group = c.benchmark_group("generate");
    for n in [10_000usize, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| generate(&p, n, black_box(7)).unwrap())
        });
    }
    group.finish();
}

fn bench_ca_partition(c: &mut Criterion) {
    let mut group = c.benchmark_group("ca_partition");
    for lambdas in [[0.3, 0.3, 0.3], [1.5, 1.0, 0.5]] {
        let p = ColorParams::new(&lambdas).unwrap();
        let g = generate(&p, 100_000, 11).unwrap();
        group.bench_function(format!("{lambdas:?}"), |b| b.iter(|| ca_partition(black_box(&g))));
    }
    group.finish();
}

fn bench_cycles(c: &mut Criterion) {
    let p = ColorParams::new(&[0.4, 0.4]).unwrap();
    let g = generate(&p, 100_000, 3).unwrap();
    c.bench_function("enumerate_cycles/16", |b| b.iter(|| enumerate_cycles(black_box(&g), 16).unwrap()));
    c.bench_function("census/16", |b| b.iter(|| census(black_box(&g), 16).unwrap()));
}

fn bench_theory(c: &mut Criterion) {
    let p2 = ColorParams::new(&[1.5, 1.5]).unwrap();
    let p4 = ColorParams::new(&[1.2, 1.1, 0.9, 0.4]).unwrap();
    c.bench_function("a1/k=2", |b| b.iter(|| a1(black_box(&p2))));
    c.bench_function("a1/k=4", |b| b.iter(|| a1(black_box(&p4))));
    let inter = ColorParams::new(&[1.5, 0.5]).unwrap();
    c.bench_function("a2", |b| b.iter(|| a2(black_box(&inter)).unwrap()));
    c.bench_function("rho", |b| b.iter(|| rho(black_box(0.5), black_box(0.5)).unwrap()));
}

criterion_group!(benches, bench_generate, bench_ca_partition, bench_cycles, bench_theory);
criterion_main!(benches);
