use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use spreadcs::coherence::analog_chain;
use spreadcs::{make_transform, TransformKind};
use spreadcs_bench::random_vector;

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for kind in TransformKind::ALL {
        for n in [256, 4096] {
            let op = make_transform(kind, n).unwrap();
            let x = random_vector(n, 1);
            group.bench_with_input(BenchmarkId::new(kind.name(), n), &x, |b, x| {
                b.iter(|| op.apply(black_box(x)))
            });
        }
    }
    group.finish();
}

fn analog(c: &mut Criterion) {
    let mut group = c.benchmark_group("analog_chain");
    for w_bar in [0.0, 0.5] {
        let chain = analog_chain(TransformKind::Haar, 1024, w_bar).unwrap();
        let x = random_vector(1024, 2);
        let y = random_vector(chain.out_dim(), 3);
        group.bench_with_input(BenchmarkId::new("forward", w_bar), &x, |b, x| {
            b.iter(|| chain.apply(black_box(x)))
        });
        group.bench_with_input(BenchmarkId::new("adjoint", w_bar), &y, |b, y| {
            b.iter(|| chain.apply_adjoint(black_box(y)))
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, analog);
criterion_main!(benches);
