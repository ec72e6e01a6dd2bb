use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use covercount::monodromy::local_shift;
use covercount::polynomials::roots_with_multiplicity;
use covercount::polynomials::DEFAULT_CLUSTER_EPS;
use covercount::{connected_number, predicted_connected_number, EngineConfig};
use covercount_bench::{artal, clustered_poly, first_component};

fn roots(c: &mut Criterion) {
    let mut group = c.benchmark_group("roots");
    for (n, k) in [(12, 1), (12, 4), (24, 6)] {
        let q = clustered_poly(n, k);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}/{k}")),
            &q,
            |b, q| b.iter(|| roots_with_multiplicity(black_box(q), DEFAULT_CLUSTER_EPS).unwrap()),
        );
    }
    group.finish();
}

fn local_loops(c: &mut Criterion) {
    let data = first_component(6, 3, 1).unwrap();
    c.bench_function("local_loops/6,3", |b| {
        b.iter(|| {
            (0..data.branch_points.len())
                .map(|i| local_shift(black_box(&data), i).unwrap())
                .sum::<u32>()
        })
    });
}

fn connected(c: &mut Criterion) {
    let mut group = c.benchmark_group("connected_number");
    group.sample_size(10);
    for (b, mu) in [(4, 2), (6, 3), (8, 4)] {
        let arr = artal(b, mu, 1).unwrap();
        let cfg = EngineConfig::with_seed(1);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{b},{mu}")),
            &arr,
            |bench, arr| bench.iter(|| connected_number(black_box(arr), &cfg).unwrap()),
        );
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    c.bench_function("predict/12,2", |b| {
        b.iter(|| predicted_connected_number(black_box(12), 2, [1, 1, 2]).unwrap())
    });
}

criterion_group!(benches, roots, local_loops, connected, exact);
criterion_main!(benches);
