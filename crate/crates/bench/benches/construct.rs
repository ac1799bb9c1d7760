use criterion::{criterion_group, criterion_main, Criterion};
use scdkit::{btk_decomposition, gk_decomposition, Limits};

fn constructions(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("construct");
    group.sample_size(20);
    group.bench_function("gk 2^[14]", |b| {
        b.iter(|| gk_decomposition(14, &limits).unwrap())
    });
    group.bench_function("btk [3]^8", |b| {
        b.iter(|| btk_decomposition(3, 8, &limits).unwrap())
    });
    group.finish();
}

criterion_group!(benches, constructions);
criterion_main!(benches);
