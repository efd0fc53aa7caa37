use criterion::{criterion_group, criterion_main, Criterion};
use drnli_bench::dense_link;
use drnli_core::{fit_profile, solve_power_evolution};
use std::hint::black_box;

fn solve_and_fit(c: &mut Criterion) {
    let link = dense_link(40);
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("solve_40", |b| b.iter(|| solve_power_evolution(black_box(&link), 0, 1000).unwrap()));
    let evolution = solve_power_evolution(&link, 0, 1000).unwrap();
    group.bench_function("fit_40", |b| b.iter(|| fit_profile(black_box(&evolution), &link).unwrap()));
    group.finish();
}

criterion_group!(benches, solve_and_fit);
criterion_main!(benches);
