use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use grtl_bench::{cycles_input, er_input, power_input, sparse_input};
use grtl_core::constructions::one_vs_two::run_one_vs_two;
use grtl_core::constructions::power::run_power;
use grtl_core::constructions::sparse_two_cycle::{
    run_sparse_two_cycle, sparse_default_temperature,
};
use grtl_core::constructions::subgraph::run_subgraph_counter;
use grtl_core::oracles::complete_graph;
use grtl_core::tokenize::laplacian_eigen;
use grtl_core::{
    build_one_vs_two, build_power_transformer, build_subgraph_counter, oracle_matrix_power,
    oracle_subgraph_count, Mode,
};

fn forward_passes(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for n in [16usize, 32, 64] {
        let g = cycles_input(n);
        let spec = build_one_vs_two(n, Mode::ExactMap).unwrap();
        group.bench_with_input(BenchmarkId::new("one_vs_two", n), &g, |b, g| {
            b.iter(|| run_one_vs_two(&spec, black_box(g)).unwrap())
        });
    }
    for l in [2u32, 3, 4] {
        let g = power_input(64);
        let spec = build_power_transformer(64, l, 1e-6, Mode::ExactMap).unwrap();
        group.bench_with_input(BenchmarkId::new("power_n64", l), &g, |b, g| {
            b.iter(|| run_power(&spec, black_box(g)).unwrap())
        });
    }
    let triangle = complete_graph(3);
    for n in [30usize, 60] {
        let g = er_input(n, 0.1);
        let spec = build_subgraph_counter(n, 3, &triangle).unwrap();
        group.bench_with_input(BenchmarkId::new("triangles", n), &g, |b, g| {
            b.iter(|| run_subgraph_counter(&spec, black_box(g)).unwrap())
        });
    }
    group.finish();

    let mut slow = c.benchmark_group("sparse_two_cycle");
    slow.sample_size(10);
    let g = sparse_input(256, 8);
    slow.bench_function("n256_d8_alpha4", |b| {
        b.iter(|| {
            run_sparse_two_cycle(black_box(&g), 8, 4.0, sparse_default_temperature(256), 1).unwrap()
        })
    });
    slow.finish();
}

fn oracles(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    let g = power_input(64);
    group.bench_function("matrix_power_n64_l4", |b| {
        b.iter(|| oracle_matrix_power(black_box(&g), 4).unwrap())
    });
    let g = er_input(60, 0.1);
    let triangle = complete_graph(3);
    group.bench_function("triangles_n60", |b| {
        b.iter(|| oracle_subgraph_count(black_box(&g), &triangle).unwrap())
    });
    let g = er_input(128, 0.05);
    group.bench_function("laplacian_eigen_n128", |b| {
        b.iter(|| laplacian_eigen(black_box(&g)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, forward_passes, oracles);
criterion_main!(benches);
