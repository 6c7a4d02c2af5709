use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use aqsv_bench::Q0;
use aqsv_core::qcore::eigen::EigOptions;
use aqsv_core::qsv::spectrum::analytic_spectrum;
use aqsv_core::qsv::strategy::{assemble_strategy_bruteforce, assemble_strategy_decomposed};

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("analytic_spectrum");
    for n in [3usize, 10, 50] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| analytic_spectrum(black_box(n), Q0, 0.0).unwrap())
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for n in [3usize, 4] {
        group.bench_with_input(BenchmarkId::new("bruteforce", n), &n, |b, &n| {
            b.iter(|| assemble_strategy_bruteforce(black_box(n), Q0, 0.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decomposed", n), &n, |b, &n| {
            b.iter(|| assemble_strategy_decomposed(black_box(n), Q0, 0.0).unwrap())
        });
    }
    group.finish();
}

fn numeric_check(c: &mut Criterion) {
    let mut group = c.benchmark_group("with_residuals");
    group.sample_size(10);
    for n in [3usize, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                analytic_spectrum(n, Q0, 0.0)
                    .unwrap()
                    .with_residuals(&EigOptions::default())
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, closed_form, assembly, numeric_check);
criterion_main!(benches);
