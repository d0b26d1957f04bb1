use std::hint::black_box;

use condlab::{
    forward_substitution, lu_decompose, operator_norm, ql_lower, singular_values, NormIndex,
    PrecisionMode, DEFAULT_PIVOT_TOLERANCE,
};
use condlab_bench::{gaussian_matrix, gaussian_vector, lower_gaussian};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn lu(c: &mut Criterion) {
    let mut group = c.benchmark_group("lu_decompose");
    for n in [8, 32, 128] {
        let a = gaussian_matrix(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| lu_decompose(black_box(a), DEFAULT_PIVOT_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

fn jacobi_svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("singular_values");
    for n in [8, 32, 64] {
        let a = gaussian_matrix(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| singular_values(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn ql(c: &mut Criterion) {
    let mut group = c.benchmark_group("ql_lower");
    for n in [8, 32, 64] {
        let a = gaussian_matrix(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| ql_lower(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn enumeration_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("operator_norm_inf_1");
    for n in [8, 12, 16] {
        let a = gaussian_matrix(n, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| operator_norm(black_box(a), NormIndex::Infinity, NormIndex::One, 20).unwrap())
        });
    }
    group.finish();
}

fn forward_sub(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_substitution");
    for n in [16, 100] {
        let l = lower_gaussian(n, 5);
        let rhs = gaussian_vector(n, 5);
        for precision in [PrecisionMode::Working, PrecisionMode::Reduced] {
            group.bench_with_input(
                BenchmarkId::new(precision.as_str(), n),
                &(&l, &rhs),
                |b, (l, rhs)| {
                    b.iter(|| {
                        forward_substitution(black_box(l), black_box(rhs), precision).unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, lu, jacobi_svd, ql, enumeration_norm, forward_sub);
criterion_main!(benches);
