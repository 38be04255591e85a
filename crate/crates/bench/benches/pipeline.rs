use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qfock::fock::{build_symmetrizer, symmetrizer_brute_force};
use qfock::oracle::compare_moments;
use qfock::spectral::{spectral_report, SpectralOptions};
use qfock::{LadderSet, TruncatedFock};

fn symmetrizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("symmetrizer");
    for n in [3usize, 4, 5] {
        group.bench_with_input(BenchmarkId::new("recursive", n), &n, |b, &n| {
            b.iter(|| build_symmetrizer(black_box(n), 3, 0.4).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("brute_force", n), &n, |b, &n| {
            b.iter(|| symmetrizer_brute_force(black_box(n), 3, 0.4).unwrap())
        });
    }
    group.finish();
}

fn space_and_operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    group.sample_size(20);
    for (d, n) in [(3usize, 4usize), (4, 4)] {
        let id = format!("d{d}_N{n}");
        group.bench_function(BenchmarkId::new("space", &id), |b| {
            b.iter(|| TruncatedFock::new(0.4, d, n).unwrap())
        });
        let space = TruncatedFock::new(0.4, d, n).unwrap();
        group.bench_function(BenchmarkId::new("ladders", &id), |b| {
            b.iter(|| LadderSet::new(&space).unwrap())
        });
    }
    group.finish();
}

fn spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_report");
    group.sample_size(10);
    for (d, n) in [(3usize, 3usize), (4, 4)] {
        let space = TruncatedFock::new(0.4, d, n).unwrap();
        group.bench_function(format!("d{d}_N{n}"), |b| {
            b.iter(|| spectral_report(&space, &SpectralOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn moments(c: &mut Criterion) {
    let space = TruncatedFock::new(-0.5, 3, 3).unwrap();
    c.bench_function("moments_order6_d3", |b| {
        b.iter(|| compare_moments(&space, 6, 1e-10).unwrap())
    });
}

criterion_group!(benches, symmetrizer, space_and_operators, spectral, moments);
criterion_main!(benches);
