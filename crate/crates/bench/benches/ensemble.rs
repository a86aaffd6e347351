use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ppsim::{
    build_pps_set, chsh, mean_reduced_density, prepare_bell_default, tensor_product,
    verify_properties, BellKind, CorrelationSession, PpsParams,
};
use ppsim_bench::{ghz_fields, set};

fn bench_sets(c: &mut Criterion) {
    let mut group = c.benchmark_group("pps_set");
    for (p, s) in [(2, 5), (3, 3), (5, 2)] {
        let params = PpsParams::from_table(p, s).unwrap();
        group.bench_with_input(
            BenchmarkId::new("build", format!("{p}^{s}")),
            &params,
            |b, params| b.iter(|| build_pps_set(black_box(params.clone())).unwrap()),
        );
        let built = build_pps_set(params).unwrap();
        group.bench_with_input(
            BenchmarkId::new("verify", format!("{p}^{s}")),
            &built,
            |b, set| b.iter(|| verify_properties(black_box(set))),
        );
    }
    group.finish();
}

fn bench_density(c: &mut Criterion) {
    let mut group = c.benchmark_group("mean_reduced_density");
    let gf25 = set(5, 2);
    for parties in [3, 5, 8] {
        let state = tensor_product(&ghz_fields(&gf25, parties)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(parties), &state, |b, st| {
            b.iter(|| mean_reduced_density(black_box(st)).unwrap())
        });
    }
    group.finish();
}

fn bench_correlation(c: &mut Criterion) {
    let gf27 = set(3, 3);
    let bell = prepare_bell_default(BellKind::PsiPlus, &gf27).unwrap();
    let q = std::f64::consts::FRAC_PI_4;
    c.bench_function("chsh_p3_s3", |b| {
        b.iter(|| chsh(black_box(&bell), q, -q, 0.0, 2.0 * q).unwrap())
    });

    let gf25 = set(5, 2);
    let fields = ghz_fields(&gf25, 6);
    let session = CorrelationSession::new(&fields, None).unwrap();
    let angles = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    c.bench_function("ghz6_e_time", |b| {
        b.iter(|| session.e_time(black_box(&angles)).unwrap())
    });
    c.bench_function("ghz6_e_trace", |b| {
        b.iter(|| session.e_trace(black_box(&angles)).unwrap())
    });
}

criterion_group!(benches, bench_sets, bench_density, bench_correlation);
criterion_main!(benches);
