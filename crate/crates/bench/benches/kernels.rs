use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use bellsim_bench::{fitted_noise, x_config};
use bellsim_core::lhv::SettingsVector;
use bellsim_core::{
    conditioned_lhv_report, decompose, epr_pair, ghz_state, mermin_lhv_report, prepare_ghz3,
    probability_table, sample_counts, tsirelson_search, MixedState, RunConfig, StreamKey,
};

fn bench_probability_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("probability_table");
    for n in [3usize, 6, 10] {
        let state = MixedState::pure(ghz_state(n).unwrap());
        let config = x_config(n);
        group.throughput(Throughput::Elements(1 << n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| probability_table(black_box(&state), black_box(&config)).unwrap())
        });
    }
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let noise = fitted_noise();
    let config = x_config(3);
    let mut group = c.benchmark_group("sample_counts");
    for shots in [10_000u64, 100_000] {
        group.throughput(Throughput::Elements(shots));
        group.bench_with_input(BenchmarkId::from_parameter(shots), &shots, |b, shots| {
            b.iter(|| {
                sample_counts(
                    black_box(&noise),
                    black_box(&config),
                    *shots,
                    StreamKey::new(7, 0),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_analysis(c: &mut Criterion) {
    let noise = fitted_noise();
    let run = RunConfig::standard(noise, 100_000, 7);
    let counts = bellsim_core::run_experiment(&run).unwrap().counts;
    c.bench_function("decompose_counts", |b| {
        b.iter(|| decompose(black_box(&counts)).unwrap())
    });
}

fn bench_lhv_scans(c: &mut Criterion) {
    c.bench_function("mermin_lhv_scan", |b| b.iter(mermin_lhv_report));
    c.bench_function("conditioned_lhv_scan", |b| b.iter(conditioned_lhv_report));
}

fn bench_optimizer(c: &mut Criterion) {
    let pair = epr_pair();
    c.bench_function("tsirelson_single_start", |b| {
        b.iter(|| tsirelson_search(&SettingsVector::canonical(), black_box(&pair), 1e-6).unwrap())
    });
}

fn bench_preparation(c: &mut Criterion) {
    c.bench_function("prepare_ghz3", |b| b.iter(prepare_ghz3));
}

criterion_group!(
    benches,
    bench_probability_tables,
    bench_sampling,
    bench_analysis,
    bench_lhv_scans,
    bench_optimizer,
    bench_preparation
);
criterion_main!(benches);
