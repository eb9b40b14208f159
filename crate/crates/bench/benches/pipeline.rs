use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::hint::black_box;

use fairscore_bench::bg_dataset;
use fairscore_core::*;

fn bench_histograms(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let scores: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
    let grid = BinGrid::new(0.0, 1.0, 100).unwrap();

    let mut group = c.benchmark_group("distribution");
    group.throughput(Throughput::Elements(scores.len() as u64));
    group.bench_function("build_100k_scores_100_bins", |b| {
        b.iter(|| build_distribution(black_box(&scores), &grid, OutOfRangePolicy::Reject).unwrap())
    });
    group.finish();
}

fn bench_divergence(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let grid = BinGrid::new(0.0, 1.0, 100).unwrap();
    let random_dist = |rng: &mut ChaCha12Rng| {
        let raw: Vec<f64> = (0..100).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        Distribution::from_mass(grid, raw.iter().map(|x| x / total).collect(), 100).unwrap()
    };
    let p = random_dist(&mut rng);
    let q = random_dist(&mut rng);

    c.bench_function("kl_divergence_100_bins", |b| {
        b.iter(|| kl_divergence(black_box(&p), black_box(&q), DEFAULT_SMOOTHING).unwrap())
    });

    c.bench_function("split_and_renormalize_100_bins", |b| {
        b.iter(|| split(black_box(&p), 0.7, ErrorSide::High, 1e-12).unwrap())
    });
}

fn bench_rates(c: &mut Criterion) {
    let set = bg_dataset(100_000);
    c.bench_function("threshold_at_global_fmr_200k_impostors", |b| {
        b.iter(|| threshold_at_global_fmr(black_box(&set), 5e-3).unwrap())
    });
}

fn bench_generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthetic");
    group.sample_size(20);
    group.throughput(Throughput::Elements(4 * 20_000));
    group.bench_function("generate_bg_20k_per_cell", |b| {
        b.iter_batched(
            || {
                let mut spec = ScenarioSpec::new(Scenario::BiasedGenuineTail, 1.0, 42);
                spec.n_genuine = 20_000;
                spec.n_impostor = 20_000;
                spec
            },
            |spec| generate(black_box(&spec)).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_full_evaluation(c: &mut Criterion) {
    let set = bg_dataset(20_000);
    let opts = EvalOptions::new(5e-3);
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(20);
    group.bench_function("evaluate_all_20k_per_cell_full_sweep", |b| {
        b.iter(|| evaluate_all(black_box(&set), black_box(&opts)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_histograms,
    bench_divergence,
    bench_rates,
    bench_generation,
    bench_full_evaluation
);
criterion_main!(benches);
