use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use combkit::comb::sample_kingman_comb;
use combkit::evolve::evolve_step;
use combkit::replicate::replicate_sequential;
use combkit::CombView;

fn kingman_pair_distance(c: &mut Criterion) {
    let mut group = c.benchmark_group("kingman_pair_distance");
    group.sample_size(10);
    for &reps in &[256usize, 2048] {
        let work = |_: usize, rng: &mut combkit::SimRng| {
            let comb = sample_kingman_comb(rng, 500).unwrap();
            comb.distance(0.25, 0.75).finite().unwrap()
        };
        group.bench_with_input(BenchmarkId::new("sequential", reps), &reps, |b, &n| {
            b.iter(|| replicate_sequential(1, n, work))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", reps), &reps, |b, &n| {
            b.iter(|| combkit::replicate::replicate_parallel(1, n, work))
        });
    }
    group.finish();
}

fn evolve_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve_step");
    group.sample_size(10);
    let reps = 512usize;
    let work = |_: usize, rng: &mut combkit::SimRng| {
        let start = sample_kingman_comb(rng, 500).unwrap();
        evolve_step(&start, 0.3, 500, rng).unwrap().max_height()
    };
    group.bench_function("sequential", |b| b.iter(|| replicate_sequential(2, reps, work)));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| combkit::replicate::replicate_parallel(2, reps, work))
    });
    group.finish();
}

criterion_group!(benches, kingman_pair_distance, evolve_steps);
criterion_main!(benches);
