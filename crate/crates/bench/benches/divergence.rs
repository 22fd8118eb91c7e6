use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;
use std::hint::black_box;
use swapaudit::divergence::DivergenceKind;
use swapaudit::rng::rng_from_seed;
use swapaudit::PredictionDistribution;

fn random_dist(rng: &mut impl Rng, bins: usize) -> PredictionDistribution {
    let raw: Vec<f64> = (0..bins).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut masses: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let drift: f64 = 1.0 - masses.iter().sum::<f64>();
    masses[0] += drift;
    PredictionDistribution::from_masses(masses).unwrap()
}

fn divergences(c: &mut Criterion) {
    let mut rng = rng_from_seed(7);
    let mut group = c.benchmark_group("divergence");
    for bins in [10, 100] {
        let p = random_dist(&mut rng, bins);
        let q = random_dist(&mut rng, bins);
        for kind in DivergenceKind::ALL {
            group.bench_with_input(BenchmarkId::new(kind.name(), bins), &bins, |b, _| {
                b.iter(|| kind.compute(black_box(&p), black_box(&q)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, divergences);
criterion_main!(benches);
