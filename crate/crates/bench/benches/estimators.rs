use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rocsim::risk::{negative_risk_complete, negative_risk_pair_sampled, negative_risk_tuple_sampled};
use rocsim::synth::{sample_mixture, MixtureParams};
use rocsim::SimilarityModel;
use std::hint::black_box;

fn estimators(c: &mut Criterion) {
    let params = MixtureParams::default();
    let model = SimilarityModel::mahalanobis(DMatrix::identity(params.dim, params.dim)).unwrap();
    let mut group = c.benchmark_group("negative_risk");
    for n in [250, 1000] {
        let ds = sample_mixture(&params, n, 1).unwrap();
        group.bench_with_input(BenchmarkId::new("complete", n), &ds, |b, ds| {
            b.iter(|| negative_risk_complete(black_box(ds), &model).unwrap())
        });
        let budget = n as u64;
        group.bench_with_input(BenchmarkId::new("pairs", n), &ds, |b, ds| {
            b.iter(|| negative_risk_pair_sampled(black_box(ds), &model, budget, 3).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tuples", n), &ds, |b, ds| {
            b.iter(|| negative_risk_tuple_sampled(black_box(ds), &model, budget, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, estimators);
criterion_main!(benches);
