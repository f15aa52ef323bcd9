use std::hint::black_box;

use abclab::metrics::KernelSpec;
use abclab::models::{make_linear_gaussian, make_multi_summary, ObservedData};
use abclab::par::Exec;
use abclab::samplers::{adaptive_importance_abc_with, rejection_abc, AbcSetup, AdaptiveConfig, Seed, Tolerance};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn rejection(c: &mut Criterion) {
    let model = make_linear_gaussian(1.0).unwrap();
    let kernel = KernelSpec::uniform();
    let obs = ObservedData::generate(&model, 10_000, 1);
    let proposals = 200_000;
    let mut group = c.benchmark_group("rejection");
    group.throughput(Throughput::Elements(proposals as u64));
    for (label, exec) in POLICIES {
        let setup = AbcSetup::new(&model, &obs.s_obs, 10_000, &kernel).with_exec(exec);
        group.bench_with_input(BenchmarkId::from_parameter(label), &setup, |b, s| {
            b.iter(|| black_box(rejection_abc(s, Tolerance::Quantile(0.01), proposals, Seed::new(3)).unwrap()))
        });
    }
    group.finish();
}

fn adaptive(c: &mut Criterion) {
    let model = make_multi_summary(2).unwrap();
    let kernel = KernelSpec::gaussian();
    let obs = ObservedData::generate(&model, 10_000, 1);
    let cfg = AdaptiveConfig::new(0.1, 4, 20_000).with_final_eps(0.01);
    let mut group = c.benchmark_group("adaptive_importance");
    group.sample_size(10);
    for (label, exec) in POLICIES {
        let setup = AbcSetup::new(&model, &obs.s_obs, 10_000, &kernel).with_exec(exec);
        group.bench_with_input(BenchmarkId::from_parameter(label), &setup, |b, s| {
            b.iter(|| black_box(adaptive_importance_abc_with(s, &cfg, Seed::new(5)).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, rejection, adaptive);
criterion_main!(benches);
