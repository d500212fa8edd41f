use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use stochavg::averaging::average_field;
use stochavg::sde::{simulate_effective, simulate_perturbed, Record, RunParams};
use stochavg::stats::{bl_distance_nd, bl_exact_1d, EmpiricalLaw, ReportOptions};
use stochavg::{AveragingMethod, DriftVariant};
use stochavg_bench::{coupled_ou, scalar_sample, start};

fn distances(c: &mut Criterion) {
    let mut g = c.benchmark_group("bl_exact_1d");
    for n in [500, 4000] {
        let (x, y) = (scalar_sample(n, 0.0), scalar_sample(n, 0.2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| bl_exact_1d(black_box(&x), black_box(&y))));
    }
    g.finish();
    let rows = |shift: f64| -> Vec<Vec<f64>> { scalar_sample(1000, shift).chunks(2).map(<[f64]>::to_vec).collect() };
    let (a, b) = (EmpiricalLaw::from_rows(&rows(0.0)).unwrap(), EmpiricalLaw::from_rows(&rows(0.3)).unwrap());
    let opts = ReportOptions { bootstrap: 0, ..ReportOptions::default() };
    c.bench_function("bl_distance_nd/500x2", |bench| bench.iter(|| bl_distance_nd(black_box(&a), black_box(&b), &opts).unwrap()));
}

fn averaging(c: &mut Criterion) {
    let spec = coupled_ou(0.1);
    let drift = spec.drift(DriftVariant::Full);
    let a = start();
    let mut g = c.benchmark_group("average_field");
    g.bench_function("symbolic", |b| b.iter(|| average_field(&drift, black_box(&a), AveragingMethod::Symbolic).unwrap()));
    g.bench_function("quadrature64", |b| b.iter(|| average_field(&drift, black_box(&a), AveragingMethod::Quadrature { grid: 64 }).unwrap()));
    g.finish();
}

fn integrators(c: &mut Criterion) {
    let spec = coupled_ou(0.05);
    let v0 = start();
    let p = RunParams::new(1.0, 0.01, 256, 1).with_record(Record::Times(vec![1.0]));
    let mut g = c.benchmark_group("simulate_256_paths_100_steps");
    g.sample_size(20);
    g.bench_function("perturbed", |b| b.iter(|| simulate_perturbed(&spec, &v0, &p).unwrap()));
    g.bench_function("effective", |b| b.iter(|| simulate_effective(&spec, DriftVariant::Full, &v0, &p, AveragingMethod::Symbolic).unwrap()));
    g.finish();
}

criterion_group!(benches, distances, averaging, integrators);
criterion_main!(benches);
