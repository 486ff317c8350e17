//! Hot paths: cocycle iteration, polar factorization, cone certification,
//! and CMV truncation with its eigensolve.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use std::hint::black_box;

use qpcocycle::hyperbolicity::{cone_certify, MarginPolicy};
use qpcocycle::lyapunov::{le_iterate, PhaseMode};
use qpcocycle::mat2::polar_decompose;
use qpcocycle::spectra::cmv_truncation;
use qpcocycle_bench::{almost_mathieu, szego_family, verblunsky_chain};

fn bench_iterate(c: &mut Criterion) {
    let fam = almost_mathieu(3.0, 0.0);
    let mut g = c.benchmark_group("iterate");
    g.throughput(Throughput::Elements(10_000));
    g.bench_function("le_iterate_10k", |b| {
        b.iter(|| le_iterate(black_box(&fam), 10_000, PhaseMode::Single(0.0)))
    });
    g.finish();
}

fn bench_polar(c: &mut Criterion) {
    let fam = szego_family(0.7, 0.3);
    let samples: Vec<_> = (0..256).map(|i| fam.evaluate(i as f64 / 256.0)).collect();
    let mut g = c.benchmark_group("polar");
    g.throughput(Throughput::Elements(samples.len() as u64));
    g.bench_function("decompose_256", |b| {
        b.iter(|| {
            for m in &samples {
                let _ = black_box(polar_decompose(black_box(m)));
            }
        })
    });
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let fam = almost_mathieu(2.0, 6.0);
    c.bench_function("cone_certify_256", |b| {
        b.iter(|| cone_certify(black_box(&fam), 256, MarginPolicy::MeasuredLipschitz))
    });
}

fn bench_cmv(c: &mut Criterion) {
    let chain = verblunsky_chain(128);
    c.bench_function("cmv_truncation_eig_128", |b| {
        b.iter_batched(
            || chain.clone(),
            |chain| cmv_truncation(black_box(&chain)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_iterate, bench_polar, bench_certify, bench_cmv);
criterion_main!(benches);
