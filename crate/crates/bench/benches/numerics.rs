use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use qiope::fps::{fps_sqrt, FormalPowerSeries};
use qiope::freefield::{qei_bound, wick_square_bound};
use qiope::kernels::homogeneous_kernel;
use qiope::sampling::{sampling_homogeneous, sampling_spectral, wigner, SamplingOptions, WignerGrid};
use qiope_bench::{complex_g, real_g};

fn sampling(c: &mut Criterion) {
    let (g, h) = (real_g(), complex_g());
    let opts = SamplingOptions::default();
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    for beta in [-1.0, -2.5] {
        group.bench_function(format!("closed_form_real_beta_{beta}"), |b| {
            b.iter(|| sampling_homogeneous(black_box(beta), &g, &opts).unwrap())
        });
        group.bench_function(format!("closed_form_complex_beta_{beta}"), |b| {
            b.iter(|| sampling_homogeneous(black_box(beta), &h, &opts).unwrap())
        });
    }
    let k = homogeneous_kernel(-1.5, Complex64::new(1.0, 0.0));
    group.bench_function("spectral_beta_-1.5", |b| b.iter(|| sampling_spectral(&k, &g, &opts).unwrap()));
    group.bench_function("wigner", |b| b.iter(|| wigner(&h, &WignerGrid::default()).unwrap()));
    group.finish();
}

fn bounds(c: &mut Criterion) {
    let g = real_g();
    c.bench_function("qei_bound_m1", |b| b.iter(|| qei_bound(&g, black_box(1.0)).unwrap()));
    c.bench_function("wick_square_bound_m0", |b| b.iter(|| wick_square_bound(&g, black_box(0.0)).unwrap()));
}

fn series(c: &mut Criterion) {
    let p = FormalPowerSeries::from_integers(&[0, 0, 4, -3, 7, 1, -2, 5, 9, -1, 3, 2, -6]);
    c.bench_function("fps_sqrt_order_12", |b| b.iter(|| fps_sqrt(black_box(&p)).unwrap()));
}

criterion_group!(benches, sampling, bounds, series);
criterion_main!(benches);
