//! Rayon-backed grid map vs. the always-sequential loop, on the three
//! workloads that dominate real runs: kernel evaluation across the grid,
//! contour quadrature, and 2-D convolution panels. Build with
//! `--no-default-features` to measure the sequential build end to end.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rhocalc::embed::mollifier;
use rhocalc::par::{map_indexed, map_indexed_seq};
use rhocalc::quad::{adaptive_gl_2d, gl_panel};
use rhocalc::wide::WideComplex;
use rhocalc::Gauge;

fn kernel_grid(c: &mut Criterion) {
    let mu = mollifier("fejer").unwrap();
    let gauge = Gauge::standard();
    let n = gauge.len();
    let work = |k: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..200 {
            let t = -3.0 + 6.0 * (i as f64) / 199.0 + gauge.eps(k);
            let v = mu.profile_deriv(4, WideComplex::from_f64(t)).unwrap();
            acc += v.to_complex_lossy().re;
        }
        acc
    };
    let mut g = c.benchmark_group("kernel_grid");
    g.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(n, &work))));
    g.bench_function("sequential", |b| {
        b.iter(|| black_box(map_indexed_seq(n, &work)))
    });
    g.finish();
}

fn contour_grid(c: &mut Criterion) {
    let gauge = Gauge::standard();
    let n = gauge.len();
    let work = |k: usize| -> Complex64 {
        let r = 0.5 + gauge.eps(k);
        let f = |t: f64| {
            let z = Complex64::new(t.cos(), t.sin()) * r;
            (z * z + Complex64::new(1.0, 0.25)).exp() / z
        };
        gl_panel(&f, 0.0, std::f64::consts::TAU, 256)
    };
    let mut g = c.benchmark_group("contour_grid");
    g.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(n, &work))));
    g.bench_function("sequential", |b| {
        b.iter(|| black_box(map_indexed_seq(n, &work)))
    });
    g.finish();
}

fn convolution_grid(c: &mut Criterion) {
    let gauge = Gauge::standard();
    let n = gauge.len();
    let work = |k: usize| -> Complex64 {
        let rho = gauge.log_rho(k).exp();
        let f = |x: f64, y: f64| -> Complex64 {
            let d = 1.0 - x * x - y * y;
            if d <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let b = (1.0 - 1.0 / d).exp();
            let g = (-(x - 0.3 * rho).powi(2) - (y + 0.1 * rho).powi(2)).exp();
            Complex64::new(b * g, 0.0)
        };
        adaptive_gl_2d(&f, -1.0, 1.0, -1.0, 1.0, 1e-6).unwrap().value
    };
    let mut g = c.benchmark_group("convolution_grid");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(map_indexed(n, &work))));
    g.bench_function("sequential", |b| {
        b.iter(|| black_box(map_indexed_seq(n, &work)))
    });
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = kernel_grid, contour_grid, convolution_grid
}
criterion_main!(benches);
