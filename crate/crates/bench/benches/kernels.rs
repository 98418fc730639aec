use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hqam_bench::scenario;
use hqam_core::ber::nakagami_avg_q;
use hqam_core::hqam::MapDetector;
use hqam_core::power::solve_p_star;
use hqam_core::rng::seeded;
use hqam_core::special::{gaussian_q, hyp2f1_special, lambert_w0};
use hqam_core::{Decision, HqamConstellation};
use num_complex::Complex64;
use rand::Rng;

fn special(c: &mut Criterion) {
    let xs: Vec<f64> = (0..256).map(|k| -8.0 + 16.0 * f64::from(k) / 255.0).collect();
    c.bench_function("gaussian_q/256", |b| {
        b.iter(|| xs.iter().map(|&x| gaussian_q(black_box(x))).sum::<f64>())
    });
    c.bench_function("lambert_w0/256", |b| {
        b.iter(|| xs.iter().map(|&x| lambert_w0(black_box(x.exp())).unwrap()).sum::<f64>())
    });
    c.bench_function("hyp2f1_special", |b| {
        b.iter(|| hyp2f1_special(black_box(1.7), black_box(0.8)).unwrap())
    });
    c.bench_function("nakagami_avg_q", |b| {
        b.iter(|| nakagami_avg_q(black_box(3.2), black_box(1.7)).unwrap())
    });
}

fn detector(c: &mut Criterion) {
    let sc = scenario(0.9, 0.1, 2.0);
    let con = HqamConstellation::new(2.0, 4.0).unwrap();
    let det = MapDetector::new(&con, Decision::Busy, &sc.sensing, &sc.env).unwrap();
    let mut rng = seeded(7);
    let h = Complex64::new(0.8, -0.3);
    let ys: Vec<Complex64> = (0..1024)
        .map(|_| h * con.modulate(rng.random_range(0..16)) + Complex64::new(rng.random(), rng.random()))
        .collect();
    c.bench_function("map_detect/1024", |b| {
        b.iter(|| ys.iter().map(|&y| det.detect(black_box(y), h).unwrap() as u32).sum::<u32>())
    });
}

fn kkt(c: &mut Criterion) {
    let sc = scenario(0.9, 0.1, 1.0);
    c.bench_function("solve_p_star", |b| {
        b.iter(|| solve_p_star(&sc, Decision::Idle, black_box(0.01), black_box(1.3), 0.5).unwrap())
    });
}

criterion_group!(benches, special, detector, kkt);
criterion_main!(benches);
