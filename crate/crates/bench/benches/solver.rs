use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbfbca::objectives::{coverage_objective, pyramid_peak, CoverageScene, Rect};
use rbfbca::{search_next, EvaluationPoint, SearchSpace, Surrogate};
use std::hint::black_box;

fn samples(n: usize, k: usize, seed: u64) -> Vec<EvaluationPoint> {
    let f = pyramid_peak(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let v = f.eval_fresh(&x).unwrap();
            EvaluationPoint::new(x, v)
        })
        .collect()
}

fn fit(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    for k in [50, 200, 500] {
        let pts = samples(4, k, 1);
        g.bench_with_input(BenchmarkId::from_parameter(k), &pts, |b, pts| {
            b.iter(|| Surrogate::fit(black_box(pts)).unwrap())
        });
    }
    g.finish();
}

fn evaluate(c: &mut Criterion) {
    let s = Surrogate::fit(&samples(4, 500, 2)).unwrap();
    let x = [1.0, -2.0, 3.0, 0.5];
    c.bench_function("evaluate/500", |b| {
        b.iter(|| s.evaluate(black_box(&x)).unwrap())
    });
    c.bench_function("gradient/500", |b| {
        b.iter(|| s.gradient(black_box(&x)).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let f = pyramid_peak(3);
    let pts = samples(3, 100, 3);
    let s = Surrogate::fit(&pts).unwrap();
    let previous: Vec<Vec<f64>> = pts.iter().map(|p| p.point.clone()).collect();
    let space = SearchSpace::full(f.domain());
    c.bench_function("search_next/100", |b| {
        b.iter(|| search_next(&space, &s, &previous, 0.6, 7).unwrap())
    });
}

fn coverage(c: &mut Criterion) {
    let scene = CoverageScene {
        width: 10.0,
        height: 10.0,
        obstacles: vec![Rect::new(2.5, 5.5, 4.5, 7.5), Rect::new(5.5, 2.0, 7.0, 4.5)],
        resolution: 2.0,
        fov_half_angle: 35f64.to_radians(),
        range: 7.0,
        cameras: 4,
    };
    let f = coverage_objective(scene).unwrap();
    let x = [
        0.0, 0.0, 0.785, 10.0, 10.0, 3.93, 10.0, 0.0, 2.36, 0.0, 10.0, 5.5,
    ];
    c.bench_function("coverage/full", |b| {
        b.iter(|| f.eval_fresh(black_box(&x)).unwrap())
    });
    let mut cache = f.new_cache();
    f.eval(&x, None, &mut cache).unwrap();
    let mut y = x;
    c.bench_function("coverage/one_block", |b| {
        b.iter(|| {
            y[0] = if y[0] == 0.0 { 0.5 } else { 0.0 };
            f.eval(black_box(&y), Some(0), &mut cache).unwrap()
        })
    });
}

criterion_group!(benches, fit, evaluate, search, coverage);
criterion_main!(benches);
