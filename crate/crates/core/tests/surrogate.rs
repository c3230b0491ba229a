use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbfbca::{
    objectives, BlockStructure, EvaluationPoint, Surrogate, SurrogateState, SymmetryGroup,
};

fn random_points(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

fn min_gap(points: &[Vec<f64>], x: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn pyramid_samples(points: Vec<Vec<f64>>) -> Vec<EvaluationPoint> {
    let f = objectives::pyramid_peak(points[0].len());
    points
        .into_iter()
        .map(|p| {
            let v = f.eval_fresh(&p).unwrap();
            EvaluationPoint::new(p, v)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_interpolates_scattered_pyramid_data(seed in any::<u64>(), n in 2usize..=5, extra in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = pyramid_samples(random_points(&mut rng, n, n + 1 + extra));
        let s = Surrogate::fit(&pts).unwrap();
        for p in &pts {
            let got = s.evaluate(&p.point).unwrap();
            prop_assert!((got - p.value).abs() <= 1e-8 * (1.0 + p.value.abs()));
        }
        let max_w = s.weights().iter().fold(0.0f64, |a, w| a.max(w.abs()));
        prop_assert!(s.orthogonality_residual() <= 1e-8 * pts.len() as f64 * max_w.max(1.0));
    }

    #[test]
    fn affine_data_is_reproduced(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slope: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let offset: f64 = rng.random_range(-5.0..5.0);
        let affine = |x: &[f64]| offset + x.iter().zip(&slope).map(|(a, b)| a * b).sum::<f64>();
        let pts: Vec<EvaluationPoint> = random_points(&mut rng, n, n + 10)
            .into_iter()
            .map(|p| {
                let v = affine(&p);
                EvaluationPoint::new(p, v)
            })
            .collect();
        let s = Surrogate::fit(&pts).unwrap();
        let fmax = pts.iter().fold(0.0f64, |a, p| a.max(p.value.abs()));
        prop_assert!(s.weights().iter().all(|w| w.abs() <= 1e-8 * fmax.max(1.0)));
        for x in random_points(&mut rng, n, 100) {
            prop_assert!((s.evaluate(&x).unwrap() - affine(&x)).abs() <= 1e-7);
            for (g, want) in s.gradient(&x).unwrap().iter().zip(&slope) {
                prop_assert!((g - want).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_points(&mut rng, n, n + 15);
        let pts = pyramid_samples(raw.clone());
        let s = Surrogate::fit(&pts).unwrap();
        let mut checked = 0;
        while checked < 50 {
            let x = random_points(&mut rng, n, 1).pop().unwrap();
            if min_gap(&raw, &x) < 1e-2 {
                continue;
            }
            checked += 1;
            let g = s.gradient(&x).unwrap();
            let h = 1e-5 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (s.evaluate(&xp).unwrap() - s.evaluate(&xm).unwrap()) / (2.0 * h);
                prop_assert!((g[i] - fd).abs() <= 1e-4 * gnorm.max(1.0), "{} vs {}", g[i], fd);
            }
        }
    }

    #[test]
    fn updates_keep_interpolating(seed in any::<u64>(), n in 2usize..=4, adds in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = pyramid_samples(random_points(&mut rng, n, n + 1));
        let blocks = BlockStructure::coordinates(n).unwrap();
        let diameter = 20.0 * (n as f64).sqrt();
        let mut state = SurrogateState::new(&init, blocks, SymmetryGroup::identity(n), diameter, 720).unwrap();
        for p in pyramid_samples(random_points(&mut rng, n, adds)) {
            state.update(p).unwrap();
            let s = state.surrogate();
            for c in state.centers() {
                let got = s.evaluate(&c.point).unwrap();
                prop_assert!((got - c.value).abs() <= 1e-8 * (1.0 + c.value.abs()));
            }
        }
    }
}

#[test]
fn closure_surrogate_is_block_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = objectives::subspace_trap(3, 2);
    let group = SymmetryGroup::full(3);
    let blocks = f.blocks().clone();
    let init: Vec<EvaluationPoint> = random_points(&mut rng, 6, 7)
        .into_iter()
        .map(|p| {
            let v = f.eval_fresh(&p).unwrap();
            EvaluationPoint::new(p, v)
        })
        .collect();
    let diameter = f.domain().diameter();
    let mut state =
        SurrogateState::new(&init, blocks.clone(), group.clone(), diameter, 720).unwrap();
    for p in random_points(&mut rng, 6, 10) {
        let v = f.eval_fresh(&p).unwrap();
        state.update(EvaluationPoint::new(p, v)).unwrap();
    }
    let s = state.surrogate();
    for x in random_points(&mut rng, 6, 100) {
        let fx = s.evaluate(&x).unwrap();
        for perm in group.permutations() {
            let px = group.apply(perm, &x, &blocks);
            let fp = s.evaluate(&px).unwrap();
            assert!((fx - fp).abs() <= 1e-7 * (1.0 + fx.abs()), "{fx} vs {fp}");
        }
    }
}
