//! Maximin radius: Latin hypercube candidates, then coordinate-wise ternary
//! polishing of the best one.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{ProjectedPoints, SearchSpace};
use crate::rng::SolverRng;

const CANDIDATES_PER_DIM: usize = 256;
const POLISH_STEPS: usize = 50;
const TERNARY_ITERS: usize = 20;

/// Returns the best free-coordinate point found and its distance to the
/// nearest previous point.
#[allow(clippy::needless_range_loop)]
pub(crate) fn maximin(
    space: &SearchSpace,
    points: &ProjectedPoints,
    rng: &mut SolverRng,
) -> (Vec<f64>, f64) {
    let d = space.free_dim();
    let lo = space.free_lower();
    let hi = space.free_upper();
    let n = CANDIDATES_PER_DIM * d;

    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        columns.push(perm);
    }
    let mut best = vec![0.0; d];
    let mut best_d2 = f64::NEG_INFINITY;
    let mut cand = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            let u = (columns[j][i] as f64 + rng.random::<f64>()) / n as f64;
            cand[j] = lo[j] + (hi[j] - lo[j]) * u;
        }
        let d2 = points.min_dist2(&cand);
        if d2 > best_d2 {
            best_d2 = d2;
            best.copy_from_slice(&cand);
        }
    }

    // Coordinate-wise polishing with a shrinking window.
    let mut width: Vec<f64> = (0..d)
        .map(|j| (hi[j] - lo[j]) * (2.0 / (n as f64).powf(1.0 / d as f64)).min(0.5))
        .collect();
    let mut step = 0;
    while step < POLISH_STEPS {
        let mut improved = false;
        for j in 0..d {
            if step >= POLISH_STEPS {
                break;
            }
            step += 1;
            let a = (best[j] - width[j]).max(lo[j]);
            let b = (best[j] + width[j]).min(hi[j]);
            if let Some((t, d2)) = ternary(&mut best, j, a, b, points) {
                if d2 > best_d2 {
                    best[j] = t;
                    best_d2 = d2;
                    improved = true;
                }
            }
        }
        if !improved {
            for w in width.iter_mut() {
                *w *= 0.5;
            }
            if width
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(w, (l, h))| *w <= 1e-9 * (h - l))
            {
                break;
            }
        }
    }
    (best, best_d2.max(0.0).sqrt())
}

/// Ternary search of `min_dist2` along coordinate `j` in `[a, b]`; the two
/// interval ends are also tried since the objective need not be unimodal.
fn ternary(
    x: &mut [f64],
    j: usize,
    mut a: f64,
    mut b: f64,
    points: &ProjectedPoints,
) -> Option<(f64, f64)> {
    if b <= a {
        return None;
    }
    let keep = x[j];
    let eval = |x: &mut [f64], t: f64| {
        x[j] = t;
        points.min_dist2(x)
    };
    let mut best = (a, eval(x, a));
    let end = (b, eval(x, b));
    if end.1 > best.1 {
        best = end;
    }
    for _ in 0..TERNARY_ITERS {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        let f1 = eval(x, m1);
        let f2 = eval(x, m2);
        if f1 > best.1 {
            best = (m1, f1);
        }
        if f2 > best.1 {
            best = (m2, f2);
        }
        if f1 < f2 {
            a = m1;
        } else {
            b = m2;
        }
    }
    x[j] = keep;
    Some(best)
}
