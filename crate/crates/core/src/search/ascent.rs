//! Projected gradient ascent with exclusion balls.

use super::{ProjectedPoints, RestrictedModel, SearchSpace};

const MAX_STEPS: usize = 200;
const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 40;
const PROJECTION_ROUNDS: usize = 8;
/// Stop when a step gains less than this, relative to `1 + |f|`.
const GAIN_TOL: f64 = 1e-10;
/// Stop when a step moves less than this, relative to the space diameter.
const MOVE_TOL: f64 = 1e-7;

pub(crate) struct Exclusion<'a> {
    points: &'a ProjectedPoints,
    radius2: f64,
    /// Squared radius less the feasibility slack.
    accept2: f64,
}

impl<'a> Exclusion<'a> {
    pub(crate) fn new(points: &'a ProjectedPoints, radius: f64, tolerance: f64) -> Self {
        let accept = (radius - tolerance).max(0.0);
        Self {
            points,
            radius2: radius * radius,
            accept2: accept * accept,
        }
    }

    pub(crate) fn feasible(&self, v: &[f64]) -> bool {
        self.radius2 == 0.0 || self.points.min_dist2(v) >= self.accept2
    }

    /// Pushes `v` radially out of every ball it entered, then back into the
    /// box; repeats a few rounds since one push can enter another ball.
    fn project(&self, space: &SearchSpace, v: &mut [f64]) {
        space.clamp_free(v);
        if self.radius2 == 0.0 {
            return;
        }
        for _ in 0..PROJECTION_ROUNDS {
            let mut moved = false;
            for k in 0..self.points.len() {
                let off = self.points.offset[k];
                if off >= self.radius2 {
                    break;
                }
                let c = self.points.free_coords(k);
                let r2: f64 = v.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                if off + r2 >= self.radius2 {
                    continue;
                }
                // Free-space radius that puts the full distance on the sphere.
                let target = (self.radius2 - off).sqrt() * (1.0 + 1e-12);
                let r = r2.sqrt();
                if r > 0.0 {
                    let scale = target / r;
                    for (a, b) in v.iter_mut().zip(c) {
                        *a = b + (*a - b) * scale;
                    }
                } else {
                    v[0] = c[0] + target;
                }
                moved = true;
            }
            space.clamp_free(v);
            if !moved {
                break;
            }
        }
    }
}

/// Polishes `start` (feasible) and returns the final iterate and its value.
/// `length` sets the first trial step; the maximin radius is a good choice.
pub(crate) fn ascend(
    space: &SearchSpace,
    model: &RestrictedModel,
    constraints: &Exclusion,
    start: Vec<f64>,
    length: f64,
) -> (Vec<f64>, f64) {
    let d = start.len();
    let scale = space.diameter();
    let mut x = start;
    let mut grad = vec![0.0; d];
    let mut f = model.value_and_gradient(&x, &mut grad);
    let mut gnorm = norm(&grad);
    if gnorm == 0.0 || !f.is_finite() {
        return (x, f);
    }
    let mut step = length.min(0.1 * scale).max(1e-9 * scale) / gnorm;
    let mut trial = vec![0.0; d];
    for _ in 0..MAX_STEPS {
        let mut accepted = None;
        let mut first_try = true;
        for _ in 0..MAX_BACKTRACKS {
            for ((t, xi), gi) in trial.iter_mut().zip(&x).zip(&grad) {
                *t = xi + step * gi;
            }
            constraints.project(space, &mut trial);
            let moved: f64 = trial
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if moved <= MOVE_TOL * scale {
                // Pinned against the box or an exclusion ball.
                break;
            }
            if constraints.feasible(&trial) {
                let ft = model.value(&trial);
                let ascent: f64 = trial
                    .iter()
                    .zip(&x)
                    .zip(&grad)
                    .map(|((t, xi), gi)| gi * (t - xi))
                    .sum();
                if ft > f && ft >= f + ARMIJO * ascent.max(0.0) {
                    accepted = Some(ft);
                    break;
                }
            }
            step *= SHRINK;
            first_try = false;
            if step * gnorm <= MOVE_TOL * scale {
                break;
            }
        }
        let Some(ft) = accepted else { break };
        let gain = ft - f;
        let moved: f64 = x
            .iter()
            .zip(&trial)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x.copy_from_slice(&trial);
        f = model.value_and_gradient(&x, &mut grad);
        gnorm = norm(&grad);
        if gnorm == 0.0 || gain <= GAIN_TOL * (1.0 + f.abs()) || moved <= MOVE_TOL * scale {
            break;
        }
        if first_try {
            step *= 2.0;
        }
    }
    (x, f)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
