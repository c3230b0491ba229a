//! Greedy coordinate search and uniform random sampling.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    counter_delta, Phase, Recorder, SolverConfig, SolverError, SolverResult, TerminationReason,
};
use crate::objectives::{DecomposedObjective, Decomposition, ObservationCache};
use crate::rng::{mix, rng_from};
use crate::search::{compute_delta, SearchSpace};

const SCAN_POINTS: usize = 16;
const GOLDEN_ITERS: usize = 20;
const GREEDY_TAG: u64 = 0x62EED;
const RANDOM_TAG: u64 = 0x2A2D;

struct Greedy<'a, D: Decomposition> {
    objective: &'a DecomposedObjective<D>,
    cache: ObservationCache<D::Observation>,
    rec: Recorder,
}

impl<D: Decomposition> Greedy<'_, D> {
    /// Evaluates `x`. Blocks that differ from the cached point are observed
    /// afresh, so moving back to the incumbent after a line search costs one
    /// observation on the next call.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>, SolverError> {
        if self.rec.remaining() == 0 {
            return Ok(None);
        }
        let (value, sigma) = self.objective.eval_traced(x, None, &mut self.cache)?;
        let round = self.rec.next_round();
        self.rec
            .record(x.to_vec(), value, Phase::Greedy, sigma, None, round);
        Ok(Some(value))
    }

    /// Line search along coordinate `i`. Moves `x` only on strict improvement;
    /// ties go to the candidate nearest the current value. Returns `None`
    /// once the budget runs out.
    fn line_search(
        &mut self,
        x: &mut [f64],
        f: &mut f64,
        i: usize,
    ) -> Result<Option<bool>, SolverError> {
        let lo = self.objective.domain().lower()[i];
        let hi = self.objective.domain().upper()[i];
        let t0 = x[i];
        let mut trial = x.to_vec();
        let mut best = (t0, *f);
        let better = |cand: (f64, f64), best: (f64, f64)| {
            cand.1 > best.1 || (cand.1 == best.1 && (cand.0 - t0).abs() < (best.0 - t0).abs())
        };

        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64)
            .collect();
        let mut best_k = None;
        for (k, &t) in grid.iter().enumerate() {
            if t == t0 {
                continue;
            }
            trial[i] = t;
            let Some(v) = self.eval(&trial)? else {
                return self.finish_move(x, f, i, best, None);
            };
            if better((t, v), best) {
                best = (t, v);
                best_k = Some(k);
            }
        }

        // Golden-section refinement inside the bracket around the best node.
        if let Some(k) = best_k {
            let mut a = grid[k.saturating_sub(1)];
            let mut b = grid[(k + 1).min(SCAN_POINTS - 1)];
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - ratio * (b - a);
            let mut d = a + ratio * (b - a);
            trial[i] = c;
            let Some(mut fc) = self.eval(&trial)? else {
                return self.finish_move(x, f, i, best, None);
            };
            trial[i] = d;
            let Some(mut fd) = self.eval(&trial)? else {
                return self.finish_move(x, f, i, best, None);
            };
            for (t, v) in [(c, fc), (d, fd)] {
                if better((t, v), best) {
                    best = (t, v);
                }
            }
            for _ in 0..GOLDEN_ITERS {
                let t;
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    t = c;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    t = d;
                }
                trial[i] = t;
                let Some(v) = self.eval(&trial)? else {
                    return self.finish_move(x, f, i, best, None);
                };
                if t == c {
                    fc = v;
                } else {
                    fd = v;
                }
                if better((t, v), best) {
                    best = (t, v);
                }
            }
        }
        let moved = best.1 > *f;
        self.finish_move(x, f, i, best, Some(moved))
    }

    /// Commits the best candidate if it strictly improves.
    fn finish_move(
        &mut self,
        x: &mut [f64],
        f: &mut f64,
        i: usize,
        best: (f64, f64),
        outcome: Option<bool>,
    ) -> Result<Option<bool>, SolverError> {
        if best.1 > *f {
            x[i] = best.0;
            *f = best.1;
        }
        Ok(outcome)
    }
}

pub(super) fn greedy<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    super::initialize(objective.domain(), x0, config)?;
    let before = objective.counters();
    let mut g = Greedy {
        objective,
        cache: objective.new_cache(),
        rec: Recorder::new(config.max_evals),
    };
    let mut x = x0.to_vec();
    let mut f = g.eval(&x)?.expect("budget validated");
    let mut rng = rng_from(mix(&[config.seed, GREEDY_TAG]));
    let mut order: Vec<usize> = (0..x.len()).collect();
    let termination = 'outer: loop {
        order.shuffle(&mut rng);
        let mut improved = false;
        for &i in &order {
            match g.line_search(&mut x, &mut f, i)? {
                Some(moved) => improved |= moved,
                None => break 'outer TerminationReason::BudgetExhausted,
            }
        }
        if !improved {
            break TerminationReason::Stationary;
        }
        if g.rec.remaining() == 0 {
            break TerminationReason::BudgetExhausted;
        }
    };
    let delta_final = final_delta(objective, &g.rec, config)?;
    let counters = counter_delta(&before, &objective.counters());
    Ok(g.rec.finish(counters, termination, delta_final, 0, 0))
}

pub(super) fn random<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    super::initialize(objective.domain(), x0, config)?;
    let before = objective.counters();
    let domain = objective.domain();
    let mut rec = Recorder::new(config.max_evals);
    let mut cache = objective.new_cache();
    let mut rng = rng_from(mix(&[config.seed, RANDOM_TAG]));
    let mut x = x0.to_vec();
    while rec.remaining() > 0 {
        let (value, sigma) = objective.eval_traced(&x, None, &mut cache)?;
        let round = rec.next_round();
        rec.record(x.clone(), value, Phase::Random, sigma, None, round);
        x = domain
            .lower()
            .iter()
            .zip(domain.upper())
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect();
    }
    let delta_final = final_delta(objective, &rec, config)?;
    let counters = counter_delta(&before, &objective.counters());
    Ok(rec.finish(
        counters,
        TerminationReason::BudgetExhausted,
        delta_final,
        0,
        0,
    ))
}

fn final_delta<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    rec: &Recorder,
    config: &SolverConfig,
) -> Result<f64, SolverError> {
    let points: Vec<&[f64]> = rec.history.iter().map(|h| h.point.as_slice()).collect();
    Ok(compute_delta(
        &SearchSpace::full(objective.domain()),
        &points,
        mix(&[config.seed, 0xF17A1]),
    )?)
}
