//! The surrogate-driven modes.

use super::sweep::{absorb, bca_sweep, trace, SweepStep};
use super::{
    counter_delta, initialize, is_stationary, Phase, Recorder, SolverConfig, SolverError,
    SolverMode, SolverResult, TerminationReason,
};
use crate::objectives::{DecomposedObjective, Decomposition};
use crate::rng::mix;
use crate::search::{compute_delta, search_next, SearchError, SearchSpace};
use crate::surrogate::{EvaluationPoint, SurrogateState, SymmetryGroup};

const DELTA_TAG: u64 = 0xDE17A;
const SEARCH_TAG: u64 = 0x5EA2C4;
const SWEEP_TAG: u64 = 0x5EE9;

pub(super) fn solve_rbf<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    group: &SymmetryGroup,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    let domain = objective.domain();
    let blocks = objective.blocks().clone();
    let m = blocks.len();
    let before = objective.counters();
    let mut rec = Recorder::new(config.max_evals);
    let mut cache = objective.new_cache();

    let mut seeds = Vec::new();
    for p in initialize(domain, x0, config)? {
        let (value, sigma) = objective.eval_traced(&p, None, &mut cache)?;
        let round = rec.next_round();
        rec.record(p.clone(), value, Phase::Init, sigma, None, round);
        seeds.push(EvaluationPoint::new(p, value));
    }
    let mut state = SurrogateState::new(
        &seeds,
        blocks.clone(),
        group.clone(),
        domain.diameter(),
        config.closure_cap,
    )?;

    let full = SearchSpace::full(domain);
    let mut delta_counter = 0u64;
    let mut fresh_delta = |state: &SurrogateState| {
        delta_counter += 1;
        compute_delta(
            &full,
            state.centers(),
            mix(&[config.seed, DELTA_TAG, delta_counter]),
        )
    };
    let mut delta = fresh_delta(&state)?;
    rec.delta = delta;

    let mut search_index = 0u64;
    let mut sweep_index = 0usize;
    let mut infeasible = 0usize;
    let termination = 'outer: loop {
        if delta <= config.delta0 {
            break TerminationReason::DeltaReached;
        }
        let evals_before = rec.len();
        for &beta in &config.beta_cycle {
            if rec.remaining() == 0 {
                break 'outer TerminationReason::BudgetExhausted;
            }
            search_index += 1;
            let seed = mix(&[config.seed, SEARCH_TAG, search_index]);
            let out = match search_next(&full, state.surrogate(), state.centers(), beta, seed) {
                Ok(out) => out,
                Err(SearchError::Infeasible { .. }) => {
                    infeasible += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            rec.delta = out.delta;
            let (value, sigma) = objective.eval_traced(&out.point, None, &mut cache)?;
            let round = rec.next_round();
            rec.record(
                out.point.clone(),
                value,
                Phase::Global,
                sigma,
                Some(trace(beta, &out)),
                round,
            );
            absorb(&mut state, &out.point, value)?;

            if config.mode != SolverMode::RbfBca {
                continue;
            }
            let mut base = out.point;
            for _ in 0..config.inner_sweeps(m) {
                if rec.remaining() == 0 {
                    break;
                }
                sweep_index += 1;
                let sweep_seed = mix(&[config.seed, SWEEP_TAG, sweep_index as u64]);
                let outcome = bca_sweep(
                    objective,
                    &mut state,
                    &mut cache,
                    &base,
                    beta,
                    config,
                    sweep_seed,
                    rec.remaining(),
                )?;
                infeasible += outcome.infeasible;
                let first_round = rec.rounds + 1;
                for e in outcome.evaluations {
                    let phase = match e.step {
                        SweepStep::Block(block) => Phase::Subspace {
                            sweep: sweep_index,
                            block,
                        },
                        SweepStep::Recombine => Phase::Recombine { sweep: sweep_index },
                    };
                    rec.record(
                        e.point,
                        e.value,
                        phase,
                        e.sigma_calls,
                        e.search,
                        first_round + e.round,
                    );
                }
                rec.rounds += outcome.rounds;
                if outcome.budget_exhausted {
                    break;
                }
                let stationary =
                    is_stationary(&base, &outcome.block_optima, &blocks, domain, config);
                base = outcome.recombined;
                if stationary {
                    break;
                }
            }
        }
        if rec.len() == evals_before {
            break TerminationReason::InfeasibleSearch;
        }
        delta = fresh_delta(&state)?;
        rec.delta = delta;
    };
    let delta_final = rec.delta;
    let counters = counter_delta(&before, &objective.counters());
    Ok(rec.finish(counters, termination, delta_final, infeasible, sweep_index))
}
