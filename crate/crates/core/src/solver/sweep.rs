//! One block coordinate sweep: a subspace search per block, then the
//! recombined point.

use super::{SearchTrace, SolverConfig, SolverError};
use crate::objectives::{DecomposedObjective, Decomposition, ObservationCache};
use crate::rng::mix;
use crate::search::{search_next, SearchError, SearchOutcome, SearchSpace};
use crate::surrogate::{EvaluationPoint, SurrogateError, SurrogateState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStep {
    Block(usize),
    Recombine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEvaluation {
    pub step: SweepStep,
    pub point: Vec<f64>,
    pub value: f64,
    pub sigma_calls: usize,
    pub search: Option<SearchTrace>,
    /// Zero-based sequential round within the sweep.
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Block values `t_m`; the base block when a search was skipped.
    pub block_optima: Vec<Vec<f64>>,
    /// Block `m` taken from `t_m` for every `m`.
    pub recombined: Vec<f64>,
    pub evaluations: Vec<SweepEvaluation>,
    pub rounds: usize,
    pub budget_exhausted: bool,
    pub infeasible: usize,
}

/// Runs one sweep from `base`, evaluating every block winner and the
/// recombined point and feeding each into `state`.
///
/// `cache` must hold the observations of `base`. At most `budget`
/// evaluations are made. Block `m` searches with seed `mix([seed, m])`.
#[allow(clippy::too_many_arguments)]
pub fn bca_sweep<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    state: &mut SurrogateState,
    cache: &mut ObservationCache<D::Observation>,
    base: &[f64],
    beta: f64,
    config: &SolverConfig,
    seed: u64,
    budget: usize,
) -> Result<SweepOutcome, SolverError> {
    if config.parallel_sweep {
        parallel(objective, state, cache, base, beta, config, seed, budget)
    } else {
        serial(objective, state, cache, base, beta, seed, budget)
    }
}

fn block_search(
    objective_domain: &crate::domain::BoxDomain,
    state: &SurrogateState,
    base: &[f64],
    m: usize,
    beta: f64,
    seed: u64,
) -> Result<Option<SearchOutcome>, SolverError> {
    let space = SearchSpace::subspace(objective_domain, state.blocks(), m, base)?;
    match search_next(
        &space,
        state.surrogate(),
        state.centers(),
        beta,
        mix(&[seed, m as u64]),
    ) {
        Ok(out) => Ok(Some(out)),
        Err(SearchError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn trace(beta: f64, out: &SearchOutcome) -> SearchTrace {
    SearchTrace {
        beta,
        beta_used: out.beta_used,
        delta: out.delta,
        min_distance: out.min_distance,
    }
}

/// Feeds a point to the surrogate. A refit that stays degenerate after
/// refactorization leaves the surrogate as it was; the run continues.
pub(crate) fn absorb(
    state: &mut SurrogateState,
    point: &[f64],
    value: f64,
) -> Result<(), SolverError> {
    match state.update(EvaluationPoint::new(point.to_vec(), value)) {
        Ok(_) | Err(SurrogateError::DegenerateGeometry { .. }) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn serial<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    state: &mut SurrogateState,
    cache: &mut ObservationCache<D::Observation>,
    base: &[f64],
    beta: f64,
    seed: u64,
    budget: usize,
) -> Result<SweepOutcome, SolverError> {
    let blocks = objective.blocks().clone();
    let mut current = base.to_vec();
    let mut evaluations = Vec::new();
    let mut infeasible = 0;
    let mut exhausted = false;
    for m in 0..blocks.len() {
        if evaluations.len() >= budget {
            exhausted = true;
            break;
        }
        let Some(out) = block_search(objective.domain(), state, &current, m, beta, seed)? else {
            infeasible += 1;
            continue;
        };
        let (value, sigma_calls) = objective.eval_traced(&out.point, Some(m), cache)?;
        absorb(state, &out.point, value)?;
        current.clone_from(&out.point);
        evaluations.push(SweepEvaluation {
            step: SweepStep::Block(m),
            point: out.point.clone(),
            value,
            sigma_calls,
            search: Some(trace(beta, &out)),
            round: evaluations.len(),
        });
    }
    let block_optima = (0..blocks.len())
        .map(|m| blocks.slice(&current, m).to_vec())
        .collect();
    let mut rounds = evaluations.len();
    if !exhausted && evaluations.len() < budget {
        let (value, sigma_calls) = objective.eval_traced(&current, None, cache)?;
        absorb(state, &current, value)?;
        evaluations.push(SweepEvaluation {
            step: SweepStep::Recombine,
            point: current.clone(),
            value,
            sigma_calls,
            search: None,
            round: rounds,
        });
        rounds += 1;
    } else {
        exhausted = true;
    }
    Ok(SweepOutcome {
        block_optima,
        recombined: current,
        evaluations,
        rounds,
        budget_exhausted: exhausted,
        infeasible,
    })
}

struct BlockResult<T> {
    block: usize,
    out: SearchOutcome,
    value: f64,
    sigma_calls: usize,
    cache: ObservationCache<T>,
}

#[allow(clippy::too_many_arguments)]
fn parallel<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    state: &mut SurrogateState,
    cache: &mut ObservationCache<D::Observation>,
    base: &[f64],
    beta: f64,
    config: &SolverConfig,
    seed: u64,
    budget: usize,
) -> Result<SweepOutcome, SolverError> {
    let blocks = objective.blocks().clone();
    let m_total = blocks.len();
    let active = m_total.min(budget);
    let workers = config.threads.min(active).max(1);
    let frozen: &SurrogateState = state;
    let main_cache: &ObservationCache<D::Observation> = cache;

    let run_block = |m: usize| -> Result<Option<BlockResult<D::Observation>>, SolverError> {
        let Some(out) = block_search(objective.domain(), frozen, base, m, beta, seed)? else {
            return Ok(None);
        };
        let mut local = main_cache.clone();
        let (value, sigma_calls) = objective.eval_traced(&out.point, Some(m), &mut local)?;
        Ok(Some(BlockResult {
            block: m,
            out,
            value,
            sigma_calls,
            cache: local,
        }))
    };

    let mut results: Vec<Option<BlockResult<D::Observation>>> = Vec::with_capacity(active);
    let mut batches = 0;
    for chunk in (0..active).collect::<Vec<_>>().chunks(workers) {
        batches += 1;
        if workers == 1 {
            for &m in chunk {
                results.push(run_block(m)?);
            }
            continue;
        }
        let batch: Vec<Result<_, SolverError>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&m| {
                    let run_block = &run_block;
                    s.spawn(move || run_block(m))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        for r in batch {
            results.push(r?);
        }
    }

    // Deterministic merge in block order.
    let mut recombined = base.to_vec();
    let mut evaluations = Vec::new();
    let mut infeasible = 0;
    let mut any = false;
    for (slot, r) in results.into_iter().enumerate() {
        let Some(r) = r else {
            infeasible += 1;
            continue;
        };
        any = true;
        debug_assert_eq!(slot, r.block);
        absorb(state, &r.out.point, r.value)?;
        cache.take_block(&r.cache, r.block);
        let span = blocks.span(r.block);
        recombined[span.clone()].copy_from_slice(&r.out.point[span]);
        evaluations.push(SweepEvaluation {
            step: SweepStep::Block(r.block),
            point: r.out.point.clone(),
            value: r.value,
            sigma_calls: r.sigma_calls,
            search: Some(trace(beta, &r.out)),
            round: r.block / workers,
        });
    }
    let block_optima = (0..m_total)
        .map(|m| blocks.slice(&recombined, m).to_vec())
        .collect();
    let mut rounds = if any { batches } else { 0 };
    let mut exhausted = active < m_total;
    if !exhausted && evaluations.len() < budget {
        let (value, sigma_calls) = objective.eval_traced(&recombined, None, cache)?;
        absorb(state, &recombined, value)?;
        evaluations.push(SweepEvaluation {
            step: SweepStep::Recombine,
            point: recombined.clone(),
            value,
            sigma_calls,
            search: None,
            round: rounds,
        });
        rounds += 1;
    } else {
        exhausted = true;
    }
    Ok(SweepOutcome {
        block_optima,
        recombined,
        evaluations,
        rounds,
        budget_exhausted: exhausted,
        infeasible,
    })
}
