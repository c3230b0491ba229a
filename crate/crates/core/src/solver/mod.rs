//! The block coordinate ascent driver and its baselines.

mod baselines;
mod config;
mod driver;
mod sweep;

use thiserror::Error;

use crate::blocks::BlockStructure;
use crate::domain::BoxDomain;
use crate::objectives::{DecomposedObjective, Decomposition, EvalCounters, ObjectiveError};
use crate::search::SearchError;
use crate::surrogate::{SurrogateError, SymmetryGroup};

pub use config::{SolverConfig, SolverMode, DEFAULT_BETA_CYCLE};
pub use sweep::{bca_sweep, SweepEvaluation, SweepOutcome, SweepStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid start point: {0}")]
    InvalidStart(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    /// The full-domain maximin radius dropped to `delta0`.
    DeltaReached,
    BudgetExhausted,
    /// A whole beta cycle produced no feasible search.
    InfeasibleSearch,
    /// A greedy pass made no strict improvement.
    Stationary,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::DeltaReached => "delta-reached",
            TerminationReason::BudgetExhausted => "budget-exhausted",
            TerminationReason::InfeasibleSearch => "infeasible-search",
            TerminationReason::Stationary => "stationary",
        }
    }
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What produced an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    /// Full-domain search.
    Global,
    Subspace {
        sweep: usize,
        block: usize,
    },
    Recombine {
        sweep: usize,
    },
    Greedy,
    Random,
}

/// Search diagnostics for a search-produced point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchTrace {
    /// The cycle's beta.
    pub beta: f64,
    /// After any halving.
    pub beta_used: f64,
    /// Maximin radius of the searched space.
    pub delta: f64,
    /// Distance to the nearest previous point at selection time.
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
    /// Latest full-domain maximin radius when the entry was recorded.
    pub delta_after: f64,
    pub phase: Phase,
    /// Sequential evaluation round; concurrent evaluations share a round.
    pub round: usize,
    pub sigma_calls: usize,
    pub search: Option<SearchTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub history: Vec<HistoryEntry>,
    /// Counts accrued during this run.
    pub counters: EvalCounters,
    pub termination: TerminationReason,
    pub sequential_rounds: usize,
    pub delta_final: f64,
    pub infeasible_searches: usize,
    pub sweeps: usize,
}

impl SolverResult {
    pub fn evals(&self) -> usize {
        self.history.len()
    }

    /// Evaluations needed to first reach `threshold`.
    pub fn evals_to_reach(&self, threshold: f64) -> Option<usize> {
        self.history
            .iter()
            .position(|h| h.value >= threshold)
            .map(|i| i + 1)
    }
}

/// `x0` plus one offset point per coordinate.
///
/// Offsets are `simplex_scale * range_i`, clamped into the domain; when
/// clamping lands back on `x0` the offset flips sign.
pub fn initialize(
    domain: &BoxDomain,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<Vec<Vec<f64>>, SolverError> {
    if x0.len() != domain.dim() {
        return Err(SolverError::InvalidStart(format!(
            "start has {} coordinates, domain has {}",
            x0.len(),
            domain.dim()
        )));
    }
    if !domain.contains(x0) {
        return Err(SolverError::InvalidStart(
            "start lies outside the domain".into(),
        ));
    }
    let mut points = vec![x0.to_vec()];
    for i in 0..domain.dim() {
        let step = config.simplex_scale * domain.range(i);
        let (lo, hi) = (domain.lower()[i], domain.upper()[i]);
        let mut p = x0.to_vec();
        p[i] = (x0[i] + step).min(hi);
        if p[i] == x0[i] {
            p[i] = (x0[i] - step).max(lo);
        }
        points.push(p);
    }
    Ok(points)
}

/// Whether every block optimum lies within `stationarity_tol * diameter` of
/// the base point's block.
pub fn is_stationary(
    base: &[f64],
    block_optima: &[Vec<f64>],
    blocks: &BlockStructure,
    domain: &BoxDomain,
    config: &SolverConfig,
) -> bool {
    let tol = config.stationarity_tol * domain.diameter();
    block_optima.iter().enumerate().all(|(m, t)| {
        let b = blocks.slice(base, m);
        t.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
            <= tol
    })
}

/// Maximizes `objective` from `x0`.
///
/// `group` drives symmetric closure of the surrogate; pass
/// [`SymmetryGroup::identity`] to disable it.
pub fn solve<D: Decomposition>(
    objective: &DecomposedObjective<D>,
    group: &SymmetryGroup,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    config.validate(objective.dim())?;
    group
        .check_blocks(objective.blocks())
        .map_err(SolverError::Surrogate)?;
    match config.mode {
        SolverMode::RbfBca | SolverMode::RbfGlobal => {
            driver::solve_rbf(objective, group, x0, config)
        }
        SolverMode::GreedyCoordinate => baselines::greedy(objective, x0, config),
        SolverMode::Random => baselines::random(objective, x0, config),
    }
}

fn counter_delta(before: &EvalCounters, after: &EvalCounters) -> EvalCounters {
    EvalCounters {
        full_evals: after.full_evals - before.full_evals,
        sigma_calls: after
            .sigma_calls
            .iter()
            .zip(&before.sigma_calls)
            .map(|(a, b)| a - b)
            .collect(),
        fuse_calls: after.fuse_calls - before.fuse_calls,
    }
}

/// Bookkeeping shared by all modes.
pub(crate) struct Recorder {
    history: Vec<HistoryEntry>,
    max_evals: usize,
    rounds: usize,
    delta: f64,
    best: Option<(Vec<f64>, f64)>,
}

impl Recorder {
    fn new(max_evals: usize) -> Self {
        Self {
            history: Vec::new(),
            max_evals,
            rounds: 0,
            delta: f64::INFINITY,
            best: None,
        }
    }

    fn len(&self) -> usize {
        self.history.len()
    }

    fn remaining(&self) -> usize {
        self.max_evals - self.history.len()
    }

    /// Opens a new sequential round and returns its index.
    fn next_round(&mut self) -> usize {
        self.rounds += 1;
        self.rounds
    }

    fn record(
        &mut self,
        point: Vec<f64>,
        value: f64,
        phase: Phase,
        sigma_calls: usize,
        search: Option<SearchTrace>,
        round: usize,
    ) {
        debug_assert!(self.history.len() < self.max_evals);
        if self.best.as_ref().map_or(true, |(_, v)| value > *v) {
            self.best = Some((point.clone(), value));
        }
        self.history.push(HistoryEntry {
            index: self.history.len(),
            point,
            value,
            delta_after: self.delta,
            phase,
            round,
            sigma_calls,
            search,
        });
    }

    fn finish(
        self,
        counters: EvalCounters,
        termination: TerminationReason,
        delta_final: f64,
        infeasible_searches: usize,
        sweeps: usize,
    ) -> SolverResult {
        let (best_point, best_value) = self.best.expect("at least one evaluation");
        SolverResult {
            best_point,
            best_value,
            history: self.history,
            counters,
            termination,
            sequential_rounds: self.rounds,
            delta_final,
            infeasible_searches,
            sweeps,
        }
    }
}
