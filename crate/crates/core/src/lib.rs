//! Derivative-free global maximization of expensive, block-structured
//! black-box objectives.
//!
//! The solver couples three pieces:
//!
//! * a thin plate spline [surrogate](surrogate) with a linear tail that
//!   interpolates every evaluated point (optionally together with its images
//!   under a block-permutation symmetry),
//! * an exclusion-area [search](search) that maximizes the surrogate while
//!   keeping a distance of `beta * delta` from all previous points, where
//!   `delta` is the maximin radius of the search space,
//! * a block coordinate ascent [driver](solver) that alternates full-domain
//!   steps with per-block subspace sweeps.
//!
//! Objectives are expressed as [`DecomposedObjective`]s: one observation per
//! block followed by a fusion step, so that a sweep that changes one block only
//! recomputes that block's observation.
//!
//! ```
//! use rbfbca::{objectives, solve, SolverConfig, SymmetryGroup};
//!
//! let objective = objectives::pyramid_peak(2);
//! let mut config = SolverConfig::synthetic();
//! config.max_evals = 120;
//! let result = solve(
//!     &objective,
//!     &SymmetryGroup::identity(2),
//!     &[5.0, 6.0],
//!     &config,
//! )
//! .unwrap();
//! assert!(result.best_value > -7.0);
//! assert!(result.history.len() <= 120);
//! ```

pub mod blocks;
pub mod domain;
pub mod objectives;
pub mod rng;
pub mod search;
pub mod solver;
pub mod surrogate;

pub use blocks::BlockStructure;
pub use domain::BoxDomain;
pub use objectives::{
    DecomposedObjective, Decomposition, EvalCounters, ObjectiveError, ObservationCache,
};
pub use search::{compute_delta, search_next, SearchError, SearchOutcome, SearchSpace};
pub use solver::{
    bca_sweep, initialize, is_stationary, solve, HistoryEntry, Phase, SolverConfig, SolverError,
    SolverMode, SolverResult, TerminationReason,
};
pub use surrogate::{
    kernel_deriv, kernel_eval, symmetric_closure, EvaluationPoint, Surrogate, SurrogateError,
    SurrogateState, SymmetryGroup,
};
