use std::fmt;
use std::str::FromStr;

use super::SolverError;
use crate::surrogate::DEFAULT_CLOSURE_CAP;

/// Default exclusion-radius schedule.
pub const DEFAULT_BETA_CYCLE: [f64; 5] = [0.98, 0.6, 0.75, 0.2, 0.01];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMode {
    /// Full-domain searches interleaved with block sweeps.
    RbfBca,
    /// Full-domain searches only.
    RbfGlobal,
    /// Coordinate line searches on the true objective.
    GreedyCoordinate,
    /// Uniform sampling.
    Random,
}

impl SolverMode {
    pub const ALL: [SolverMode; 4] = [
        SolverMode::RbfBca,
        SolverMode::RbfGlobal,
        SolverMode::GreedyCoordinate,
        SolverMode::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverMode::RbfBca => "rbf-bca",
            SolverMode::RbfGlobal => "rbf-global",
            SolverMode::GreedyCoordinate => "greedy-coordinate",
            SolverMode::Random => "random",
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn tag(self) -> u64 {
        match self {
            SolverMode::RbfBca => 1,
            SolverMode::RbfGlobal => 2,
            SolverMode::GreedyCoordinate => 3,
            SolverMode::Random => 4,
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverMode {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SolverError::InvalidConfig(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta_cycle: Vec<f64>,
    /// The outer loop runs while the full-domain maximin radius exceeds this.
    pub delta0: f64,
    /// True-objective evaluation budget.
    pub max_evals: usize,
    pub mode: SolverMode,
    pub seed: u64,
    /// Block searches in a sweep share the sweep's base point and run on up
    /// to `threads` workers.
    pub parallel_sweep: bool,
    pub threads: usize,
    /// Relative to the domain diameter.
    pub stationarity_tol: f64,
    /// `None` means `10 * M`.
    pub max_inner_sweeps: Option<usize>,
    /// Offset of the initial simplex, relative to each coordinate's range.
    pub simplex_scale: f64,
    pub closure_cap: usize,
}

impl SolverConfig {
    /// Settings for the analytic benchmark functions.
    pub fn synthetic() -> Self {
        Self {
            beta_cycle: DEFAULT_BETA_CYCLE.to_vec(),
            delta0: 5.0,
            max_evals: 2000,
            mode: SolverMode::RbfBca,
            seed: 0,
            parallel_sweep: false,
            threads: 1,
            stationarity_tol: 1e-6,
            max_inner_sweeps: None,
            simplex_scale: 0.05,
            closure_cap: DEFAULT_CLOSURE_CAP,
        }
    }

    /// Settings for simulation-backed objectives with small budgets.
    pub fn realistic() -> Self {
        Self {
            delta0: 0.7,
            max_evals: 50,
            ..Self::synthetic()
        }
    }

    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn inner_sweeps(&self, blocks: usize) -> usize {
        self.max_inner_sweeps.unwrap_or(10 * blocks)
    }

    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.beta_cycle.is_empty() {
            return bad("beta_cycle is empty".into());
        }
        if let Some(b) = self.beta_cycle.iter().find(|b| !(0.0..1.0).contains(*b)) {
            return bad(format!("beta {b} is outside [0, 1)"));
        }
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return bad(format!("delta0 {} must be positive", self.delta0));
        }
        if self.max_evals < n + 2 {
            return bad(format!(
                "max_evals {} is below n + 2 = {}",
                self.max_evals,
                n + 2
            ));
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        if self.stationarity_tol.is_nan() || self.stationarity_tol <= 0.0 {
            return bad("stationarity_tol must be positive".into());
        }
        if self.max_inner_sweeps == Some(0) {
            return bad("max_inner_sweeps must be positive".into());
        }
        if !(self.simplex_scale > 0.0 && self.simplex_scale < 1.0) {
            return bad(format!(
                "simplex_scale {} is outside (0, 1)",
                self.simplex_scale
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::synthetic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SolverConfig::synthetic();
        assert_eq!(c.beta_cycle, vec![0.98, 0.6, 0.75, 0.2, 0.01]);
        assert_eq!((c.delta0, c.max_evals), (5.0, 2000));
        let r = SolverConfig::realistic();
        assert_eq!((r.delta0, r.max_evals), (0.7, 50));
        assert_eq!(c.inner_sweeps(3), 30);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in SolverMode::ALL {
            assert_eq!(m.name().parse::<SolverMode>().unwrap(), m);
        }
        assert!("bogus".parse::<SolverMode>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = SolverConfig::synthetic();
        assert!(c.validate(3).is_ok());
        c.max_evals = 4;
        assert!(c.validate(3).is_err());
        let mut c = SolverConfig::synthetic();
        c.beta_cycle.push(1.0);
        assert!(c.validate(3).is_err());
    }
}
