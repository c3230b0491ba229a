//! Decomposed objectives `f(x) = g(sigma_1(a_1), ..., sigma_M(a_M))`.
//!
//! Each block's observation is cached under its exact parameter bits, so a
//! subspace evaluation that changes one block recomputes one observation.

mod coverage;
mod synthetic;

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::blocks::BlockStructure;
use crate::domain::BoxDomain;
use crate::surrogate::SymmetryGroup;

pub use coverage::{coverage_objective, Coverage, CoverageScene, Rect};
pub use synthetic::{pyramid_peak, quantized_bowl, subspace_trap, Synthetic, SyntheticKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point lies outside the domain")]
    OutsideDomain,
    #[error("block {0} does not exist")]
    InvalidBlock(usize),
    #[error("cache coherence violated: block {changed} was declared changed but block {missed} missed the cache")]
    CacheCoherence { changed: usize, missed: usize },
    #[error("objective returned a non-finite value")]
    NonFinite,
    #[error("invalid objective: {0}")]
    Invalid(String),
}

/// The per-block observation `sigma_m` and the fusion `g`.
pub trait Decomposition: Send + Sync {
    type Observation: Clone + Send + Sync;

    fn blocks(&self) -> &BlockStructure;

    /// `sigma_m(a_m)`; must be pure.
    fn observe(&self, block: usize, params: &[f64]) -> Self::Observation;

    /// `g(A_1, ..., A_M)`; must be pure.
    fn fuse(&self, observations: &[&Self::Observation]) -> f64;
}

/// Snapshot of evaluation counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalCounters {
    pub full_evals: u64,
    /// One entry per block.
    pub sigma_calls: Vec<u64>,
    pub fuse_calls: u64,
}

impl EvalCounters {
    pub fn total_sigma_calls(&self) -> u64 {
        self.sigma_calls.iter().sum()
    }
}

#[derive(Debug)]
struct AtomicCounters {
    full_evals: AtomicU64,
    sigma_calls: Vec<AtomicU64>,
    fuse_calls: AtomicU64,
}

impl AtomicCounters {
    fn new(m: usize) -> Self {
        Self {
            full_evals: AtomicU64::new(0),
            sigma_calls: (0..m).map(|_| AtomicU64::new(0)).collect(),
            fuse_calls: AtomicU64::new(0),
        }
    }

    fn snapshot(&self) -> EvalCounters {
        EvalCounters {
            full_evals: self.full_evals.load(Ordering::Relaxed),
            sigma_calls: self
                .sigma_calls
                .iter()
                .map(|c| c.load(Ordering::Relaxed))
                .collect(),
            fuse_calls: self.fuse_calls.load(Ordering::Relaxed),
        }
    }

    fn reset(&self) {
        self.full_evals.store(0, Ordering::Relaxed);
        self.fuse_calls.store(0, Ordering::Relaxed);
        for c in &self.sigma_calls {
            c.store(0, Ordering::Relaxed);
        }
    }
}

/// Last observation per block, keyed by the block parameters' bit pattern.
#[derive(Debug, Clone)]
pub struct ObservationCache<T> {
    slots: Vec<Option<(Vec<u64>, T)>>,
}

impl<T: Clone> ObservationCache<T> {
    pub fn new(blocks: usize) -> Self {
        Self {
            slots: vec![None; blocks],
        }
    }

    pub fn blocks(&self) -> usize {
        self.slots.len()
    }

    pub fn hits(&self, block: usize, params: &[f64]) -> bool {
        match &self.slots[block] {
            Some((key, _)) => {
                key.len() == params.len() && key.iter().zip(params).all(|(k, p)| *k == p.to_bits())
            }
            None => false,
        }
    }

    pub fn get(&self, block: usize) -> Option<&T> {
        self.slots[block].as_ref().map(|(_, t)| t)
    }

    pub fn insert(&mut self, block: usize, params: &[f64], observation: T) {
        self.slots[block] = Some((params.iter().map(|p| p.to_bits()).collect(), observation));
    }

    /// Copies one block's slot from another cache.
    pub fn take_block(&mut self, other: &Self, block: usize) {
        self.slots[block] = other.slots[block].clone();
    }

    pub fn clear(&mut self) {
        for s in &mut self.slots {
            *s = None;
        }
    }
}

/// A decomposition together with its box domain, declared symmetry and,
/// for analytic objectives, the known global maximum.
#[derive(Debug)]
pub struct DecomposedObjective<D: Decomposition> {
    name: String,
    decomposition: D,
    domain: BoxDomain,
    symmetry: SymmetryGroup,
    known_max: Option<f64>,
    counters: AtomicCounters,
}

impl<D: Decomposition> DecomposedObjective<D> {
    pub fn new(
        name: impl Into<String>,
        decomposition: D,
        domain: BoxDomain,
        symmetry: SymmetryGroup,
        known_max: Option<f64>,
    ) -> Result<Self, ObjectiveError> {
        let blocks = decomposition.blocks();
        if blocks.dim() != domain.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: domain.dim(),
                found: blocks.dim(),
            });
        }
        symmetry
            .check_blocks(blocks)
            .map_err(|e| ObjectiveError::Invalid(e.to_string()))?;
        let m = blocks.len();
        Ok(Self {
            name: name.into(),
            decomposition,
            domain,
            symmetry,
            known_max,
            counters: AtomicCounters::new(m),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decomposition(&self) -> &D {
        &self.decomposition
    }

    pub fn blocks(&self) -> &BlockStructure {
        self.decomposition.blocks()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Block permutations that leave the objective unchanged.
    pub fn symmetry(&self) -> &SymmetryGroup {
        &self.symmetry
    }

    pub fn known_max(&self) -> Option<f64> {
        self.known_max
    }

    pub fn new_cache(&self) -> ObservationCache<D::Observation> {
        ObservationCache::new(self.blocks().len())
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters.snapshot()
    }

    pub fn reset_counters(&self) {
        self.counters.reset();
    }

    /// Evaluates `f(x)`, recomputing only the observations that miss `cache`.
    ///
    /// With `changed_block = Some(m)` every other block must hit the cache.
    pub fn eval(
        &self,
        x: &[f64],
        changed_block: Option<usize>,
        cache: &mut ObservationCache<D::Observation>,
    ) -> Result<f64, ObjectiveError> {
        self.eval_traced(x, changed_block, cache).map(|(v, _)| v)
    }

    /// As [`eval`](Self::eval), also returning how many observations were
    /// computed.
    pub fn eval_traced(
        &self,
        x: &[f64],
        changed_block: Option<usize>,
        cache: &mut ObservationCache<D::Observation>,
    ) -> Result<(f64, usize), ObjectiveError> {
        if x.len() != self.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(ObjectiveError::OutsideDomain);
        }
        let blocks = self.decomposition.blocks();
        let m = blocks.len();
        if cache.blocks() != m {
            return Err(ObjectiveError::DimensionMismatch {
                expected: m,
                found: cache.blocks(),
            });
        }
        let misses: Vec<usize> = (0..m)
            .filter(|&b| !cache.hits(b, blocks.slice(x, b)))
            .collect();
        if let Some(changed) = changed_block {
            if changed >= m {
                return Err(ObjectiveError::InvalidBlock(changed));
            }
            if let Some(&missed) = misses.iter().find(|&&b| b != changed) {
                return Err(ObjectiveError::CacheCoherence { changed, missed });
            }
        }
        for &b in &misses {
            let params = blocks.slice(x, b);
            let obs = self.decomposition.observe(b, params);
            self.counters.sigma_calls[b].fetch_add(1, Ordering::Relaxed);
            cache.insert(b, params, obs);
        }
        let observations: Vec<&D::Observation> = (0..m)
            .map(|b| cache.get(b).expect("slot filled above"))
            .collect();
        let value = self.decomposition.fuse(&observations);
        self.counters.fuse_calls.fetch_add(1, Ordering::Relaxed);
        self.counters.full_evals.fetch_add(1, Ordering::Relaxed);
        if !value.is_finite() {
            return Err(ObjectiveError::NonFinite);
        }
        Ok((value, misses.len()))
    }

    /// Evaluation with a throwaway cache.
    pub fn eval_fresh(&self, x: &[f64]) -> Result<f64, ObjectiveError> {
        let mut cache = self.new_cache();
        self.eval(x, None, &mut cache)
    }
}

/// Adapts a plain function: each observation is the block's parameter
/// vector and fusion calls the function on the concatenation.
pub struct FnDecomposition<F> {
    blocks: BlockStructure,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnDecomposition<F> {
    pub fn new(blocks: BlockStructure, f: F) -> Self {
        Self { blocks, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Decomposition for FnDecomposition<F> {
    type Observation = Vec<f64>;

    fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    fn observe(&self, _block: usize, params: &[f64]) -> Vec<f64> {
        params.to_vec()
    }

    fn fuse(&self, observations: &[&Vec<f64>]) -> f64 {
        let x: Vec<f64> = observations
            .iter()
            .flat_map(|o| o.iter().copied())
            .collect();
        (self.f)(&x)
    }
}

impl<F> std::fmt::Debug for FnDecomposition<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnDecomposition")
            .field("blocks", &self.blocks)
            .finish_non_exhaustive()
    }
}

/// Wraps a closure over a box domain with coordinate blocks and no
/// declared symmetry.
pub fn from_fn<F: Fn(&[f64]) -> f64 + Send + Sync>(
    name: &str,
    domain: BoxDomain,
    blocks: BlockStructure,
    f: F,
) -> Result<DecomposedObjective<FnDecomposition<F>>, ObjectiveError> {
    let m = blocks.len();
    DecomposedObjective::new(
        name,
        FnDecomposition::new(blocks, f),
        domain,
        SymmetryGroup::identity(m),
        None,
    )
}
