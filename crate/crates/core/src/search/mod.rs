//! Exclusion-area search.
//!
//! [`compute_delta`] estimates the maximin radius `delta` of a search space
//! with respect to the previous points; [`search_next`] maximizes the
//! surrogate over the space while keeping every candidate at least
//! `beta * delta` away from all previous points.

mod ascent;
mod geometry;
mod maximin;

use std::ops::Range;

use rand::Rng;
use thiserror::Error;

use crate::blocks::BlockStructure;
use crate::domain::BoxDomain;
use crate::rng;
use crate::surrogate::Surrogate;

pub(crate) use geometry::{ProjectedPoints, RestrictedModel};

/// Relative slack on the exclusion constraints.
pub const FEASIBILITY_RELATIVE_TOLERANCE: f64 = 1e-6;
/// How many times `beta` is halved before a search gives up.
pub const MAX_BETA_HALVINGS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("no previous points; delta is undefined")]
    EmptyPrevious,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("beta must lie in [0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("no feasible start after relaxing beta down to {beta}")]
    Infeasible { beta: f64 },
}

/// The full domain, or one block's slice through a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    domain: BoxDomain,
    free: Range<usize>,
    block: Option<usize>,
    base: Option<Vec<f64>>,
}

impl SearchSpace {
    pub fn full(domain: &BoxDomain) -> Self {
        Self {
            domain: domain.clone(),
            free: 0..domain.dim(),
            block: None,
            base: None,
        }
    }

    /// Block `block` of `blocks` is free; every other coordinate is frozen at
    /// `base`, which must lie in the domain.
    pub fn subspace(
        domain: &BoxDomain,
        blocks: &BlockStructure,
        block: usize,
        base: &[f64],
    ) -> Result<Self, SearchError> {
        if blocks.dim() != domain.dim() {
            return Err(SearchError::DimensionMismatch {
                expected: domain.dim(),
                found: blocks.dim(),
            });
        }
        if base.len() != domain.dim() {
            return Err(SearchError::DimensionMismatch {
                expected: domain.dim(),
                found: base.len(),
            });
        }
        if block >= blocks.len() {
            return Err(SearchError::InvalidDomain(format!(
                "block {block} out of range for {} blocks",
                blocks.len()
            )));
        }
        if !domain.contains(base) {
            return Err(SearchError::InvalidDomain(
                "base point lies outside the domain".into(),
            ));
        }
        Ok(Self {
            domain: domain.clone(),
            free: blocks.span(block),
            block: Some(block),
            base: Some(base.to_vec()),
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn is_full(&self) -> bool {
        self.block.is_none()
    }

    /// The free block for a subspace.
    pub fn block(&self) -> Option<usize> {
        self.block
    }

    pub fn base(&self) -> Option<&[f64]> {
        self.base.as_deref()
    }

    pub fn free_span(&self) -> Range<usize> {
        self.free.clone()
    }

    pub fn free_dim(&self) -> usize {
        self.free.len()
    }

    pub(crate) fn free_lower(&self) -> &[f64] {
        &self.domain.lower()[self.free.clone()]
    }

    pub(crate) fn free_upper(&self) -> &[f64] {
        &self.domain.upper()[self.free.clone()]
    }

    /// Diameter of the free box.
    pub fn diameter(&self) -> f64 {
        self.free
            .clone()
            .map(|i| self.domain.range(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Full-dimensional point from free coordinates.
    pub fn embed(&self, free: &[f64]) -> Vec<f64> {
        let mut x = match &self.base {
            Some(b) => b.clone(),
            None => vec![0.0; self.domain.dim()],
        };
        x[self.free.clone()].copy_from_slice(free);
        x
    }

    pub(crate) fn clamp_free(&self, v: &mut [f64]) {
        for ((x, lo), hi) in v.iter_mut().zip(self.free_lower()).zip(self.free_upper()) {
            *x = x.clamp(*lo, *hi);
        }
    }

    pub(crate) fn sample_free(&self, rng: &mut rng::SolverRng) -> Vec<f64> {
        self.free_lower()
            .iter()
            .zip(self.free_upper())
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    }

    fn project<'a, P: AsRef<[f64]> + 'a>(
        &self,
        previous: &'a [P],
    ) -> Result<ProjectedPoints, SearchError> {
        if previous.is_empty() {
            return Err(SearchError::EmptyPrevious);
        }
        for p in previous {
            if p.as_ref().len() != self.domain.dim() {
                return Err(SearchError::DimensionMismatch {
                    expected: self.domain.dim(),
                    found: p.as_ref().len(),
                });
            }
        }
        Ok(ProjectedPoints::new(
            self,
            previous.iter().map(|p| p.as_ref()),
        ))
    }
}

/// Result of one exclusion-area search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Full-dimensional point; frozen coordinates equal the base point.
    pub point: Vec<f64>,
    /// Surrogate value at `point`.
    pub predicted: f64,
    /// Maximin radius of the space.
    pub delta: f64,
    /// The `beta` that produced a feasible start, after any halving.
    pub beta_used: f64,
    /// Distance from `point` to the nearest previous point.
    pub min_distance: f64,
}

/// Maximin radius of `space` with respect to `previous`.
pub fn compute_delta<P: AsRef<[f64]>>(
    space: &SearchSpace,
    previous: &[P],
    seed: u64,
) -> Result<f64, SearchError> {
    let proj = space.project(previous)?;
    let mut rng = rng::rng_from(seed);
    Ok(maximin::maximin(space, &proj, &mut rng).1)
}

/// Maximizes `surrogate` over `space` subject to the exclusion constraints
/// `|x - s_k| >= beta * delta` for every previous point `s_k`.
pub fn search_next<P: AsRef<[f64]>>(
    space: &SearchSpace,
    surrogate: &Surrogate,
    previous: &[P],
    beta: f64,
    seed: u64,
) -> Result<SearchOutcome, SearchError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(SearchError::InvalidBeta(beta));
    }
    if surrogate.dim() != space.domain.dim() {
        return Err(SearchError::DimensionMismatch {
            expected: space.domain.dim(),
            found: surrogate.dim(),
        });
    }
    let proj = space.project(previous)?;
    let model = RestrictedModel::new(surrogate, space);
    let mut rng = rng::rng_from(seed);
    let (anchor, delta) = maximin::maximin(space, &proj, &mut rng);
    let tolerance = FEASIBILITY_RELATIVE_TOLERANCE * space.domain.diameter();

    let d = space.free_dim();
    let mut beta_try = beta;
    for attempt in 0..=MAX_BETA_HALVINGS {
        if attempt > 0 {
            beta_try *= 0.5;
        }
        let radius = beta_try * delta;
        let constraints = ascent::Exclusion::new(&proj, radius, tolerance);
        let mut starts = Vec::with_capacity(16 * d + 1);
        starts.push(anchor.clone());
        for _ in 0..16 * d {
            starts.push(space.sample_free(&mut rng));
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for start in starts {
            if !constraints.feasible(&start) {
                continue;
            }
            let (x, value) = ascent::ascend(space, &model, &constraints, start, 0.5 * delta);
            // Strict comparison keeps the lowest start index on ties.
            if best.as_ref().map_or(true, |(_, v)| value > *v) {
                best = Some((x, value));
            }
        }
        if let Some((x, predicted)) = best {
            let min_distance = proj.min_dist2(&x).sqrt();
            return Ok(SearchOutcome {
                point: space.embed(&x),
                predicted,
                delta,
                beta_used: beta_try,
                min_distance,
            });
        }
    }
    Err(SearchError::Infeasible { beta: beta_try })
}
