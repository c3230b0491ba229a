//! Analytic test functions with known optima.

use super::{DecomposedObjective, Decomposition};
use crate::blocks::BlockStructure;
use crate::domain::BoxDomain;
use crate::surrogate::SymmetryGroup;

/// Location of the optimum of the pyramid and bowl functions, per coordinate.
pub const OPTIMUM_COORDINATE: f64 = -2.0;
pub const BOUND: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `-max_i |x_i + 2|`.
    PyramidPeak,
    /// `-floor(|x - (-2, ..., -2)|)`.
    QuantizedBowl,
    /// `|sum_m a_m|_1 - 2 sum_{m<m'} |a_m - a_m'|_1`.
    SubspaceTrap,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    kind: SyntheticKind,
    blocks: BlockStructure,
}

impl Synthetic {
    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }

    /// Direct evaluation without caching or counters.
    pub fn value(&self, x: &[f64]) -> f64 {
        let obs: Vec<Vec<f64>> = (0..self.blocks.len())
            .map(|m| self.blocks.slice(x, m).to_vec())
            .collect();
        let refs: Vec<&Vec<f64>> = obs.iter().collect();
        self.fuse(&refs)
    }
}

impl Decomposition for Synthetic {
    type Observation = Vec<f64>;

    fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    fn observe(&self, _block: usize, params: &[f64]) -> Vec<f64> {
        params.to_vec()
    }

    fn fuse(&self, obs: &[&Vec<f64>]) -> f64 {
        match self.kind {
            SyntheticKind::PyramidPeak => -obs
                .iter()
                .flat_map(|a| a.iter())
                .map(|v| (v - OPTIMUM_COORDINATE).abs())
                .fold(0.0, f64::max),
            SyntheticKind::QuantizedBowl => -sorted_sum(
                obs.iter()
                    .flat_map(|a| a.iter())
                    .map(|v| (v - OPTIMUM_COORDINATE).powi(2))
                    .collect(),
            )
            .sqrt()
            .floor(),
            SyntheticKind::SubspaceTrap => {
                let d = obs[0].len();
                let total: f64 = (0..d)
                    .map(|j| sorted_sum(obs.iter().map(|a| a[j]).collect()).abs())
                    .sum();
                let mut pairs = Vec::new();
                for (i, a) in obs.iter().enumerate() {
                    for b in &obs[i + 1..] {
                        pairs.push(a.iter().zip(b.iter()).map(|(p, q)| (p - q).abs()).sum());
                    }
                }
                let penalty = sorted_sum(pairs);
                total - 2.0 * penalty
            }
        }
    }
}

/// Summation in sorted order, so permuting blocks cannot change the rounding.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn cube(n: usize) -> BoxDomain {
    BoxDomain::cube(n, -BOUND, BOUND).expect("valid cube")
}

/// `f(x) = -max_i |x_i + 2|` on `[-10, 10]^n`; maximum `0` at `(-2, ..., -2)`.
///
/// # Panics
/// If `n == 0`.
pub fn pyramid_peak(n: usize) -> DecomposedObjective<Synthetic> {
    let blocks = BlockStructure::coordinates(n).expect("n >= 1");
    DecomposedObjective::new(
        format!("pyramid_peak({n})"),
        Synthetic {
            kind: SyntheticKind::PyramidPeak,
            blocks,
        },
        cube(n),
        full_or_identity(n),
        Some(0.0),
    )
    .expect("consistent construction")
}

/// `f(x) = -floor(|x - x*|)` with `x* = (-2, ..., -2)` on `[-10, 10]^n`.
///
/// # Panics
/// If `n == 0`.
pub fn quantized_bowl(n: usize) -> DecomposedObjective<Synthetic> {
    let blocks = BlockStructure::coordinates(n).expect("n >= 1");
    DecomposedObjective::new(
        format!("quantized_bowl({n})"),
        Synthetic {
            kind: SyntheticKind::QuantizedBowl,
            blocks,
        },
        cube(n),
        full_or_identity(n),
        Some(0.0),
    )
    .expect("consistent construction")
}

/// `M` blocks of width `d` on `[-10, 10]^(M d)`. Points with all blocks
/// equal are subspace optima; the maximum `10 M d` sits at all-`10` (and
/// all-`-10`).
///
/// # Panics
/// If `m < 2` or `d == 0`.
pub fn subspace_trap(m: usize, d: usize) -> DecomposedObjective<Synthetic> {
    assert!(m >= 2, "subspace_trap needs at least two blocks");
    let blocks = BlockStructure::uniform(m, d).expect("d >= 1");
    DecomposedObjective::new(
        format!("subspace_trap({m},{d})"),
        Synthetic {
            kind: SyntheticKind::SubspaceTrap,
            blocks,
        },
        cube(m * d),
        full_or_identity(m),
        Some(BOUND * (m * d) as f64),
    )
    .expect("consistent construction")
}

/// The full permutation group when it is small enough to list.
fn full_or_identity(m: usize) -> SymmetryGroup {
    if m <= 8 {
        SymmetryGroup::full(m)
    } else {
        // Adjacent transpositions generate the group; listing them is enough
        // to declare invariance without enumerating m! elements.
        let perms = (0..m - 1)
            .map(|i| {
                let mut p: Vec<usize> = (0..m).collect();
                p.swap(i, i + 1);
                p
            })
            .collect();
        SymmetryGroup::new(m, perms).expect("transpositions are permutations")
    }
}
