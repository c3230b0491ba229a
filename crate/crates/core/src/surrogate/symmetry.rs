use rand::seq::SliceRandom;

use super::{squared_distance, EvaluationPoint, SurrogateError};
use crate::blocks::BlockStructure;
use crate::rng;

/// Orbits larger than this insert the original point plus this many sampled
/// images.
pub const DEFAULT_CLOSURE_CAP: usize = 720;

/// Block permutations under which the objective is invariant.
///
/// `perm[j] = i` means block `j` of the image is block `i` of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryGroup {
    blocks: usize,
    permutations: Vec<Vec<usize>>,
}

impl SymmetryGroup {
    /// The trivial group; disables symmetric closure.
    pub fn identity(blocks: usize) -> Self {
        Self {
            blocks,
            permutations: vec![(0..blocks).collect()],
        }
    }

    /// All `m!` permutations of `m` blocks, identity first.
    ///
    /// # Panics
    /// If `m > 10`; use [`SymmetryGroup::new`] with a generating subset.
    pub fn full(m: usize) -> Self {
        assert!(
            m <= 10,
            "full symmetric group on {m} blocks is too large to list"
        );
        let mut perms = Vec::new();
        let mut current: Vec<usize> = (0..m).collect();
        permute(&mut current, 0, &mut perms);
        perms.sort();
        Self {
            blocks: m,
            permutations: perms,
        }
    }

    /// An explicit list of permutations. The identity is added if missing.
    pub fn new(blocks: usize, mut permutations: Vec<Vec<usize>>) -> Result<Self, SurrogateError> {
        for (p, perm) in permutations.iter().enumerate() {
            let mut seen = vec![false; blocks];
            if perm.len() != blocks {
                return Err(SurrogateError::Structural(format!(
                    "permutation {p} has length {} for {blocks} blocks",
                    perm.len()
                )));
            }
            for &i in perm {
                if i >= blocks || seen[i] {
                    return Err(SurrogateError::Structural(format!(
                        "permutation {p} is not a bijection of 0..{blocks}"
                    )));
                }
                seen[i] = true;
            }
        }
        let identity: Vec<usize> = (0..blocks).collect();
        if !permutations.contains(&identity) {
            permutations.insert(0, identity);
        } else {
            let pos = permutations.iter().position(|p| *p == identity).unwrap();
            permutations.swap(0, pos);
        }
        Ok(Self {
            blocks,
            permutations,
        })
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.permutations
    }

    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.permutations.len() == 1
    }

    /// Every permutation maps blocks onto blocks of equal width.
    pub fn check_blocks(&self, blocks: &BlockStructure) -> Result<(), SurrogateError> {
        if blocks.len() != self.blocks {
            return Err(SurrogateError::Structural(format!(
                "group acts on {} blocks but the structure has {}",
                self.blocks,
                blocks.len()
            )));
        }
        for perm in &self.permutations {
            for (j, &i) in perm.iter().enumerate() {
                if blocks.width(i) != blocks.width(j) {
                    return Err(SurrogateError::Structural(format!(
                        "permutation maps block {i} (width {}) onto block {j} (width {})",
                        blocks.width(i),
                        blocks.width(j)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Applies `perm` blockwise to `x`.
    pub fn apply(&self, perm: &[usize], x: &[f64], blocks: &BlockStructure) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (j, &i) in perm.iter().enumerate() {
            out[blocks.span(j)].copy_from_slice(&x[blocks.span(i)]);
        }
        out
    }
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

/// The orbit of `point` under `group`, each image carrying the same value.
///
/// The original point comes first; images within `tolerance` of an earlier
/// member are dropped. Groups larger than `cap` contribute `cap` sampled
/// images, chosen deterministically from the point's bit pattern.
pub fn symmetric_closure(
    point: &EvaluationPoint,
    blocks: &BlockStructure,
    group: &SymmetryGroup,
    tolerance: f64,
    cap: usize,
) -> Result<Vec<EvaluationPoint>, SurrogateError> {
    if point.dim() != blocks.dim() {
        return Err(SurrogateError::DimensionMismatch {
            expected: blocks.dim(),
            found: point.dim(),
        });
    }
    group.check_blocks(blocks)?;
    let mut orbit = vec![point.clone()];
    let tol2 = tolerance * tolerance;
    let perms: Vec<&Vec<usize>> = if group.len() - 1 > cap {
        let mut rng = rng::rng_from(rng::seed_from_point(&point.point));
        let mut rest: Vec<&Vec<usize>> = group.permutations[1..].iter().collect();
        rest.shuffle(&mut rng);
        rest.truncate(cap);
        rest
    } else {
        group.permutations[1..].iter().collect()
    };
    for perm in perms {
        let image = group.apply(perm, &point.point, blocks);
        let fresh = orbit
            .iter()
            .all(|p| squared_distance(&p.point, &image) >= tol2 && p.point != image);
        if fresh {
            orbit.push(EvaluationPoint::new(image, point.value));
        }
    }
    Ok(orbit)
}
