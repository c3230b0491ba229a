//! Point sets and the surrogate restricted to a search space.
//!
//! For a subspace with frozen coordinates `z`, the squared distance from a
//! free vector `v` to a full point `s` splits into a constant part over the
//! frozen coordinates and a free part, so each restricted evaluation costs
//! `O(K * free_dim)` instead of `O(K * n)`.

use super::SearchSpace;
use crate::surrogate::{dphi_over_r_sq, phi_sq, Surrogate};

/// Previous points projected onto the free coordinates of a space, sorted by
/// frozen offset so nearest-point scans can stop early.
pub(crate) struct ProjectedPoints {
    pub(crate) dim: usize,
    /// Row-major `K x free_dim`.
    pub(crate) free: Vec<f64>,
    /// Squared distance over the frozen coordinates.
    pub(crate) offset: Vec<f64>,
}

impl ProjectedPoints {
    pub(crate) fn new<'a>(space: &SearchSpace, points: impl Iterator<Item = &'a [f64]>) -> Self {
        let span = space.free_span();
        let d = span.len();
        let mut free = Vec::new();
        let mut offset = Vec::new();
        for p in points {
            free.extend_from_slice(&p[span.clone()]);
            offset.push(frozen_offset(space, p));
        }
        let mut order: Vec<usize> = (0..offset.len()).collect();
        order.sort_by(|&a, &b| offset[a].total_cmp(&offset[b]));
        let sorted_free = order
            .iter()
            .flat_map(|&k| free[k * d..(k + 1) * d].iter().copied())
            .collect();
        let sorted_offset = order.iter().map(|&k| offset[k]).collect();
        Self {
            dim: d,
            free: sorted_free,
            offset: sorted_offset,
        }
    }

    /// Unsorted, for the surrogate centers whose order must match the weights.
    fn unsorted<'a>(space: &SearchSpace, points: impl Iterator<Item = &'a [f64]>) -> Self {
        let span = space.free_span();
        let d = span.len();
        let mut free = Vec::new();
        let mut offset = Vec::new();
        for p in points {
            free.extend_from_slice(&p[span.clone()]);
            offset.push(frozen_offset(space, p));
        }
        Self {
            dim: d,
            free,
            offset,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.offset.len()
    }

    /// Squared distance from `v` to the nearest point.
    pub(crate) fn min_dist2(&self, v: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (c, off) in self.free.chunks_exact(self.dim).zip(&self.offset) {
            if *off >= best {
                break;
            }
            let mut d2 = *off;
            for (a, b) in v.iter().zip(c) {
                d2 += (a - b) * (a - b);
            }
            if d2 < best {
                best = d2;
            }
        }
        best
    }

    pub(crate) fn free_coords(&self, k: usize) -> &[f64] {
        &self.free[k * self.dim..(k + 1) * self.dim]
    }
}

fn frozen_offset(space: &SearchSpace, p: &[f64]) -> f64 {
    let span = space.free_span();
    match space.base() {
        Some(base) => p
            .iter()
            .zip(base)
            .enumerate()
            .filter(|(i, _)| !span.contains(i))
            .map(|(_, (a, b))| (a - b) * (a - b))
            .sum(),
        None => 0.0,
    }
}

/// The surrogate as a function of the free coordinates only.
pub(crate) struct RestrictedModel {
    centers: ProjectedPoints,
    weights: Vec<f64>,
    tail: Vec<f64>,
    constant: f64,
}

impl RestrictedModel {
    pub(crate) fn new(surrogate: &Surrogate, space: &SearchSpace) -> Self {
        let n = surrogate.dim();
        let centers = ProjectedPoints::unsorted(
            space,
            (0..surrogate.len()).map(|k| &surrogate.coords()[k * n..(k + 1) * n]),
        );
        let span = space.free_span();
        let nu = surrogate.tail_linear();
        let mut constant = surrogate.tail_constant();
        if let Some(base) = space.base() {
            constant += nu
                .iter()
                .zip(base)
                .enumerate()
                .filter(|(i, _)| !span.contains(i))
                .map(|(_, (a, b))| a * b)
                .sum::<f64>();
        }
        Self {
            centers,
            weights: surrogate.weights().to_vec(),
            tail: nu[span].to_vec(),
            constant,
        }
    }

    pub(crate) fn value(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((w, c), off) in self
            .weights
            .iter()
            .zip(self.centers.free.chunks_exact(self.centers.dim))
            .zip(&self.centers.offset)
        {
            let mut r2 = *off;
            for (a, b) in v.iter().zip(c) {
                r2 += (a - b) * (a - b);
            }
            acc += w * phi_sq(r2);
        }
        acc + crate::surrogate::dot(&self.tail, v) + self.constant
    }

    pub(crate) fn value_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(&self.tail);
        let mut acc = 0.0;
        for ((w, c), off) in self
            .weights
            .iter()
            .zip(self.centers.free.chunks_exact(self.centers.dim))
            .zip(&self.centers.offset)
        {
            let mut r2 = *off;
            for (a, b) in v.iter().zip(c) {
                r2 += (a - b) * (a - b);
            }
            if r2 > 0.0 {
                acc += w * phi_sq(r2);
                let factor = w * dphi_over_r_sq(r2);
                for ((g, a), b) in grad.iter_mut().zip(v).zip(c) {
                    *g += factor * (a - b);
                }
            }
        }
        acc + crate::surrogate::dot(&self.tail, v) + self.constant
    }
}
