//! Thin plate spline interpolant with a linear tail.
//!
//! ```text
//! f(x) ≈ Σ_k ω_k φ(‖x − s_k‖) + ν·x + ν₀,        φ(r) = r² ln r
//! Σ_k ω_k = 0,   Σ_k ω_k s_k = 0
//! ```
//!
//! [`Surrogate::fit`] solves the saddle-point system with a dense LU
//! factorization. [`SurrogateState`] keeps the system's inverse and borders it
//! with one row and column per new center, falling back to a full refit when
//! the bordered solution fails its residual check.

mod kernel;
mod state;
mod symmetry;

pub(crate) use kernel::{dphi_over_r_sq, phi_sq};
pub use kernel::{kernel_deriv, kernel_eval};
pub use state::{SurrogateState, UpdateReport};
pub use symmetry::{symmetric_closure, SymmetryGroup, DEFAULT_CLOSURE_CAP};

use nalgebra::{DMatrix, DVector};

/// Tikhonov shift applied to the kernel block on the single retry.
pub const TIKHONOV_LAMBDA: f64 = 1e-10;
/// Relative separation below which two centers are considered duplicates.
pub const DUPLICATE_RELATIVE_TOLERANCE: f64 = 1e-8;
/// Interpolation tolerance `|f̄(s_k) − f_k| ≤ tol · (1 + |f_k|)`.
pub const INTERPOLATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurrogateError {
    #[error("kernel radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least {needed} points to fit a linear tail, got {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("evaluation point {index} has a non-finite coordinate or value")]
    NonFinite { index: usize },
    #[error("degenerate geometry (points {indices:?}): {detail}")]
    DegenerateGeometry { indices: Vec<usize>, detail: String },
    #[error("symmetry does not fit block structure: {0}")]
    Structural(String),
}

/// A sampled variable vector with its objective value `(s_k, f_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPoint {
    pub point: Vec<f64>,
    pub value: f64,
}

impl EvaluationPoint {
    pub fn new(point: Vec<f64>, value: f64) -> Self {
        Self { point, value }
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.point.iter().all(|v| v.is_finite())
    }
}

impl AsRef<[f64]> for EvaluationPoint {
    fn as_ref(&self) -> &[f64] {
        &self.point
    }
}

/// A fitted interpolant. Immutable; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Surrogate {
    dim: usize,
    centers: Vec<EvaluationPoint>,
    /// Row-major `K x n` copy of the center coordinates.
    coords: Vec<f64>,
    weights: Vec<f64>,
    tail_linear: Vec<f64>,
    tail_constant: f64,
}

impl Surrogate {
    /// Fits the interpolant of `points`.
    ///
    /// Duplicates are detected relative to the bounding-box diameter of the
    /// points; use [`SurrogateState`] to detect them relative to a domain.
    pub fn fit(points: &[EvaluationPoint]) -> Result<Self, SurrogateError> {
        let dim = validate_points(points)?;
        let scale = bounding_diameter(points);
        let tol = DUPLICATE_RELATIVE_TOLERANCE * scale;
        if let Some((i, j)) = find_duplicate(points, tol) {
            return Err(SurrogateError::DegenerateGeometry {
                indices: vec![i, j],
                detail: format!(
                    "centers {i} and {j} are closer than the duplicate tolerance {tol:e}"
                ),
            });
        }
        check_affine_span(points)?;
        let coords: Vec<f64> = points
            .iter()
            .flat_map(|p| p.point.iter().copied())
            .collect();
        let values: Vec<f64> = points.iter().map(|p| p.value).collect();
        let system = assemble_system(&coords, dim);
        let solution = solve_dense(&system, &values, dim).ok_or_else(|| degenerate(points))?;
        Ok(Self::from_solution(points.to_vec(), coords, dim, &solution))
    }

    /// Builds the surrogate from the unknown vector `[ν, ν₀, ω]`.
    pub(crate) fn from_solution(
        centers: Vec<EvaluationPoint>,
        coords: Vec<f64>,
        dim: usize,
        solution: &[f64],
    ) -> Self {
        Self {
            dim,
            centers,
            coords,
            tail_linear: solution[..dim].to_vec(),
            tail_constant: solution[dim],
            weights: solution[dim + 1..].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers(&self) -> &[EvaluationPoint] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail_linear(&self) -> &[f64] {
        &self.tail_linear
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail_constant
    }

    pub(crate) fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, SurrogateError> {
        self.check_dim(x)?;
        Ok(self.value(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, SurrogateError> {
        self.check_dim(x)?;
        let mut g = vec![0.0; self.dim];
        self.value_and_gradient(x, &mut g);
        Ok(g)
    }

    /// Unchecked evaluation; `x.len()` must equal the dimension.
    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(self.coords.chunks_exact(n)) {
            let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += w * phi_sq(r2);
        }
        acc + dot(&self.tail_linear, x) + self.tail_constant
    }

    /// Unchecked value and gradient in one pass.
    pub(crate) fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.dim;
        grad.copy_from_slice(&self.tail_linear);
        let mut acc = 0.0;
        for (w, c) in self.weights.iter().zip(self.coords.chunks_exact(n)) {
            let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 > 0.0 {
                let ln = r2.ln();
                acc += w * 0.5 * r2 * ln;
                let factor = w * (ln + 1.0);
                for ((g, a), b) in grad.iter_mut().zip(x).zip(c) {
                    *g += factor * (a - b);
                }
            }
        }
        acc + dot(&self.tail_linear, x) + self.tail_constant
    }

    /// `max_k |f̄(s_k) − f_k| / (1 + |f_k|)`.
    pub fn max_interpolation_error(&self) -> f64 {
        self.centers
            .iter()
            .map(|c| (self.value(&c.point) - c.value).abs() / (1.0 + c.value.abs()))
            .fold(0.0, f64::max)
    }

    /// `max(|Σ ω_k|, max_i |Σ ω_k s_k,i|)`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim;
        let mut sums = vec![0.0; n + 1];
        for (w, c) in self.weights.iter().zip(self.coords.chunks_exact(n)) {
            sums[n] += w;
            for (s, v) in sums.iter_mut().zip(c) {
                *s += w * v;
            }
        }
        sums.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), SurrogateError> {
        if x.len() != self.dim {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }
}

#[inline]
/// Four independent partial sums so the loop vectorizes; the summation order
/// is fixed, so results are reproducible.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    let mut acc = [0.0f64; 4];
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate_points(points: &[EvaluationPoint]) -> Result<usize, SurrogateError> {
    let dim = points.first().map(|p| p.dim()).unwrap_or(0);
    if points.len() < dim + 1 || dim == 0 {
        return Err(SurrogateError::InsufficientPoints {
            needed: dim.max(1) + 1,
            found: points.len(),
        });
    }
    for (index, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(SurrogateError::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(SurrogateError::NonFinite { index });
        }
    }
    Ok(dim)
}

fn bounding_diameter(points: &[EvaluationPoint]) -> f64 {
    let n = points[0].dim();
    (0..n)
        .map(|i| {
            let (lo, hi) = points.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
                (lo.min(p.point[i]), hi.max(p.point[i]))
            });
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

fn find_duplicate(points: &[EvaluationPoint], tol: f64) -> Option<(usize, usize)> {
    let tol2 = tol * tol;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2 = squared_distance(&points[i].point, &points[j].point);
            if d2 < tol2 || d2 == 0.0 {
                return Some((i, j));
            }
        }
    }
    None
}

/// The linear tail is determined only if the points span an `n`-dimensional
/// affine subspace.
pub(crate) fn check_affine_span(points: &[EvaluationPoint]) -> Result<(), SurrogateError> {
    let n = points[0].dim();
    let k = points.len();
    let mut centroid = vec![0.0; n];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(&p.point) {
            *c += v / k as f64;
        }
    }
    let centered = DMatrix::from_fn(k, n, |r, c| points[r].point[c] - centroid[c]);
    let sv = centered.singular_values();
    let max = sv.max();
    let min = sv.min();
    if max.is_nan() || max <= 0.0 || min <= 1e-10 * max {
        return Err(SurrogateError::DegenerateGeometry {
            indices: (0..k).collect(),
            detail: format!(
                "points do not span an affine subspace of dimension {n} \
                 (singular values {min:e} .. {max:e})"
            ),
        });
    }
    Ok(())
}

fn closest_pair(points: &[EvaluationPoint]) -> (usize, usize) {
    let mut best = (0, 1, f64::MAX);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2 = squared_distance(&points[i].point, &points[j].point);
            if d2 < best.2 {
                best = (i, j, d2);
            }
        }
    }
    (best.0, best.1)
}

fn degenerate(points: &[EvaluationPoint]) -> SurrogateError {
    let (i, j) = closest_pair(points);
    SurrogateError::DegenerateGeometry {
        indices: vec![i, j],
        detail: "interpolation system is singular after regularization; \
                 the closest pair is reported"
            .into(),
    }
}

/// Symmetric augmented matrix over the unknowns `[ν (n), ν₀, ω (K)]`:
///
/// ```text
/// [ 0   Pᵀ ]
/// [ P   Φ  ]      P_k = (s_kᵀ, 1),  Φ_jk = φ(‖s_j − s_k‖)
/// ```
pub(crate) fn assemble_system(coords: &[f64], n: usize) -> DMatrix<f64> {
    let k = coords.len() / n;
    let size = k + n + 1;
    let mut a = DMatrix::<f64>::zeros(size, size);
    for j in 0..k {
        let sj = &coords[j * n..(j + 1) * n];
        let row = n + 1 + j;
        for i in 0..n {
            a[(row, i)] = sj[i];
            a[(i, row)] = sj[i];
        }
        a[(row, n)] = 1.0;
        a[(n, row)] = 1.0;
        for l in 0..j {
            let v = phi_sq(squared_distance(sj, &coords[l * n..(l + 1) * n]));
            a[(row, n + 1 + l)] = v;
            a[(n + 1 + l, row)] = v;
        }
    }
    a
}

/// Solves `A z = [0; f]`, retrying once with a Tikhonov shift on the kernel
/// block. Returns `None` if neither attempt meets the residual checks.
pub(crate) fn solve_dense(a: &DMatrix<f64>, values: &[f64], n: usize) -> Option<Vec<f64>> {
    solve_dense_with_inverse(a, values, n, false).map(|(z, _)| z)
}

/// As [`solve_dense`], optionally also returning the inverse of the matrix
/// that was factorized.
pub(crate) fn solve_dense_with_inverse(
    a: &DMatrix<f64>,
    values: &[f64],
    n: usize,
    want_inverse: bool,
) -> Option<(Vec<f64>, Option<DMatrix<f64>>)> {
    let size = a.nrows();
    let mut rhs = DVector::<f64>::zeros(size);
    rhs.rows_mut(n + 1, values.len())
        .copy_from(&DVector::from_column_slice(values));

    for lambda in [0.0, TIKHONOV_LAMBDA] {
        let mut m = a.clone();
        if lambda > 0.0 {
            for i in n + 1..size {
                m[(i, i)] += lambda;
            }
        }
        let lu = m.lu();
        let Some(mut z) = lu.solve(&rhs) else {
            continue;
        };
        // One step of iterative refinement against the unshifted system.
        let r = &rhs - a * &z;
        if let Some(dz) = lu.solve(&r) {
            z += dz;
        }
        if z.iter().all(|v| v.is_finite()) && residual_ok(a, &z, values, n, 0.5) {
            let inv = if want_inverse { lu.try_inverse() } else { None };
            if want_inverse && inv.is_none() {
                continue;
            }
            return Some((z.as_slice().to_vec(), inv));
        }
    }
    None
}

/// Interpolation and orthogonality residuals of `z` within `safety` times
/// the invariant tolerances.
pub(crate) fn residual_ok(
    a: &DMatrix<f64>,
    z: &DVector<f64>,
    values: &[f64],
    n: usize,
    safety: f64,
) -> bool {
    let az = a * z;
    let k = values.len();
    let wmax = z.rows(n + 1, k).amax();
    let orth_tol = safety * INTERPOLATION_TOLERANCE * k as f64 * wmax.max(f64::MIN_POSITIVE);
    if (0..=n).any(|i| az[i].abs() > orth_tol) {
        return false;
    }
    values.iter().enumerate().all(|(j, f)| {
        (az[n + 1 + j] - f).abs() <= safety * INTERPOLATION_TOLERANCE * (1.0 + f.abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(data: &[(f64, f64)]) -> Vec<EvaluationPoint> {
        data.iter()
            .map(|&(x, f)| EvaluationPoint::new(vec![x], f))
            .collect()
    }

    /// Independent oracle: Gaussian elimination with partial pivoting on the
    /// system assembled entry by entry from `kernel_eval`.
    #[allow(clippy::needless_range_loop)]
    fn oracle_solve(points: &[EvaluationPoint]) -> Vec<f64> {
        let n = points[0].dim();
        let k = points.len();
        let size = k + n + 1;
        let mut m = vec![vec![0.0; size + 1]; size];
        // unknown order: ω (K), ν (n), ν₀
        for j in 0..k {
            for l in 0..k {
                let r = squared_distance(&points[j].point, &points[l].point).sqrt();
                m[j][l] = kernel_eval(r).unwrap();
            }
            for i in 0..n {
                m[j][k + i] = points[j].point[i];
                m[k + i][j] = points[j].point[i];
            }
            m[j][k + n] = 1.0;
            m[k + n][j] = 1.0;
            m[j][size] = points[j].value;
        }
        for col in 0..size {
            let piv = (col..size)
                .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
                .unwrap();
            m.swap(col, piv);
            for row in 0..size {
                if row != col {
                    let f = m[row][col] / m[col][col];
                    for c in col..=size {
                        m[row][c] -= f * m[col][c];
                    }
                }
            }
        }
        (0..size).map(|i| m[i][size] / m[i][i]).collect()
    }

    #[test]
    fn reproduces_affine_data_exactly_in_1d() {
        let points = pts(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]);
        let oracle = oracle_solve(&points);
        for w in &oracle[..3] {
            assert!(w.abs() < 1e-12);
        }
        assert!((oracle[3] - 2.0).abs() < 1e-12);
        assert!((oracle[4] - 1.0).abs() < 1e-12);

        let s = Surrogate::fit(&points).unwrap();
        assert!(s.weights().iter().all(|w| w.abs() < 1e-12));
        assert!((s.tail_linear()[0] - 2.0).abs() < 1e-12);
        assert!((s.tail_constant() - 1.0).abs() < 1e-12);
        assert!((s.evaluate(&[7.5]).unwrap() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn interpolates_hat_data() {
        let points = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        // Hand elimination of the 5x5 system: ω = c (1, −2, 1), c = −1 / (4 ln 2),
        // ν = 0, ν₀ = 1.
        let c = -1.0 / (4.0 * std::f64::consts::LN_2);
        let oracle = oracle_solve(&points);
        for (got, want) in oracle.iter().zip([c, -2.0 * c, c, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let s = Surrogate::fit(&points).unwrap();
        for (got, want) in s.weights().iter().zip(&oracle[..3]) {
            assert!((got - want).abs() < 1e-10);
        }
        for (x, f) in [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)] {
            assert!((s.evaluate(&[x]).unwrap() - f).abs() < 1e-8);
        }
    }

    #[test]
    fn near_duplicate_centers_are_degenerate() {
        let points = pts(&[(0.0, 0.0), (1e-12, 0.0), (1.0, 2.0), (3.0, 1.0)]);
        match Surrogate::fit(&points) {
            Err(SurrogateError::DegenerateGeometry { indices, .. }) => {
                assert_eq!(indices, vec![0, 1])
            }
            other => panic!("expected degenerate geometry, got {other:?}"),
        }
    }

    #[test]
    fn collinear_points_in_the_plane_are_degenerate() {
        let points: Vec<_> = (0..5)
            .map(|i| EvaluationPoint::new(vec![i as f64, 2.0 * i as f64], i as f64))
            .collect();
        assert!(matches!(
            Surrogate::fit(&points),
            Err(SurrogateError::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn too_few_points() {
        let points = vec![
            EvaluationPoint::new(vec![0.0, 0.0], 1.0),
            EvaluationPoint::new(vec![1.0, 0.0], 1.0),
        ];
        assert_eq!(
            Surrogate::fit(&points).unwrap_err(),
            SurrogateError::InsufficientPoints {
                needed: 3,
                found: 2
            }
        );
    }

    #[test]
    fn non_finite_value_rejected() {
        let points = pts(&[(0.0, 0.0), (1.0, f64::NAN), (2.0, 0.0)]);
        assert_eq!(
            Surrogate::fit(&points).unwrap_err(),
            SurrogateError::NonFinite { index: 1 }
        );
    }

    #[test]
    fn dimension_mismatch_on_evaluate() {
        let s = Surrogate::fit(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)])).unwrap();
        assert!(matches!(
            s.evaluate(&[0.0, 1.0]),
            Err(SurrogateError::DimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
        assert!(s.gradient(&[]).is_err());
    }

    #[test]
    fn gradient_at_center_is_finite() {
        let s = Surrogate::fit(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0), (3.5, -1.0)])).unwrap();
        let g = s.gradient(&[1.0]).unwrap();
        assert!(g[0].is_finite());
    }

    #[test]
    fn far_field_stays_finite() {
        let points: Vec<_> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.3, 0.6]]
            .iter()
            .enumerate()
            .map(|(i, p)| EvaluationPoint::new(p.to_vec(), i as f64))
            .collect();
        let s = Surrogate::fit(&points).unwrap();
        let v = s.evaluate(&[1e6, -1e6]).unwrap();
        assert!(v.is_finite());
    }
}
