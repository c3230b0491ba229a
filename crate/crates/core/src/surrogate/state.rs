use nalgebra::DMatrix;

use super::{
    assemble_system, check_affine_span, phi_sq, solve_dense_with_inverse, squared_distance,
    symmetric_closure, EvaluationPoint, Surrogate, SurrogateError, SymmetryGroup,
    DUPLICATE_RELATIVE_TOLERANCE, INTERPOLATION_TOLERANCE,
};
use crate::blocks::BlockStructure;

/// Outcome of one [`SurrogateState::update`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    /// Centers added (the point and its fresh symmetric images).
    pub inserted: usize,
    /// Candidates skipped because they duplicate an existing center.
    pub duplicates: usize,
    /// The update improved the running maximum.
    pub improved: bool,
    /// The bordered solution failed its check and the system was refactorized.
    pub refactorized: bool,
}

/// Symmetric matrix stored as its packed lower triangle, row by row, so a
/// border is appended by pushing one row.
#[derive(Debug, Clone)]
struct SymPacked {
    size: usize,
    data: Vec<f64>,
}

impl SymPacked {
    fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        let size = m.nrows();
        let mut data = Vec::with_capacity(size * (size + 1) / 2);
        for i in 0..size {
            for j in 0..=i {
                data.push(m[(i, j)]);
            }
        }
        Self { size, data }
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            self.data[r * (r + 1) / 2 + c]
        })
    }

    /// Appends the row `[b, d]`.
    fn push_border(&mut self, b: &[f64], d: f64) {
        debug_assert_eq!(b.len(), self.size);
        self.data.extend_from_slice(b);
        self.data.push(d);
        self.size += 1;
    }

    fn truncate(&mut self, size: usize) {
        self.size = size;
        self.data.truncate(size * (size + 1) / 2);
    }

    fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        out[..self.size].fill(0.0);
        let mut start = 0;
        for i in 0..self.size {
            let row = &self.data[start..start + i + 1];
            let xi = x[i];
            out[i] += super::dot(&row[..i], &x[..i]) + row[i] * xi;
            for (o, r) in out[..i].iter_mut().zip(&row[..i]) {
                *o += r * xi;
            }
            start += i + 1;
        }
    }

    /// `self += c * u u^T`.
    fn rank_one(&mut self, c: f64, u: &[f64]) {
        let mut start = 0;
        for i in 0..self.size {
            let ci = c * u[i];
            for (r, uj) in self.data[start..start + i + 1].iter_mut().zip(u) {
                *r += ci * uj;
            }
            start += i + 1;
        }
    }
}

/// Running interpolant of every evaluated point plus its symmetric images,
/// together with the running maximum `(x_o, f_o)`.
#[derive(Debug, Clone)]
pub struct SurrogateState {
    dim: usize,
    duplicate_tolerance: f64,
    blocks: BlockStructure,
    group: SymmetryGroup,
    closure_cap: usize,
    /// Augmented matrix over `[ν, ν₀, ω]`.
    matrix: SymPacked,
    inverse: SymPacked,
    rhs: Vec<f64>,
    /// Current solution `[ν, ν₀, ω]`, kept in step with the bordered inverse.
    solution: Vec<f64>,
    centers: Vec<EvaluationPoint>,
    coords: Vec<f64>,
    surrogate: Surrogate,
    best: EvaluationPoint,
    refactorizations: usize,
}

impl SurrogateState {
    /// Fits the initial points (and their symmetric images).
    ///
    /// `domain_diameter` sets the duplicate tolerance
    /// `DUPLICATE_RELATIVE_TOLERANCE * domain_diameter`.
    pub fn new(
        points: &[EvaluationPoint],
        blocks: BlockStructure,
        group: SymmetryGroup,
        domain_diameter: f64,
        closure_cap: usize,
    ) -> Result<Self, SurrogateError> {
        let dim = blocks.dim();
        group.check_blocks(&blocks)?;
        let tol = DUPLICATE_RELATIVE_TOLERANCE * domain_diameter;
        let mut centers: Vec<EvaluationPoint> = Vec::new();
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
            for image in symmetric_closure(p, &blocks, &group, tol, closure_cap)? {
                if !is_duplicate(&centers, &image.point, tol) {
                    centers.push(image);
                }
            }
        }
        if centers.len() < dim + 1 {
            return Err(SurrogateError::InsufficientPoints {
                needed: dim + 1,
                found: centers.len(),
            });
        }
        check_affine_span(&centers)?;
        let best = points
            .iter()
            .fold(None::<&EvaluationPoint>, |b, p| match b {
                Some(b) if b.value >= p.value => Some(b),
                _ => Some(p),
            })
            .cloned()
            .expect("non-empty");
        let coords: Vec<f64> = centers
            .iter()
            .flat_map(|p| p.point.iter().copied())
            .collect();
        let a = assemble_system(&coords, dim);
        let values: Vec<f64> = centers.iter().map(|c| c.value).collect();
        let (solution, inverse) = solve_dense_with_inverse(&a, &values, dim, true)
            .ok_or_else(|| super::degenerate(&centers))?;
        let inverse = inverse.expect("inverse requested");
        let mut rhs = vec![0.0; dim + 1];
        rhs.extend(&values);
        let surrogate = Surrogate::from_solution(centers.clone(), coords.clone(), dim, &solution);
        let solution = solution.to_vec();
        Ok(Self {
            dim,
            duplicate_tolerance: tol,
            blocks,
            group,
            closure_cap,
            matrix: SymPacked::from_dmatrix(&a),
            inverse: SymPacked::from_dmatrix(&inverse),
            rhs,
            solution,
            centers,
            coords,
            surrogate,
            best,
            refactorizations: 0,
        })
    }

    pub fn surrogate(&self) -> &Surrogate {
        &self.surrogate
    }

    /// All centers, symmetric images included.
    pub fn centers(&self) -> &[EvaluationPoint] {
        &self.centers
    }

    /// Row-major center coordinates.
    pub fn center_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn best(&self) -> &EvaluationPoint {
        &self.best
    }

    pub fn duplicate_tolerance(&self) -> f64 {
        self.duplicate_tolerance
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    /// Number of full refactorizations triggered by failed residual checks.
    pub fn refactorizations(&self) -> usize {
        self.refactorizations
    }

    /// Whether `x` lies within the duplicate tolerance of a center.
    pub fn is_center(&self, x: &[f64]) -> bool {
        is_duplicate(&self.centers, x, self.duplicate_tolerance)
    }

    /// Adds an evaluated point and its symmetric closure, refits, and updates
    /// the running maximum.
    ///
    /// Images that duplicate existing centers are skipped. If the refit fails
    /// even after refactorization, the surrogate is left unchanged and a
    /// degenerate-geometry error is returned; the running maximum still
    /// reflects the new point.
    pub fn update(&mut self, point: EvaluationPoint) -> Result<UpdateReport, SurrogateError> {
        if point.dim() != self.dim {
            return Err(SurrogateError::DimensionMismatch {
                expected: self.dim,
                found: point.dim(),
            });
        }
        if !point.is_finite() {
            return Err(SurrogateError::NonFinite {
                index: self.centers.len(),
            });
        }
        let improved = point.value > self.best.value;
        if improved {
            self.best = point.clone();
        }
        let orbit = symmetric_closure(
            &point,
            &self.blocks,
            &self.group,
            self.duplicate_tolerance,
            self.closure_cap,
        )?;
        let old_size = self.matrix.size;
        let old_centers = self.centers.len();
        let old_solution = self.solution.clone();
        let mut duplicates = 0;
        let mut bordered = true;
        for image in orbit {
            if self.is_center(&image.point) {
                duplicates += 1;
                continue;
            }
            if bordered {
                bordered = self.border(&image.point, image.value);
            } else {
                self.append_row(&image.point);
            }
            self.rhs.push(image.value);
            self.coords.extend(&image.point);
            self.centers.push(image);
        }
        let inserted = self.centers.len() - old_centers;
        if inserted == 0 {
            return Ok(UpdateReport {
                inserted,
                duplicates,
                improved,
                refactorized: false,
            });
        }

        let mut refactorized = false;
        let solution = match bordered.then(|| self.check_solution()).flatten() {
            Some(z) => z,
            None => {
                refactorized = true;
                self.refactorizations += 1;
                match self.refactorize() {
                    Some(z) => z,
                    None => {
                        let err = super::degenerate(&self.centers);
                        self.rollback(old_size, old_centers);
                        self.solution = old_solution;
                        return Err(err);
                    }
                }
            }
        };
        self.surrogate = Surrogate::from_solution(
            self.centers.clone(),
            self.coords.clone(),
            self.dim,
            &solution,
        );
        self.solution = solution;
        Ok(UpdateReport {
            inserted,
            duplicates,
            improved,
            refactorized,
        })
    }

    fn border_vector(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut b = Vec::with_capacity(self.matrix.size);
        b.extend_from_slice(x);
        b.push(1.0);
        for c in self.coords.chunks_exact(n) {
            b.push(phi_sq(squared_distance(x, c)));
        }
        b
    }

    fn append_row(&mut self, x: &[f64]) {
        let b = self.border_vector(x);
        self.matrix.push_border(&b, 0.0);
    }

    /// Borders the matrix and its inverse. Returns `false` if the Schur
    /// complement is unusable, leaving the inverse stale.
    fn border(&mut self, x: &[f64], value: f64) -> bool {
        let b = self.border_vector(x);
        let size = self.inverse.size;
        let mut u = vec![0.0; size];
        self.inverse.mul_vec(&b, &mut u);
        let schur = -super::dot(&b, &u);
        self.matrix.push_border(&b, 0.0);
        if !schur.is_finite() || schur.abs() < f64::MIN_POSITIVE * 1e10 {
            return false;
        }
        let inv = &mut self.inverse;
        inv.rank_one(1.0 / schur, &u);
        let border: Vec<f64> = u.iter().map(|v| -v / schur).collect();
        inv.push_border(&border, 1.0 / schur);
        let bz = super::dot(&b, &self.solution);
        let coef = (bz - value) / schur;
        for (z, ui) in self.solution.iter_mut().zip(&u) {
            *z += coef * ui;
        }
        self.solution.push((value - bz) / schur);
        true
    }

    /// Checks the bordered solution, refining once with the inverse if
    /// needed; `None` if the residual check still fails.
    fn check_solution(&self) -> Option<Vec<f64>> {
        let size = self.matrix.size;
        let mut z = self.solution.clone();
        let mut az = vec![0.0; size];
        for attempt in 0..2 {
            self.matrix.mul_vec(&z, &mut az);
            let r: Vec<f64> = self.rhs.iter().zip(&az).map(|(b, a)| b - a).collect();
            if self.residual_ok(&z, &r) {
                return Some(z);
            }

            if attempt == 0 {
                let mut dz = vec![0.0; size];
                self.inverse.mul_vec(&r, &mut dz);
                for (zi, d) in z.iter_mut().zip(&dz) {
                    *zi += d;
                }
            }
        }
        None
    }

    fn residual_ok(&self, z: &[f64], r: &[f64]) -> bool {
        let n = self.dim;
        if z.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let k = self.centers.len();
        let wmax = z[n + 1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let orth_tol = 0.5 * INTERPOLATION_TOLERANCE * k as f64 * wmax.max(f64::MIN_POSITIVE);
        r[..=n].iter().all(|v| v.abs() <= orth_tol)
            && r[n + 1..]
                .iter()
                .zip(&self.rhs[n + 1..])
                .all(|(v, f)| v.abs() <= 0.5 * INTERPOLATION_TOLERANCE * (1.0 + f.abs()))
    }

    fn refactorize(&mut self) -> Option<Vec<f64>> {
        let a = self.matrix.to_dmatrix();
        let values = &self.rhs[self.dim + 1..];
        let (z, inv) = solve_dense_with_inverse(&a, values, self.dim, true)?;
        self.inverse = SymPacked::from_dmatrix(&inv.expect("inverse requested"));
        Some(z)
    }

    fn rollback(&mut self, size: usize, centers: usize) {
        self.matrix.truncate(size);
        self.rhs.truncate(size);
        self.centers.truncate(centers);
        self.coords.truncate(centers * self.dim);
        // The old inverse was overwritten; rebuild it from the old system.
        if let Some((_, Some(inv))) = solve_dense_with_inverse(
            &self.matrix.to_dmatrix(),
            &self.rhs[self.dim + 1..],
            self.dim,
            true,
        ) {
            self.inverse = SymPacked::from_dmatrix(&inv);
        }
    }
}

fn is_duplicate(centers: &[EvaluationPoint], x: &[f64], tol: f64) -> bool {
    let tol2 = tol * tol;
    centers.iter().any(|c| {
        let d2 = squared_distance(&c.point, x);
        d2 < tol2 || d2 == 0.0
    })
}
