//! Grid coverage by cameras with a limited field of view and occluding
//! rectangles.
//!
//! Each camera block is `(x, y, heading)`. A free cell is seen when its
//! center is within range, inside the view wedge, and the sight segment does
//! not touch any obstacle (touching the boundary blocks the view).

use std::f64::consts::{PI, TAU};

use super::{DecomposedObjective, Decomposition, ObjectiveError};
use crate::blocks::BlockStructure;
use crate::domain::BoxDomain;
use crate::surrogate::SymmetryGroup;

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Whether the closed segment `p -> q` meets the closed rectangle.
    pub fn meets_segment(&self, p: (f64, f64), q: (f64, f64)) -> bool {
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let d = (q.0 - p.0, q.1 - p.1);
        for (origin, dir, lo, hi) in [
            (p.0, d.0, self.x_min, self.x_max),
            (p.1, d.1, self.y_min, self.y_max),
        ] {
            if dir == 0.0 {
                if origin < lo || origin > hi {
                    return false;
                }
                continue;
            }
            let a = (lo - origin) / dir;
            let b = (hi - origin) / dir;
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

/// A rectangular room on a regular grid, plus the camera model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageScene {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Rect>,
    /// Cells per meter.
    pub resolution: f64,
    /// Half-angle of the view wedge, radians, in `(0, pi]`.
    pub fov_half_angle: f64,
    pub range: f64,
    pub cameras: usize,
}

impl CoverageScene {
    pub fn validate(&self) -> Result<(), ObjectiveError> {
        let bad = |msg: String| Err(ObjectiveError::Invalid(msg));
        if !(self.width > 0.0
            && self.width.is_finite()
            && self.height > 0.0
            && self.height.is_finite())
        {
            return bad(format!(
                "scene size {} x {} must be positive",
                self.width, self.height
            ));
        }
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return bad(format!("resolution {} must be positive", self.resolution));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= PI) {
            return bad(format!(
                "fov half-angle {} must lie in (0, pi]",
                self.fov_half_angle
            ));
        }
        if self.range.is_nan() || self.range <= 0.0 {
            return bad(format!("range {} must be positive", self.range));
        }
        if self.cameras == 0 {
            return bad("at least one camera is required".into());
        }
        for (i, r) in self.obstacles.iter().enumerate() {
            if !(r.x_min < r.x_max && r.y_min < r.y_max) {
                return bad(format!("obstacle {i} is empty"));
            }
            if r.x_min < 0.0 || r.y_min < 0.0 || r.x_max > self.width || r.y_max > self.height {
                return bad(format!("obstacle {i} extends past the scene box"));
            }
        }
        if self.free_cells().is_empty() {
            return bad("the grid has no free cell".into());
        }
        Ok(())
    }

    /// Columns and rows of the grid.
    pub fn grid(&self) -> (usize, usize) {
        (
            ((self.width * self.resolution).round() as usize).max(1),
            ((self.height * self.resolution).round() as usize).max(1),
        )
    }

    /// Centers of cells not covered by an obstacle, row by row.
    pub fn free_cells(&self) -> Vec<(f64, f64)> {
        let (nx, ny) = self.grid();
        let (cw, ch) = (self.width / nx as f64, self.height / ny as f64);
        let mut cells = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let c = ((i as f64 + 0.5) * cw, (j as f64 + 0.5) * ch);
                if !self.obstacles.iter().any(|r| r.contains(c.0, c.1)) {
                    cells.push(c);
                }
            }
        }
        cells
    }

    /// Domain of one camera block: position in the room, heading in `[0, 2 pi]`.
    pub fn domain(&self) -> BoxDomain {
        let mut lower = Vec::with_capacity(3 * self.cameras);
        let mut upper = Vec::with_capacity(3 * self.cameras);
        for _ in 0..self.cameras {
            lower.extend_from_slice(&[0.0, 0.0, 0.0]);
            upper.extend_from_slice(&[self.width, self.height, TAU]);
        }
        BoxDomain::new(lower, upper).expect("validated scene")
    }
}

/// Bitset over free cells.
pub type CellSet = Vec<u64>;

#[derive(Debug, Clone)]
pub struct Coverage {
    scene: CoverageScene,
    cells: Vec<(f64, f64)>,
    blocks: BlockStructure,
}

impl Coverage {
    pub fn scene(&self) -> &CoverageScene {
        &self.scene
    }

    pub fn free_cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[(f64, f64)] {
        &self.cells
    }

    /// Whether a camera at `(x, y)` facing `heading` sees cell center `c`.
    pub fn sees(&self, x: f64, y: f64, heading: f64, c: (f64, f64)) -> bool {
        let (dx, dy) = (c.0 - x, c.1 - y);
        let dist2 = dx * dx + dy * dy;
        if dist2 > self.scene.range * self.scene.range {
            return false;
        }
        if dist2 > 0.0 && self.scene.fov_half_angle < PI {
            let mut diff = dy.atan2(dx) - heading;
            diff = (diff + PI).rem_euclid(TAU) - PI;
            if diff.abs() > self.scene.fov_half_angle + 1e-12 {
                return false;
            }
        }
        !self
            .scene
            .obstacles
            .iter()
            .any(|r| r.meets_segment((x, y), c))
    }

    /// Cells seen by one camera.
    pub fn visible(&self, params: &[f64]) -> CellSet {
        let mut set = vec![0u64; self.cells.len().div_ceil(64)];
        let (x, y, heading) = (params[0], params[1], params[2]);
        if self.scene.obstacles.iter().any(|r| r.contains(x, y)) {
            return set;
        }
        for (i, &c) in self.cells.iter().enumerate() {
            if self.sees(x, y, heading, c) {
                set[i / 64] |= 1 << (i % 64);
            }
        }
        set
    }
}

impl Decomposition for Coverage {
    type Observation = CellSet;

    fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    fn observe(&self, _block: usize, params: &[f64]) -> CellSet {
        self.visible(params)
    }

    fn fuse(&self, obs: &[&CellSet]) -> f64 {
        let words = self.cells.len().div_ceil(64);
        let covered: u32 = (0..words)
            .map(|w| obs.iter().fold(0u64, |acc, o| acc | o[w]).count_ones())
            .sum();
        covered as f64 / self.cells.len() as f64
    }
}

/// Fraction of free cells seen by at least one camera.
pub fn coverage_objective(
    scene: CoverageScene,
) -> Result<DecomposedObjective<Coverage>, ObjectiveError> {
    scene.validate()?;
    let m = scene.cameras;
    let domain = scene.domain();
    let cells = scene.free_cells();
    let symmetry = if m <= 8 {
        SymmetryGroup::full(m)
    } else {
        SymmetryGroup::identity(m)
    };
    DecomposedObjective::new(
        format!("coverage({m} cameras)"),
        Coverage {
            scene,
            cells,
            blocks: BlockStructure::uniform(m, 3).expect("width 3"),
        },
        domain,
        symmetry,
        None,
    )
}
