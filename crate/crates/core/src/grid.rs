//! Birth-aware occupancy grid over undiscovered objects.
//!
//! Each cell holds the probability that it contains at least one undiscovered
//! object. Cells evolve through the same birth/survival recursion as tracks
//! and are updated with the empty-measurement operator — seeing nothing where
//! the sensor can see is evidence of absence. Tracked objects never touch the
//! grid; discovered and undiscovered state are independent.

use crate::model::{AgentPose, Bounds};
use crate::sensing::{detection_probability, SensorModel};

/// Placement and resolution of the grid over the survey area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: [f64; 2],
    pub cell_width: f64,
    pub cell_height: f64,
    pub rows: usize,
    pub cols: usize,
}

impl GridGeometry {
    /// Covers `bounds` with `rows × cols` cells.
    pub fn covering(bounds: Bounds, rows: usize, cols: usize) -> Self {
        Self {
            origin: bounds.min,
            cell_width: bounds.width() / cols as f64,
            cell_height: bounds.height() / rows as f64,
            rows,
            cols,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Centre of cell `(row, col)`.
    pub fn cell_center(&self, row: usize, col: usize) -> [f64; 2] {
        [
            self.origin[0] + (col as f64 + 0.5) * self.cell_width,
            self.origin[1] + (row as f64 + 0.5) * self.cell_height,
        ]
    }

    /// Row-major index of cell `(row, col)`.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Half-open row/column ranges of cells whose centres may lie within
    /// `radius` of a planar point.
    pub fn ranges_near(
        &self,
        point: [f64; 2],
        radius: f64,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let col_lo = ((point[0] - radius - self.origin[0]) / self.cell_width - 0.5).floor();
        let col_hi = ((point[0] + radius - self.origin[0]) / self.cell_width - 0.5).ceil();
        let row_lo = ((point[1] - radius - self.origin[1]) / self.cell_height - 0.5).floor();
        let row_hi = ((point[1] + radius - self.origin[1]) / self.cell_height - 0.5).ceil();
        let clamp = |v: f64, hi: usize| -> usize {
            if v < 0.0 {
                0
            } else {
                (v as usize).min(hi)
            }
        };
        (
            clamp(row_lo, self.rows)..clamp(row_hi + 1.0, self.rows),
            clamp(col_lo, self.cols)..clamp(col_hi + 1.0, self.cols),
        )
    }
}

/// Occupancy grid state: per-cell existence probabilities plus the shared
/// birth/survival parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub geometry: GridGeometry,
    /// Row-major cell probabilities.
    pub cells: Vec<f64>,
    pub birth_prob: f64,
    pub survival_prob: f64,
}

impl OccupancyGrid {
    /// Uniform initialisation at the birth prior, matching a scene with no
    /// knowledge of undiscovered objects.
    pub fn new(geometry: GridGeometry, birth_prob: f64, survival_prob: f64) -> Self {
        Self {
            geometry,
            cells: vec![birth_prob; geometry.num_cells()],
            birth_prob,
            survival_prob,
        }
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        self.cells[self.geometry.index(row, col)]
    }

    /// Dense row-major matrix of the cell probabilities, for archiving.
    pub fn to_rows(&self) -> Vec<&[f64]> {
        self.cells.chunks(self.geometry.cols).collect()
    }
}

/// Birth/survival recursion for one cell.
#[inline]
pub fn predict_cell(r: f64, birth_prob: f64, survival_prob: f64) -> f64 {
    birth_prob * (1.0 - r) + r * survival_prob
}

/// Empty-measurement update operator for one cell given one agent's
/// detection probability at the cell centre.
#[inline]
pub fn update_cell_empty(r: f64, p_d: f64) -> f64 {
    let miss = (1.0 - p_d) * r;
    let denom = 1.0 - r + miss;
    if denom > 0.0 {
        miss / denom
    } else {
        // r = 1 and p_d = 1: certain object certainly seen, cell empties.
        0.0
    }
}

/// Prediction step: every cell through the birth/survival recursion.
#[must_use]
pub fn grid_predict(grid: &OccupancyGrid) -> OccupancyGrid {
    let mut out = grid.clone();
    for r in &mut out.cells {
        *r = predict_cell(*r, grid.birth_prob, grid.survival_prob);
    }
    out
}

/// Update step: sequential composition over agents of the empty-measurement
/// operator, with detection probability evaluated at cell centres. Cells
/// beyond every agent's sensing range are untouched.
#[must_use]
pub fn grid_update(
    grid: &OccupancyGrid,
    poses: &[AgentPose],
    sensor: &SensorModel,
) -> OccupancyGrid {
    let mut out = grid.clone();
    update_in_place(&mut out, poses, sensor);
    out
}

/// In-place variant used by the discovery-value rollout, which owns a
/// scratch grid. Only cells within sensing range are visited.
pub(crate) fn update_in_place(grid: &mut OccupancyGrid, poses: &[AgentPose], sensor: &SensorModel) {
    let geom = grid.geometry;
    let reach = sensor.max_range();
    for pose in poses {
        let (rows, cols) = geom.ranges_near([pose.px, pose.py], reach);
        for row in rows {
            for col in cols.clone() {
                let p_d = detection_probability(sensor, pose, geom.cell_center(row, col));
                if p_d > 0.0 {
                    let idx = geom.index(row, col);
                    grid.cells[idx] = update_cell_empty(grid.cells[idx], p_d);
                }
            }
        }
    }
}

/// Binary entropy of one cell in nats, with `0·ln 0 := 0`.
#[inline]
pub fn cell_entropy(r: f64) -> f64 {
    let side = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    side(r) + side(1.0 - r)
}

/// Shannon entropy of the whole grid in nats.
pub fn grid_entropy(grid: &OccupancyGrid) -> f64 {
    grid.cells.iter().map(|&r| cell_entropy(r)).sum()
}

/// Per-cell average entropy `H/N_g`, the Search Area Entropy indicator.
pub fn grid_entropy_per_cell(grid: &OccupancyGrid) -> f64 {
    grid_entropy(grid) / grid.geometry.num_cells() as f64
}
