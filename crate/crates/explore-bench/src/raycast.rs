//! Integer grid ray traversal (Amanatides & Woo style DDA).
//!
//! Shared by the LiDAR simulator and the belief-map update so both walk
//! exactly the same cell sequence for a given beam.

use crate::geom::{GridCell, GridGeometry, WorldPoint};

/// A cell crossed by a ray together with the distance along the ray at
/// which the ray enters it. The start cell is reported with distance 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayStep {
    pub cell: GridCell,
    pub entry_distance: f64,
}

/// Iterator over the grid cells a ray visits, in order, until it either
/// exceeds `max_distance` or leaves the grid.
pub struct RayTraversal {
    geom: GridGeometry,
    cell: GridCell,
    step_row: i64,
    step_col: i64,
    // Distance along the ray to the next row/col boundary crossing.
    t_max_row: f64,
    t_max_col: f64,
    t_delta_row: f64,
    t_delta_col: f64,
    t: f64,
    max_distance: f64,
    started: bool,
    done: bool,
}

impl RayTraversal {
    pub fn new(geom: GridGeometry, start: WorldPoint, angle: f64, max_distance: f64) -> Self {
        let dx = angle.cos();
        let dy = angle.sin();
        let cell = geom.cell_of_unclamped(start);
        let res = geom.resolution;

        let (step_col, t_max_col, t_delta_col) = axis_setup(
            start.x,
            dx,
            geom.origin.x + cell.col as f64 * res,
            res,
        );
        let (step_row, t_max_row, t_delta_row) = axis_setup(
            start.y,
            dy,
            geom.origin.y + cell.row as f64 * res,
            res,
        );

        let done = !geom.contains(cell);
        Self {
            geom,
            cell,
            step_row,
            step_col,
            t_max_row,
            t_max_col,
            t_delta_row,
            t_delta_col,
            t: 0.0,
            max_distance,
            started: false,
            done,
        }
    }
}

/// Per-axis DDA setup: step direction, distance to the first boundary
/// crossing, and distance between successive crossings.
fn axis_setup(pos: f64, dir: f64, cell_low: f64, res: f64) -> (i64, f64, f64) {
    if dir > 1e-12 {
        let next = cell_low + res;
        (1, (next - pos) / dir, res / dir)
    } else if dir < -1e-12 {
        (-1, (pos - cell_low) / -dir, res / -dir)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

impl Iterator for RayTraversal {
    type Item = RayStep;

    fn next(&mut self) -> Option<RayStep> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(RayStep {
                cell: self.cell,
                entry_distance: 0.0,
            });
        }
        if self.t_max_col < self.t_max_row {
            self.t = self.t_max_col;
            self.t_max_col += self.t_delta_col;
            self.cell.col += self.step_col;
        } else {
            self.t = self.t_max_row;
            self.t_max_row += self.t_delta_row;
            self.cell.row += self.step_row;
        }
        if self.t > self.max_distance || !self.geom.contains(self.cell) {
            self.done = true;
            return None;
        }
        Some(RayStep {
            cell: self.cell,
            entry_distance: self.t,
        })
    }
}
