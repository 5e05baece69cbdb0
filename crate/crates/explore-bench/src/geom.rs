//! World/grid geometry primitives shared by every subsystem.
//!
//! Convention: world coordinates are meters, y grows with grid row index.
//! `origin` is the world position of the lower-left corner of cell
//! (row 0, col 0); cell (r, c) covers the half-open square
//! `[origin + (c, r) * res, origin + (c + 1, r + 1) * res)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: WorldPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing from self to other, in (-pi, pi].
    pub fn bearing_to(&self, other: WorldPoint) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCell {
    pub row: i64,
    pub col: i64,
}

impl GridCell {
    pub const fn new(row: i64, col: i64) -> Self {
        Self { row, col }
    }
}

/// 8-neighborhood offsets, cardinals first.
pub const NEIGHBORS_8: [(i64, i64); 8] = [
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// 4-neighborhood offsets.
pub const NEIGHBORS_4: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Grid extent, resolution and placement in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: WorldPoint,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: WorldPoint) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            width,
            height,
            resolution,
            origin,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: GridCell) -> bool {
        c.row >= 0 && c.col >= 0 && (c.row as usize) < self.height && (c.col as usize) < self.width
    }

    /// Row-major index of an in-bounds cell.
    pub fn index(&self, c: GridCell) -> usize {
        debug_assert!(self.contains(c));
        c.row as usize * self.width + c.col as usize
    }

    pub fn cell_at(&self, index: usize) -> GridCell {
        GridCell::new((index / self.width) as i64, (index % self.width) as i64)
    }

    /// Cell containing a world point, or None when out of bounds.
    pub fn cell_of(&self, p: WorldPoint) -> Option<GridCell> {
        let c = self.cell_of_unclamped(p);
        self.contains(c).then_some(c)
    }

    /// Cell indices by floor division; may lie outside the grid.
    pub fn cell_of_unclamped(&self, p: WorldPoint) -> GridCell {
        GridCell::new(
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
        )
    }

    /// World position of a cell center.
    pub fn center_of(&self, c: GridCell) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (c.col as f64 + 0.5) * self.resolution,
            self.origin.y + (c.row as f64 + 0.5) * self.resolution,
        )
    }

    /// World-frame bounding box as (min, max) corners.
    pub fn world_bounds(&self) -> (WorldPoint, WorldPoint) {
        (
            self.origin,
            WorldPoint::new(
                self.origin.x + self.width as f64 * self.resolution,
                self.origin.y + self.height as f64 * self.resolution,
            ),
        )
    }

    pub fn neighbors8(&self, c: GridCell) -> impl Iterator<Item = GridCell> + '_ {
        NEIGHBORS_8
            .iter()
            .map(move |(dr, dc)| GridCell::new(c.row + dr, c.col + dc))
            .filter(|n| self.contains(*n))
    }
}

/// Normalize an angle to (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    } else if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Smallest signed difference a - b, normalized to (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom() -> GridGeometry {
        GridGeometry::new(20, 10, 0.1, WorldPoint::new(-1.0, -0.5))
    }

    #[test]
    fn center_round_trips() {
        let g = geom();
        for row in 0..10 {
            for col in 0..20 {
                let c = GridCell::new(row, col);
                assert_eq!(g.cell_of(g.center_of(c)), Some(c));
            }
        }
    }

    #[test]
    fn out_of_bounds_is_none() {
        let g = geom();
        assert_eq!(g.cell_of(WorldPoint::new(-1.01, 0.0)), None);
        assert_eq!(g.cell_of(WorldPoint::new(1.0, 0.0)), None);
    }

    #[test]
    fn angle_normalization() {
        assert!((normalize_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((angle_diff(0.1, -0.1) - 0.2).abs() < 1e-12);
        assert!((angle_diff(-3.0, 3.0) - (std::f64::consts::TAU - 6.0)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn arbitrary_in_bounds_point_round_trips(x in -0.999f64..0.999, y in -0.499f64..0.499) {
            let g = geom();
            let c = g.cell_of(WorldPoint::new(x, y)).unwrap();
            // The cell center maps back to the same cell.
            prop_assert_eq!(g.cell_of(g.center_of(c)), Some(c));
        }

        #[test]
        fn normalized_angles_in_range(a in -100.0f64..100.0) {
            let n = normalize_angle(a);
            prop_assert!(n > -std::f64::consts::PI - 1e-12 && n <= std::f64::consts::PI + 1e-12);
        }
    }
}
