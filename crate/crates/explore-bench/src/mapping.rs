//! Online occupancy belief: log-odds fusion of LiDAR scans under known
//! pose, explored-area accounting and PGM snapshot export.

use crate::geom::{GridCell, GridGeometry};
use crate::raycast::RayTraversal;
use crate::sensing::LidarScan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Unknown,
    Free,
    Occupied,
}

#[derive(Debug, Clone, Copy)]
pub struct BeliefParams {
    pub l_free_increment: f64,
    pub l_occ_increment: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_free_threshold: f64,
    pub l_occ_threshold: f64,
}

impl Default for BeliefParams {
    fn default() -> Self {
        Self {
            l_free_increment: -0.4,
            l_occ_increment: 0.85,
            l_min: -4.0,
            l_max: 4.0,
            l_free_threshold: -0.5,
            l_occ_threshold: 0.5,
        }
    }
}

/// The robot's occupancy belief over the same geometry as the ground
/// truth. One instance per mission, mutated only by its mission loop.
#[derive(Debug, Clone)]
pub struct BeliefMap {
    pub geom: GridGeometry,
    pub params: BeliefParams,
    log_odds: Vec<f64>,
    updated: Vec<bool>,
    /// Cells that have ever classified non-Unknown; drives the monotone
    /// explored-area counter.
    observed: Vec<bool>,
    observed_count: usize,
}

impl BeliefMap {
    pub fn new(geom: GridGeometry, params: BeliefParams) -> Self {
        Self {
            geom,
            params,
            log_odds: vec![0.0; geom.len()],
            updated: vec![false; geom.len()],
            observed: vec![false; geom.len()],
            observed_count: 0,
        }
    }

    pub fn log_odds(&self, c: GridCell) -> f64 {
        self.log_odds[self.geom.index(c)]
    }

    pub fn classify(&self, c: GridCell) -> CellClass {
        let idx = self.geom.index(c);
        if !self.updated[idx] {
            return CellClass::Unknown;
        }
        let l = self.log_odds[idx];
        if l <= self.params.l_free_threshold {
            CellClass::Free
        } else if l >= self.params.l_occ_threshold {
            CellClass::Occupied
        } else {
            CellClass::Unknown
        }
    }

    pub fn is_free(&self, c: GridCell) -> bool {
        self.geom.contains(c) && self.classify(c) == CellClass::Free
    }

    pub fn is_unknown(&self, c: GridCell) -> bool {
        !self.geom.contains(c) || self.classify(c) == CellClass::Unknown
    }

    pub fn is_occupied(&self, c: GridCell) -> bool {
        self.geom.contains(c) && self.classify(c) == CellClass::Occupied
    }

    fn bump(&mut self, c: GridCell, delta: f64) {
        let idx = self.geom.index(c);
        self.updated[idx] = true;
        self.log_odds[idx] =
            (self.log_odds[idx] + delta).clamp(self.params.l_min, self.params.l_max);
        if !self.observed[idx] && self.classify(c) != CellClass::Unknown {
            self.observed[idx] = true;
            self.observed_count += 1;
        }
    }

    /// Force a cell to a class with saturated log-odds. Intended for
    /// constructing synthetic beliefs (tests, tools); `Unknown` resets
    /// the cell to never-updated but leaves the explored counter alone.
    pub fn force_class(&mut self, c: GridCell, class: CellClass) {
        let idx = self.geom.index(c);
        match class {
            CellClass::Free => {
                self.updated[idx] = true;
                self.log_odds[idx] = self.params.l_min;
            }
            CellClass::Occupied => {
                self.updated[idx] = true;
                self.log_odds[idx] = self.params.l_max;
            }
            CellClass::Unknown => {
                self.updated[idx] = false;
                self.log_odds[idx] = 0.0;
            }
        }
        if !self.observed[idx] && self.classify(c) != CellClass::Unknown {
            self.observed[idx] = true;
            self.observed_count += 1;
        }
    }

    /// Fuse one scan: cells traversed by each beam get the free-space
    /// increment, the hit cell (if any) gets the occupied increment.
    /// Beam segments leaving the grid are clipped.
    pub fn integrate_scan(&mut self, scan: &LidarScan) {
        for i in 0..scan.ranges.len() {
            let range = scan.ranges[i];
            let angle = scan.beam_angle(i);
            let hit = scan.is_hit(i);
            let steps: Vec<_> =
                RayTraversal::new(self.geom, scan.origin, angle, range + 1e-9).collect();
            let n = steps.len();
            // With noise the measured endpoint can fall mid-cell; accept
            // the final cell as the hit cell when it is within one cell
            // diagonal of the measured range.
            let diag = self.geom.resolution * std::f64::consts::SQRT_2;
            for (k, step) in steps.iter().enumerate() {
                let last = k + 1 == n;
                if hit && last && range - step.entry_distance <= diag + 1e-9 {
                    self.bump(step.cell, self.params.l_occ_increment);
                } else {
                    self.bump(step.cell, self.params.l_free_increment);
                }
            }
        }
    }

    /// Explored area in square meters; monotonically non-decreasing.
    pub fn explored_area(&self) -> f64 {
        self.observed_count as f64 * self.geom.resolution * self.geom.resolution
    }

    /// Area of cells currently classified Free, in square meters.
    pub fn free_area(&self) -> f64 {
        let free = (0..self.geom.len())
            .filter(|i| {
                self.updated[*i] && self.log_odds[*i] <= self.params.l_free_threshold
            })
            .count();
        free as f64 * self.geom.resolution * self.geom.resolution
    }

    /// Iterate cells currently classified Occupied.
    pub fn occupied_cells(&self) -> impl Iterator<Item = GridCell> + '_ {
        (0..self.geom.len()).filter_map(move |i| {
            (self.updated[i] && self.log_odds[i] >= self.params.l_occ_threshold)
                .then(|| self.geom.cell_at(i))
        })
    }

    /// True when no occupied cell center lies within `radius` of `p`.
    pub fn clear_of_occupied(&self, p: crate::geom::WorldPoint, radius: f64) -> bool {
        let center = self.geom.cell_of_unclamped(p);
        let r_cells = (radius / self.geom.resolution).ceil() as i64 + 1;
        for dr in -r_cells..=r_cells {
            for dc in -r_cells..=r_cells {
                let c = GridCell::new(center.row + dr, center.col + dc);
                if self.geom.contains(c)
                    && self.is_occupied(c)
                    && p.distance_to(self.geom.center_of(c)) < radius
                {
                    return false;
                }
            }
        }
        true
    }

    /// ASCII PGM (P2) snapshot: 0 occupied, 254 free, 205 unknown.
    pub fn to_pgm(&self) -> String {
        let mut out = String::with_capacity(self.geom.len() * 4 + 64);
        out.push_str(&format!("P2\n{} {}\n255\n", self.geom.width, self.geom.height));
        for row in (0..self.geom.height as i64).rev() {
            let mut line = String::with_capacity(self.geom.width * 4);
            for col in 0..self.geom.width as i64 {
                let v = match self.classify(GridCell::new(row, col)) {
                    CellClass::Occupied => 0,
                    CellClass::Free => 254,
                    CellClass::Unknown => 205,
                };
                if col > 0 {
                    line.push(' ');
                }
                line.push_str(&v.to_string());
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
