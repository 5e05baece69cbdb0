//! Ground-truth environments: map file parsing, validation, bundled maps
//! and the procedural category generator.

use crate::geom::{GridCell, GridGeometry, WorldPoint, NEIGHBORS_8};
use thiserror::Error;

pub mod generate;

/// Default clearance (meters) an entry point must keep from obstacles.
pub const ROBOT_CLEARANCE: f64 = 0.26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Occupied,
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("generation failed for {category:?} after {attempts} attempts")]
    Generation {
        category: generate::Category,
        attempts: usize,
    },
}

/// The true environment geometry: a closed-world binary occupancy grid
/// with entry points. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMap {
    pub name: String,
    pub geom: GridGeometry,
    cells: Vec<Cell>,
    pub entry_points: Vec<WorldPoint>,
    total_free_area: f64,
}

impl GroundTruthMap {
    /// Build and validate a map from raw parts.
    pub fn new(
        name: String,
        geom: GridGeometry,
        cells: Vec<Cell>,
        entry_points: Vec<WorldPoint>,
    ) -> Result<Self, MapError> {
        if cells.len() != geom.len() {
            return Err(MapError::Validation(format!(
                "cell count {} does not match {}x{}",
                cells.len(),
                geom.width,
                geom.height
            )));
        }
        let free_cells = cells.iter().filter(|c| **c == Cell::Free).count();
        let map = Self {
            name,
            geom,
            cells,
            entry_points,
            total_free_area: free_cells as f64 * geom.resolution * geom.resolution,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<(), MapError> {
        // Closed world: the boundary ring must be fully occupied.
        for col in 0..self.geom.width as i64 {
            for row in [0, self.geom.height as i64 - 1] {
                if self.cell(GridCell::new(row, col)) != Cell::Occupied {
                    return Err(MapError::Validation(format!(
                        "open boundary at row {row}, col {col}"
                    )));
                }
            }
        }
        for row in 0..self.geom.height as i64 {
            for col in [0, self.geom.width as i64 - 1] {
                if self.cell(GridCell::new(row, col)) != Cell::Occupied {
                    return Err(MapError::Validation(format!(
                        "open boundary at row {row}, col {col}"
                    )));
                }
            }
        }
        for (i, p) in self.entry_points.iter().enumerate() {
            let cell = self.geom.cell_of(*p).ok_or_else(|| {
                MapError::Validation(format!("entry point {i} ({}, {}) out of bounds", p.x, p.y))
            })?;
            if self.cell(cell) != Cell::Free {
                return Err(MapError::Validation(format!(
                    "entry point {i} ({}, {}) lies in an occupied cell",
                    p.x, p.y
                )));
            }
            let clear = self.clearance_at(*p, ROBOT_CLEARANCE + self.geom.resolution);
            if clear < ROBOT_CLEARANCE {
                return Err(MapError::Validation(format!(
                    "entry point {i} ({}, {}) has clearance {clear:.3} m < {ROBOT_CLEARANCE} m",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    pub fn cell(&self, c: GridCell) -> Cell {
        self.cells[self.geom.index(c)]
    }

    pub fn is_free(&self, c: GridCell) -> bool {
        self.geom.contains(c) && self.cell(c) == Cell::Free
    }

    pub fn is_free_at(&self, p: WorldPoint) -> bool {
        self.geom.cell_of(p).map_or(false, |c| self.cell(c) == Cell::Free)
    }

    /// Total free area in square meters (free cell count x resolution^2).
    pub fn free_area(&self) -> f64 {
        self.total_free_area
    }

    pub fn free_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    /// Distance from a point to the nearest occupied cell center, scanned
    /// within `max_radius`. Returns `max_radius` when none is closer.
    pub fn clearance_at(&self, p: WorldPoint, max_radius: f64) -> f64 {
        let center = self.geom.cell_of_unclamped(p);
        let r_cells = (max_radius / self.geom.resolution).ceil() as i64 + 1;
        let mut best = max_radius;
        for dr in -r_cells..=r_cells {
            for dc in -r_cells..=r_cells {
                let c = GridCell::new(center.row + dr, center.col + dc);
                if self.geom.contains(c) && self.cell(c) == Cell::Occupied {
                    let d = p.distance_to(self.geom.center_of(c));
                    if d < best {
                        best = d;
                    }
                }
            }
        }
        best
    }

    /// Cells reachable from `start` through 8-connected free space.
    pub fn flood_fill_free(&self, start: GridCell) -> Vec<bool> {
        let mut reached = vec![false; self.geom.len()];
        if !self.is_free(start) {
            return reached;
        }
        let mut queue = std::collections::VecDeque::new();
        reached[self.geom.index(start)] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for (dr, dc) in NEIGHBORS_8 {
                let n = GridCell::new(c.row + dr, c.col + dc);
                if self.is_free(n) && !reached[self.geom.index(n)] {
                    reached[self.geom.index(n)] = true;
                    queue.push_back(n);
                }
            }
        }
        reached
    }

    /// True when every free cell is reachable from every entry point.
    pub fn fully_connected(&self) -> bool {
        let free_total = self.free_cell_count();
        self.entry_points.iter().all(|p| {
            let start = match self.geom.cell_of(*p) {
                Some(c) => c,
                None => return false,
            };
            let reached = self.flood_fill_free(start);
            reached.iter().filter(|r| **r).count() == free_total
        })
    }

    /// Serialize back to the map file format.
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(self.geom.len() + 256);
        out.push_str(&format!("name {}\n", self.name));
        out.push_str(&format!("resolution {}\n", self.geom.resolution));
        out.push_str(&format!("origin {} {}\n", self.geom.origin.x, self.geom.origin.y));
        out.push_str("entries");
        for p in &self.entry_points {
            out.push_str(&format!(" {},{}", p.x, p.y));
        }
        out.push('\n');
        // Rows are written top (max y) first.
        for row in (0..self.geom.height as i64).rev() {
            for col in 0..self.geom.width as i64 {
                out.push(match self.cell(GridCell::new(row, col)) {
                    Cell::Free => '.',
                    Cell::Occupied => '#',
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Parse a map from its text form. See the crate README for the format.
pub fn load_map(text: &str) -> Result<GroundTruthMap, MapError> {
    let mut lines = text.lines().enumerate();

    let parse_err = |line: usize, reason: &str| MapError::Parse {
        line: line + 1,
        reason: reason.to_string(),
    };

    let (ln, name_line) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty map file"))?;
    let name = name_line
        .strip_prefix("name ")
        .ok_or_else(|| parse_err(ln, "expected `name <label>`"))?
        .trim()
        .to_string();

    let (ln, res_line) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing resolution line"))?;
    let resolution: f64 = res_line
        .strip_prefix("resolution ")
        .ok_or_else(|| parse_err(ln, "expected `resolution <m>`"))?
        .trim()
        .parse()
        .map_err(|_| parse_err(ln, "resolution is not a number"))?;
    if resolution <= 0.0 {
        return Err(parse_err(ln, "resolution must be > 0"));
    }

    let (ln, origin_line) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing origin line"))?;
    let origin_parts: Vec<&str> = origin_line
        .strip_prefix("origin ")
        .ok_or_else(|| parse_err(ln, "expected `origin <x> <y>`"))?
        .split_whitespace()
        .collect();
    if origin_parts.len() != 2 {
        return Err(parse_err(ln, "origin needs exactly two coordinates"));
    }
    let ox: f64 = origin_parts[0]
        .parse()
        .map_err(|_| parse_err(ln, "origin x is not a number"))?;
    let oy: f64 = origin_parts[1]
        .parse()
        .map_err(|_| parse_err(ln, "origin y is not a number"))?;

    let (ln, entries_line) = lines
        .next()
        .ok_or_else(|| parse_err(3, "missing entries line"))?;
    let entries_str = entries_line
        .strip_prefix("entries")
        .ok_or_else(|| parse_err(ln, "expected `entries <x,y> ...`"))?;
    let mut entry_points = Vec::new();
    for tok in entries_str.split_whitespace() {
        let (xs, ys) = tok
            .split_once(',')
            .ok_or_else(|| parse_err(ln, "entry must be `x,y`"))?;
        let x: f64 = xs.parse().map_err(|_| parse_err(ln, "entry x is not a number"))?;
        let y: f64 = ys.parse().map_err(|_| parse_err(ln, "entry y is not a number"))?;
        entry_points.push(WorldPoint::new(x, y));
    }

    let mut rows: Vec<(usize, Vec<Cell>)> = Vec::new();
    let mut width = None;
    for (ln, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(line.len());
        for ch in line.chars() {
            row.push(match ch {
                '.' => Cell::Free,
                '#' => Cell::Occupied,
                other => return Err(parse_err(ln, &format!("unexpected character `{other}`"))),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(
                    ln,
                    &format!("row has {} cells, expected {w}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push((ln, row));
    }
    let width = width.ok_or_else(|| parse_err(4, "no grid rows"))?;
    let height = rows.len();

    // File rows are top-first; storage row 0 is the bottom.
    let mut cells = vec![Cell::Free; width * height];
    for (i, (_, row)) in rows.iter().enumerate() {
        let grid_row = height - 1 - i;
        cells[grid_row * width..(grid_row + 1) * width].copy_from_slice(row);
    }

    GroundTruthMap::new(
        name,
        GridGeometry::new(width, height, resolution, WorldPoint::new(ox, oy)),
        cells,
        entry_points,
    )
}

/// The six bundled environments matching the benchmark table
/// (room, apartment, office, hallway, maze house, school).
pub mod bundled {
    use super::{load_map, GroundTruthMap};

    macro_rules! bundled_map {
        ($fn_name:ident, $file:literal) => {
            pub fn $fn_name() -> GroundTruthMap {
                load_map(include_str!(concat!("../maps/", $file)))
                    .expect(concat!("bundled map ", $file, " is valid"))
            }
        };
    }

    bundled_map!(room, "room.map");
    bundled_map!(apartment, "apartment.map");
    bundled_map!(office, "office.map");
    bundled_map!(hallway, "hallway.map");
    bundled_map!(maze_house, "maze_house.map");
    bundled_map!(school, "school.map");

    pub const NAMES: [&str; 6] = [
        "room",
        "apartment",
        "office",
        "hallway",
        "maze_house",
        "school",
    ];

    pub fn by_name(name: &str) -> Option<GroundTruthMap> {
        match name {
            "room" => Some(room()),
            "apartment" => Some(apartment()),
            "office" => Some(office()),
            "hallway" => Some(hallway()),
            "maze_house" => Some(maze_house()),
            "school" => Some(school()),
            _ => None,
        }
    }
}
