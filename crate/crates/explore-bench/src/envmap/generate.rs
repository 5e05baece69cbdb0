//! Seeded procedural environments for the six benchmark categories.
//!
//! These stand in for the third-party simulation worlds the benchmark
//! dimensions were taken from: each category reproduces the tabulated
//! footprint and complexity class with deterministic, seed-controlled
//! interior structure.

use super::{Cell, GroundTruthMap, MapError};
use crate::geom::{GridCell, GridGeometry, WorldPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_RESOLUTION: f64 = 0.1;
const WALL_THICKNESS: f64 = 0.2;
const DOOR_WIDTH: f64 = 1.2;
const ENTRY_CARVE_RADIUS: f64 = 0.6;
const MAX_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Room,
    Apartment,
    Office,
    Hallway,
    MazeHouse,
    School,
}

impl Category {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "room" => Some(Self::Room),
            "apartment" => Some(Self::Apartment),
            "office" => Some(Self::Office),
            "hallway" => Some(Self::Hallway),
            "maze_house" => Some(Self::MazeHouse),
            "school" => Some(Self::School),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Room => "room",
            Self::Apartment => "apartment",
            Self::Office => "office",
            Self::Hallway => "hallway",
            Self::MazeHouse => "maze_house",
            Self::School => "school",
        }
    }

    /// Footprint (meters) and world origin of the lower-left corner.
    pub fn dimensions(&self) -> (f64, f64, WorldPoint) {
        match self {
            Self::Room => (10.0, 10.0, WorldPoint::new(-5.0, -5.0)),
            Self::Apartment => (10.0, 10.0, WorldPoint::new(-5.0, -5.0)),
            Self::Office => (20.0, 11.0, WorldPoint::new(-10.0, -5.5)),
            Self::Hallway => (20.0, 22.0, WorldPoint::new(-10.0, -11.0)),
            // Placed so the benchmark entry (-9, 14) is interior.
            Self::MazeHouse => (20.0, 20.0, WorldPoint::new(-10.0, -5.0)),
            Self::School => (70.0, 70.0, WorldPoint::new(-35.0, -35.0)),
        }
    }

    /// The two benchmark entry points per environment.
    pub fn entry_points(&self) -> [WorldPoint; 2] {
        match self {
            Self::Room => [WorldPoint::new(-3.0, -3.0), WorldPoint::new(0.0, 3.0)],
            Self::Apartment => [WorldPoint::new(3.8, -0.8), WorldPoint::new(-2.5, 2.5)],
            Self::Office => [WorldPoint::new(-8.5, -4.0), WorldPoint::new(8.0, 5.0)],
            Self::Hallway => [WorldPoint::new(8.0, 8.0), WorldPoint::new(-8.0, 0.0)],
            Self::MazeHouse => [WorldPoint::new(-9.0, 14.0), WorldPoint::new(8.0, -2.0)],
            Self::School => [WorldPoint::new(-5.0, -22.0), WorldPoint::new(16.5, 30.0)],
        }
    }

    pub const ALL: [Category; 6] = [
        Category::Room,
        Category::Apartment,
        Category::Office,
        Category::Hallway,
        Category::MazeHouse,
        Category::School,
    ];
}

/// Generate a category environment. Deterministic in (category, seed);
/// retries internal layouts (still seed-derived) when a layout fails
/// validation, and errors after a bounded number of attempts.
pub fn generate_environment(category: Category, seed: u64) -> Result<GroundTruthMap, MapError> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(attempt as u64));
        let builder = match category {
            Category::Room => build_room(&mut rng),
            Category::Apartment => build_apartment(&mut rng),
            Category::Office => build_office(&mut rng),
            Category::Hallway => build_hallway(&mut rng),
            Category::MazeHouse => build_maze_house(&mut rng),
            Category::School => build_school(&mut rng),
        };
        if let Ok(map) = builder.finish(category.name(), category.entry_points().to_vec()) {
            if map.fully_connected() {
                return Ok(map);
            }
        }
    }
    Err(MapError::Generation {
        category,
        attempts: MAX_ATTEMPTS,
    })
}

/// Grid under construction, addressed in world coordinates.
pub struct Builder {
    geom: GridGeometry,
    cells: Vec<Cell>,
}

impl Builder {
    fn for_category(category: Category) -> Self {
        let (w, h, origin) = category.dimensions();
        let width = (w / DEFAULT_RESOLUTION).round() as usize;
        let height = (h / DEFAULT_RESOLUTION).round() as usize;
        let geom = GridGeometry::new(width, height, DEFAULT_RESOLUTION, origin);
        let mut b = Self {
            geom,
            cells: vec![Cell::Free; width * height],
        };
        // Sealed boundary ring.
        b.set_rect_cells(0, 0, width as i64 - 1, 0, Cell::Occupied);
        b.set_rect_cells(0, height as i64 - 1, width as i64 - 1, height as i64 - 1, Cell::Occupied);
        b.set_rect_cells(0, 0, 0, height as i64 - 1, Cell::Occupied);
        b.set_rect_cells(width as i64 - 1, 0, width as i64 - 1, height as i64 - 1, Cell::Occupied);
        b
    }

    fn set_rect_cells(&mut self, c0: i64, r0: i64, c1: i64, r1: i64, v: Cell) {
        for row in r0.max(0)..=r1.min(self.geom.height as i64 - 1) {
            for col in c0.max(0)..=c1.min(self.geom.width as i64 - 1) {
                let idx = self.geom.index(GridCell::new(row, col));
                self.cells[idx] = v;
            }
        }
    }

    /// Fill a world-frame rectangle [x0,x1] x [y0,y1].
    fn fill(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, v: Cell) {
        let res = self.geom.resolution;
        let c0 = ((x0 - self.geom.origin.x) / res).floor() as i64;
        let c1 = ((x1 - self.geom.origin.x) / res).ceil() as i64 - 1;
        let r0 = ((y0 - self.geom.origin.y) / res).floor() as i64;
        let r1 = ((y1 - self.geom.origin.y) / res).ceil() as i64 - 1;
        self.set_rect_cells(c0, r0, c1, r1, v);
    }

    /// Vertical wall centered on x, spanning y0..y1.
    fn wall_v(&mut self, x: f64, y0: f64, y1: f64) {
        let t = WALL_THICKNESS / 2.0;
        self.fill(x - t, y0, x + t, y1, Cell::Occupied);
    }

    /// Horizontal wall centered on y, spanning x0..x1.
    fn wall_h(&mut self, y: f64, x0: f64, x1: f64) {
        let t = WALL_THICKNESS / 2.0;
        self.fill(x0, y - t, x1, y + t, Cell::Occupied);
    }

    /// Door gap in a vertical wall at x, centered on y.
    fn door_v(&mut self, x: f64, y: f64) {
        let t = WALL_THICKNESS / 2.0 + self.geom.resolution;
        self.fill(x - t, y - DOOR_WIDTH / 2.0, x + t, y + DOOR_WIDTH / 2.0, Cell::Free);
    }

    /// Door gap in a horizontal wall at y, centered on x.
    fn door_h(&mut self, y: f64, x: f64) {
        let t = WALL_THICKNESS / 2.0 + self.geom.resolution;
        self.fill(x - DOOR_WIDTH / 2.0, y - t, x + DOOR_WIDTH / 2.0, y + t, Cell::Free);
    }

    fn carve_disk(&mut self, p: WorldPoint, radius: f64) {
        let center = self.geom.cell_of_unclamped(p);
        let r_cells = (radius / self.geom.resolution).ceil() as i64;
        for dr in -r_cells..=r_cells {
            for dc in -r_cells..=r_cells {
                let c = GridCell::new(center.row + dr, center.col + dc);
                // Never reopen the boundary ring.
                if c.row <= 0
                    || c.col <= 0
                    || c.row >= self.geom.height as i64 - 1
                    || c.col >= self.geom.width as i64 - 1
                {
                    continue;
                }
                if self.geom.contains(c) && p.distance_to(self.geom.center_of(c)) <= radius {
                    let idx = self.geom.index(c);
                    self.cells[idx] = Cell::Free;
                }
            }
        }
    }

    /// Carve entry surroundings, drop free space unreachable from the
    /// first entry, and validate.
    fn finish(mut self, name: &str, entries: Vec<WorldPoint>) -> Result<GroundTruthMap, MapError> {
        for e in &entries {
            self.carve_disk(*e, ENTRY_CARVE_RADIUS);
        }
        let provisional = GroundTruthMap {
            name: name.to_string(),
            geom: self.geom,
            cells: self.cells.clone(),
            entry_points: entries.clone(),
            total_free_area: 0.0,
        };
        if let Some(start) = entries.first().and_then(|e| self.geom.cell_of(*e)) {
            let reached = provisional.flood_fill_free(start);
            for (i, cell) in self.cells.iter_mut().enumerate() {
                if *cell == Cell::Free && !reached[i] {
                    *cell = Cell::Occupied;
                }
            }
        }
        GroundTruthMap::new(name.to_string(), self.geom, self.cells, entries)
    }
}

/// 10x10 room with a partial dividing wall and a few box obstacles, so
/// full coverage needs an actual tour rather than one central scan.
fn build_room(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::Room);
    let entries = Category::Room.entry_points();
    // Wall stub jutting in from the left or right wall.
    let y = rng.gen_range(-1.0..1.0);
    let len = rng.gen_range(3.5..4.5);
    if rng.gen_bool(0.5) {
        b.wall_h(y, -5.0, -5.0 + len);
    } else {
        b.wall_h(y, 5.0 - len, 5.0);
    }
    let n_obstacles = rng.gen_range(2..=3u32);
    for _ in 0..n_obstacles {
        for _ in 0..32 {
            let cx = rng.gen_range(-3.2..3.2);
            let cy = rng.gen_range(-3.2..3.2);
            let half = rng.gen_range(0.4..0.8);
            let p = WorldPoint::new(cx, cy);
            let clears_wall = (cy - y).abs() > half + 0.8;
            if clears_wall && entries.iter().all(|e| e.distance_to(p) > half + 1.2) {
                b.fill(cx - half, cy - half, cx + half, cy + half, Cell::Occupied);
                break;
            }
        }
    }
    b
}

/// 10x10 apartment: four rooms behind narrow door openings.
fn build_apartment(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::Apartment);
    // Right-hand rooms split off by a vertical wall.
    b.wall_v(1.5, -5.0, 2.0);
    b.door_v(1.5, rng.gen_range(-3.5..-2.0));
    // Lower-left room.
    b.wall_h(0.5, -5.0, 1.5);
    b.door_h(0.5, rng.gen_range(-3.8..-1.0));
    // Upper-right room.
    b.wall_h(2.0, 1.5, 5.0);
    b.door_h(2.0, rng.gen_range(2.5..4.2));
    // Upper-left room divider.
    b.wall_v(-1.5, 0.5, 5.0);
    b.door_v(-1.5, rng.gen_range(3.0..4.3));
    b
}

/// 20x11 office: central corridor with rooms above and below.
fn build_office(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::Office);
    // Corridor band y in (-1.1, 1.1).
    b.wall_h(1.1, -10.0, 10.0);
    b.wall_h(-1.1, -10.0, 10.0);
    // Room dividers every ~4 m on each side.
    for side in [1.0, -1.0] {
        let (y_near, y_far) = if side > 0.0 { (1.1, 5.5) } else { (-5.5, -1.1) };
        for i in 1..5 {
            let x = -10.0 + i as f64 * 4.0;
            b.wall_v(x, y_near, y_far);
        }
        for i in 0..5 {
            let x0 = -10.0 + i as f64 * 4.0;
            let door_x = x0 + rng.gen_range(1.0..3.0);
            b.door_h(1.1 * side, door_x);
        }
    }
    b
}

/// 20x22 hallway: perimeter and cross corridors around four solid cores.
fn build_hallway(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::Hallway);
    // Four solid cores; the perimeter ring and the cross between them
    // form the hallways.
    for cx in [-4.35, 4.35] {
        for cy in [-4.85, 4.85] {
            b.fill(cx - 2.5, cy - 3.0, cx + 2.5, cy + 3.0, Cell::Occupied);
        }
    }
    // A couple of seeded alcoves carved into block corners for variety.
    for _ in 0..2 {
        let x = rng.gen_range(-6.0..6.0);
        let y = rng.gen_range(-7.0..7.0);
        b.carve_disk(WorldPoint::new(x, y), rng.gen_range(0.8..1.4));
    }
    b
}

/// 20x20 maze house: wall lattice with seeded door gaps.
fn build_maze_house(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::MazeHouse);
    let (_, _, origin) = Category::MazeHouse.dimensions();
    let (x0, y0) = (origin.x, origin.y);
    let (x1, y1) = (x0 + 20.0, y0 + 20.0);
    for i in 1..5 {
        b.wall_v(x0 + i as f64 * 4.0, y0, y1);
        b.wall_h(y0 + i as f64 * 4.0, x0, x1);
    }
    // Depth-first spanning tree over the 5x5 room grid: one door per
    // carved shared wall, so every room is reachable, plus a few extra
    // doors so the house is not a strict tree.
    const N: usize = 5;
    let mut carved: Vec<((usize, usize), (usize, usize))> = Vec::new();
    let mut visited = [[false; N]; N];
    let mut stack = vec![(0usize, 0usize)];
    visited[0][0] = true;
    while let Some(&(r, c)) = stack.last() {
        let mut nbrs: Vec<(usize, usize)> = Vec::new();
        if r > 0 && !visited[r - 1][c] {
            nbrs.push((r - 1, c));
        }
        if r + 1 < N && !visited[r + 1][c] {
            nbrs.push((r + 1, c));
        }
        if c > 0 && !visited[r][c - 1] {
            nbrs.push((r, c - 1));
        }
        if c + 1 < N && !visited[r][c + 1] {
            nbrs.push((r, c + 1));
        }
        if nbrs.is_empty() {
            stack.pop();
            continue;
        }
        let next = nbrs[rng.gen_range(0..nbrs.len())];
        visited[next.0][next.1] = true;
        carved.push(((r, c), next));
        stack.push(next);
    }
    for _ in 0..5 {
        let (r, c) = (rng.gen_range(0..N), rng.gen_range(0..N - 1));
        let edge = if rng.gen_bool(0.5) {
            ((r, c), (r, c + 1))
        } else {
            ((c, r), (c + 1, r))
        };
        if !carved.contains(&edge) && !carved.contains(&(edge.1, edge.0)) {
            carved.push(edge);
        }
    }
    for ((r0, c0), (r1, c1)) in carved {
        if r0 == r1 {
            // Shared vertical wall between horizontally adjacent rooms.
            let wall_x = x0 + c0.max(c1) as f64 * 4.0;
            b.door_v(wall_x, y0 + r0 as f64 * 4.0 + rng.gen_range(1.0..3.0));
        } else {
            let wall_y = y0 + r0.max(r1) as f64 * 4.0;
            b.door_h(wall_y, x0 + c0 as f64 * 4.0 + rng.gen_range(1.0..3.0));
        }
    }
    b
}

/// 70x70 school: crossing main corridors and a lattice of classrooms,
/// every wall segment pierced by one door.
fn build_school(rng: &mut ChaCha8Rng) -> Builder {
    let mut b = Builder::for_category(Category::School);
    let pitch = 11.5;
    let lo = -35.0;
    let hi = 35.0;
    let lattice: Vec<f64> = (1..6).map(|i| lo + i as f64 * pitch).collect();
    for &x in &lattice {
        b.wall_v(x, lo, hi);
    }
    for &y in &lattice {
        b.wall_h(y, lo, hi);
    }
    // Main corridors overwrite the lattice.
    b.fill(-1.5, lo + 0.2, 1.5, hi - 0.2, Cell::Free);
    b.fill(lo + 0.2, -1.5, hi - 0.2, 1.5, Cell::Free);
    // One door per wall segment between lattice intersections.
    let mut spans: Vec<f64> = vec![lo];
    spans.extend(&lattice);
    spans.push(hi);
    for &x in &lattice {
        for w in spans.windows(2) {
            let door_y = w[0] + rng.gen_range(0.25..0.75) * (w[1] - w[0]);
            b.door_v(x, door_y);
        }
    }
    for &y in &lattice {
        for w in spans.windows(2) {
            let door_x = w[0] + rng.gen_range(0.25..0.75) * (w[1] - w[0]);
            b.door_h(y, door_x);
        }
    }
    b
}
