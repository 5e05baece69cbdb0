//! Global and local planning: obstacle inflation, 8-connected A* with
//! octile heuristic, and a dynamic-window local planner driving the
//! unicycle kinematic model.

use crate::geom::{angle_diff, normalize_angle, GridCell, GridGeometry, WorldPoint, NEIGHBORS_8};
use crate::mapping::BeliefMap;
use std::collections::BinaryHeap;
use thiserror::Error;

pub const FIXED_ALTITUDE: f64 = 0.3;

/// Planar kinematic state of the vehicle at fixed altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: WorldPoint,
    pub heading: f64,
    pub linear_velocity: f64,
    pub angular_velocity: f64,
    pub altitude: f64,
}

impl RobotState {
    pub fn at(position: WorldPoint, heading: f64) -> Self {
        Self {
            position,
            heading,
            linear_velocity: 0.0,
            angular_velocity: 0.0,
            altitude: FIXED_ALTITUDE,
        }
    }
}

/// Velocity and acceleration envelope.
#[derive(Debug, Clone, Copy)]
pub struct KinematicLimits {
    pub v_max: f64,
    pub v_min: f64,
    pub omega_max: f64,
    pub accel_linear: f64,
    pub accel_angular: f64,
    /// Minimum commanded turn-rate magnitude for in-place recovery.
    pub recovery_omega_min: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            v_min: -0.1,
            omega_max: 0.5,
            accel_linear: 0.5,
            accel_angular: 1.0,
            recovery_omega_min: 0.2,
        }
    }
}

/// Exact unicycle integration of a (v, omega) command over `dt`.
pub fn integrate_unicycle(state: &RobotState, v: f64, omega: f64, dt: f64) -> RobotState {
    let (x, y, theta) = (state.position.x, state.position.y, state.heading);
    let (nx, ny) = if omega.abs() < 1e-9 {
        (x + v * theta.cos() * dt, y + v * theta.sin() * dt)
    } else {
        (
            x + v / omega * ((theta + omega * dt).sin() - theta.sin()),
            y - v / omega * ((theta + omega * dt).cos() - theta.cos()),
        )
    };
    RobotState {
        position: WorldPoint::new(nx, ny),
        heading: normalize_angle(theta + omega * dt),
        linear_velocity: v,
        angular_velocity: omega,
        altitude: state.altitude,
    }
}

/// Planner-facing view of the belief: which cells can be traversed.
/// Unknown space is untraversable for global planning; the local
/// planner checks against inflated occupied space only.
#[derive(Debug, Clone)]
pub struct Costmask {
    pub geom: GridGeometry,
    known_free: Vec<bool>,
    inflated_occ: Vec<bool>,
}

impl Costmask {
    pub fn traversable(&self, c: GridCell) -> bool {
        self.geom.contains(c) && {
            let i = self.geom.index(c);
            self.known_free[i] && !self.inflated_occ[i]
        }
    }

    /// Blocked by (inflated) believed obstacles, ignoring unknown space.
    pub fn blocked_by_obstacle(&self, c: GridCell) -> bool {
        !self.geom.contains(c) || self.inflated_occ[self.geom.index(c)]
    }
}

/// Mark every cell within `radius` (center-to-center) of a believed
/// occupied cell as blocked; unknown cells are additionally
/// untraversable for global planning.
pub fn inflate(belief: &BeliefMap, radius: f64) -> Costmask {
    let geom = belief.geom;
    let r_cells = (radius / geom.resolution).floor() as i64;
    let mut offsets = Vec::new();
    for dr in -r_cells..=r_cells {
        for dc in -r_cells..=r_cells {
            let d = ((dr * dr + dc * dc) as f64).sqrt() * geom.resolution;
            if d <= radius + 1e-12 {
                offsets.push((dr, dc));
            }
        }
    }
    if offsets.is_empty() {
        offsets.push((0, 0));
    }

    let mut known_free = vec![false; geom.len()];
    let mut inflated_occ = vec![false; geom.len()];
    for idx in 0..geom.len() {
        let c = geom.cell_at(idx);
        if belief.is_free(c) {
            known_free[idx] = true;
        }
    }
    for c in belief.occupied_cells() {
        for (dr, dc) in &offsets {
            let n = GridCell::new(c.row + dr, c.col + dc);
            if geom.contains(n) {
                inflated_occ[geom.index(n)] = true;
            }
        }
    }
    Costmask {
        geom,
        known_free,
        inflated_occ,
    }
}

/// A grid path with waypoints at cell centers.
#[derive(Debug, Clone)]
pub struct Path {
    pub waypoints: Vec<WorldPoint>,
    pub cardinal_steps: usize,
    pub diagonal_steps: usize,
    /// Grid cost: (cardinals + sqrt(2) * diagonals) * resolution,
    /// computed from the step counts.
    pub cost: f64,
}

impl Path {
    pub fn segment_lengths(&self) -> Vec<f64> {
        self.waypoints
            .windows(2)
            .map(|w| w[0].distance_to(w[1]))
            .collect()
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start cell ({0}, {1}) outside the grid")]
    StartOutOfBounds(i64, i64),
    #[error("goal is unreachable or untraversable")]
    NoPath,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    f: f64,
    g: f64,
    cell: GridCell,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Min-heap by f, ties by cell index for determinism.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

fn octile(a: GridCell, b: GridCell, resolution: f64) -> f64 {
    let dx = (a.col - b.col).abs() as f64;
    let dy = (a.row - b.row).abs() as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    resolution * ((hi - lo) + lo * std::f64::consts::SQRT_2)
}

/// 8-connected A* over the costmask. The start cell is treated as
/// traversable even when inflation covers it (the robot is already
/// there). Returns the shortest grid path; the admissible octile
/// heuristic makes the cost match an exhaustive search.
pub fn plan_astar(mask: &Costmask, start: WorldPoint, goal: WorldPoint) -> Result<Path, PlanError> {
    let geom = mask.geom;
    let start_cell = geom
        .cell_of(start)
        .ok_or_else(|| {
            let c = geom.cell_of_unclamped(start);
            PlanError::StartOutOfBounds(c.row, c.col)
        })?;
    let goal_cell = geom.cell_of(goal).ok_or(PlanError::NoPath)?;
    if !mask.traversable(goal_cell) {
        return Err(PlanError::NoPath);
    }
    if start_cell == goal_cell {
        return Ok(Path {
            waypoints: vec![geom.center_of(goal_cell)],
            cardinal_steps: 0,
            diagonal_steps: 0,
            cost: 0.0,
        });
    }

    let res = geom.resolution;
    let mut g_score = vec![f64::INFINITY; geom.len()];
    let mut parent: Vec<u32> = vec![u32::MAX; geom.len()];
    let mut heap = BinaryHeap::new();
    g_score[geom.index(start_cell)] = 0.0;
    heap.push(HeapEntry {
        f: octile(start_cell, goal_cell, res),
        g: 0.0,
        cell: start_cell,
    });

    while let Some(entry) = heap.pop() {
        let idx = geom.index(entry.cell);
        if entry.g > g_score[idx] + 1e-12 {
            continue;
        }
        if entry.cell == goal_cell {
            return Ok(reconstruct(geom, &parent, start_cell, goal_cell));
        }
        for (k, (dr, dc)) in NEIGHBORS_8.iter().enumerate() {
            let n = GridCell::new(entry.cell.row + dr, entry.cell.col + dc);
            if !mask.traversable(n) {
                continue;
            }
            let step = if k < 4 { res } else { res * std::f64::consts::SQRT_2 };
            let ng = entry.g + step;
            let nidx = geom.index(n);
            if ng < g_score[nidx] - 1e-12 {
                g_score[nidx] = ng;
                parent[nidx] = idx as u32;
                heap.push(HeapEntry {
                    f: ng + octile(n, goal_cell, res),
                    g: ng,
                    cell: n,
                });
            }
        }
    }
    Err(PlanError::NoPath)
}

/// Plan to the traversable cell nearest the (unreachable) goal: a
/// uniform-cost search over the whole reachable set, keeping the cell
/// that minimizes Euclidean distance to the goal. Lets the robot
/// approach goals whose surroundings are not yet mapped traversable.
pub fn plan_toward(mask: &Costmask, start: WorldPoint, goal: WorldPoint) -> Result<Path, PlanError> {
    let geom = mask.geom;
    let start_cell = geom.cell_of(start).ok_or_else(|| {
        let c = geom.cell_of_unclamped(start);
        PlanError::StartOutOfBounds(c.row, c.col)
    })?;
    let res = geom.resolution;
    let mut g_score = vec![f64::INFINITY; geom.len()];
    let mut parent: Vec<u32> = vec![u32::MAX; geom.len()];
    let mut heap = BinaryHeap::new();
    g_score[geom.index(start_cell)] = 0.0;
    heap.push(HeapEntry {
        f: 0.0,
        g: 0.0,
        cell: start_cell,
    });
    let mut best_cell = start_cell;
    let mut best_d = geom.center_of(start_cell).distance_to(goal);
    while let Some(entry) = heap.pop() {
        let idx = geom.index(entry.cell);
        if entry.g > g_score[idx] + 1e-12 {
            continue;
        }
        let d = geom.center_of(entry.cell).distance_to(goal);
        if d < best_d - 1e-12 {
            best_d = d;
            best_cell = entry.cell;
        }
        for (k, (dr, dc)) in NEIGHBORS_8.iter().enumerate() {
            let n = GridCell::new(entry.cell.row + dr, entry.cell.col + dc);
            if !mask.traversable(n) {
                continue;
            }
            let step = if k < 4 { res } else { res * std::f64::consts::SQRT_2 };
            let ng = entry.g + step;
            let nidx = geom.index(n);
            if ng < g_score[nidx] - 1e-12 {
                g_score[nidx] = ng;
                parent[nidx] = idx as u32;
                heap.push(HeapEntry {
                    f: ng,
                    g: ng,
                    cell: n,
                });
            }
        }
    }
    if best_cell == start_cell {
        return Err(PlanError::NoPath);
    }
    Ok(reconstruct(geom, &parent, start_cell, best_cell))
}

fn reconstruct(geom: GridGeometry, parent: &[u32], start: GridCell, goal: GridCell) -> Path {
    let mut cells = vec![goal];
    let mut cur = goal;
    while cur != start {
        let p = parent[geom.index(cur)];
        cur = geom.cell_at(p as usize);
        cells.push(cur);
    }
    cells.reverse();
    let mut cardinal = 0;
    let mut diagonal = 0;
    for w in cells.windows(2) {
        if w[0].row != w[1].row && w[0].col != w[1].col {
            diagonal += 1;
        } else {
            cardinal += 1;
        }
    }
    Path {
        waypoints: cells.iter().map(|c| geom.center_of(*c)).collect(),
        cardinal_steps: cardinal,
        diagonal_steps: diagonal,
        cost: geom.resolution * (cardinal as f64 + diagonal as f64 * std::f64::consts::SQRT_2),
    }
}

/// Sum of Euclidean distances between consecutive trajectory positions.
pub fn distance_travelled(trajectory: &[RobotState]) -> f64 {
    trajectory
        .windows(2)
        .map(|w| w[0].position.distance_to(w[1].position))
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct DwaParams {
    pub horizon: f64,
    pub sim_step: f64,
    /// Time span of the velocity window reachable from the current
    /// command under the acceleration limits.
    pub window_time: f64,
    pub linear_samples: usize,
    pub angular_samples: usize,
    pub w_heading: f64,
    pub w_clearance: f64,
    pub w_velocity: f64,
    pub lookahead: f64,
    pub clearance_cap: f64,
    pub robot_clearance: f64,
}

impl Default for DwaParams {
    fn default() -> Self {
        Self {
            horizon: 1.5,
            sim_step: 0.1,
            window_time: 0.5,
            linear_samples: 7,
            angular_samples: 11,
            w_heading: 0.8,
            w_clearance: 0.2,
            w_velocity: 0.2,
            lookahead: 0.8,
            clearance_cap: 1.0,
            robot_clearance: 0.26,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VelocityCommand {
    pub linear: f64,
    pub angular: f64,
    /// True when every sampled trajectory collided and the command is
    /// an in-place recovery rotation.
    pub recovery: bool,
}

/// Distances to believed obstacles in a window around the robot,
/// computed with a two-pass chamfer transform. Points outside the
/// window report the cap.
struct ClearanceField {
    origin: GridCell,
    width: i64,
    height: i64,
    cap: f64,
    geom: GridGeometry,
    dist: Vec<f64>,
}

impl ClearanceField {
    fn build(belief: &BeliefMap, center: WorldPoint, radius: f64, cap: f64) -> Self {
        let geom = belief.geom;
        let res = geom.resolution;
        let margin = (cap / res).ceil() as i64;
        let r = (radius / res).ceil() as i64 + margin;
        let c0 = geom.cell_of_unclamped(center);
        let origin = GridCell::new(c0.row - r, c0.col - r);
        let side = 2 * r + 1;
        let big: f64 = 1e9;
        let mut dist = vec![big; (side * side) as usize];
        for wr in 0..side {
            for wc in 0..side {
                let cell = GridCell::new(origin.row + wr, origin.col + wc);
                if geom.contains(cell) && belief.is_occupied(cell) {
                    dist[(wr * side + wc) as usize] = 0.0;
                }
            }
        }
        let diag = res * std::f64::consts::SQRT_2;
        // Forward pass.
        for wr in 0..side {
            for wc in 0..side {
                let i = (wr * side + wc) as usize;
                let mut d = dist[i];
                if wc > 0 {
                    d = d.min(dist[i - 1] + res);
                }
                if wr > 0 {
                    d = d.min(dist[i - side as usize] + res);
                    if wc > 0 {
                        d = d.min(dist[i - side as usize - 1] + diag);
                    }
                    if wc + 1 < side {
                        d = d.min(dist[i - side as usize + 1] + diag);
                    }
                }
                dist[i] = d;
            }
        }
        // Backward pass.
        for wr in (0..side).rev() {
            for wc in (0..side).rev() {
                let i = (wr * side + wc) as usize;
                let mut d = dist[i];
                if wc + 1 < side {
                    d = d.min(dist[i + 1] + res);
                }
                if wr + 1 < side {
                    d = d.min(dist[i + side as usize] + res);
                    if wc + 1 < side {
                        d = d.min(dist[i + side as usize + 1] + diag);
                    }
                    if wc > 0 {
                        d = d.min(dist[i + side as usize - 1] + diag);
                    }
                }
                dist[i] = d.min(cap);
            }
        }
        Self {
            origin,
            width: side,
            height: side,
            cap,
            geom,
            dist,
        }
    }

    fn at(&self, p: WorldPoint) -> f64 {
        let c = self.geom.cell_of_unclamped(p);
        let wr = c.row - self.origin.row;
        let wc = c.col - self.origin.col;
        if wr < 0 || wc < 0 || wr >= self.height || wc >= self.width {
            // Beyond the window there is no nearby observed obstacle.
            return self.cap;
        }
        self.dist[(wr * self.width + wc) as usize]
    }

    fn inside_map(&self, p: WorldPoint) -> bool {
        self.geom.cell_of(p).is_some()
    }
}

/// One dynamic-window control step: sample (v, omega) pairs in the
/// reachable window, forward-simulate each over the horizon against the
/// believed obstacles, score, and apply the best command for `dt`.
pub fn dwa_step(
    state: &RobotState,
    path: &Path,
    belief: &BeliefMap,
    limits: &KinematicLimits,
    params: &DwaParams,
    dt: f64,
) -> (VelocityCommand, RobotState) {
    assert!(dt > 0.0);
    let window_radius = limits.v_max * params.horizon + params.clearance_cap;
    let field = ClearanceField::build(belief, state.position, window_radius, params.clearance_cap);
    let carrot = pick_carrot(state.position, path, params, &field);

    let v_lo = (state.linear_velocity - limits.accel_linear * params.window_time).max(limits.v_min);
    let v_hi = (state.linear_velocity + limits.accel_linear * params.window_time).min(limits.v_max);
    let w_lo =
        (state.angular_velocity - limits.accel_angular * params.window_time).max(-limits.omega_max);
    let w_hi =
        (state.angular_velocity + limits.accel_angular * params.window_time).min(limits.omega_max);

    let lin_n = params.linear_samples.max(2);
    let ang_n = params.angular_samples.max(2);
    let mut best: Option<(f64, f64, f64)> = None; // (score, v, omega)

    for vi in (0..lin_n).rev() {
        let v = v_lo + (v_hi - v_lo) * vi as f64 / (lin_n - 1) as f64;
        for wi in 0..ang_n {
            let omega = w_lo + (w_hi - w_lo) * wi as f64 / (ang_n - 1) as f64;
            if let Some(score) = score_trajectory(state, v, omega, carrot, &field, limits, params) {
                if best.map_or(true, |(s, _, _)| score > s + 1e-12) {
                    best = Some((score, v, omega));
                }
            }
        }
    }

    let cmd = match best {
        Some((_, v, omega)) => VelocityCommand {
            linear: v,
            angular: omega,
            recovery: false,
        },
        None => {
            // All sampled trajectories collide: rotate in place toward
            // the carrot.
            let bearing = state.position.bearing_to(carrot);
            let sign = if angle_diff(bearing, state.heading) >= 0.0 { 1.0 } else { -1.0 };
            let mag = limits
                .recovery_omega_min
                .max(0.3)
                .min(limits.omega_max)
                .min(w_hi.abs().max(w_lo.abs()));
            VelocityCommand {
                linear: 0.0,
                angular: sign * mag.max(limits.recovery_omega_min),
                recovery: true,
            }
        }
    };

    let next = integrate_unicycle(state, cmd.linear, cmd.angular, dt);
    (cmd, next)
}

/// Straight segment from `a` to `b` keeps at least `clearance` from
/// believed obstacles.
fn line_clear(a: WorldPoint, b: WorldPoint, field: &ClearanceField, clearance: f64) -> bool {
    let d = a.distance_to(b);
    let steps = (d / 0.05).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let p = WorldPoint::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
        if field.at(p) < clearance {
            return false;
        }
    }
    true
}

/// Farthest waypoint within the lookahead that the robot can see in a
/// straight line; keeps the carrot out from behind corners so the
/// heading score pulls the robot along the path instead of into walls.
fn pick_carrot(
    position: WorldPoint,
    path: &Path,
    params: &DwaParams,
    field: &ClearanceField,
) -> WorldPoint {
    let nearest = path
        .waypoints
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            position
                .distance_to(**a)
                .total_cmp(&position.distance_to(**b))
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut carrot = path.waypoints[nearest];
    for wp in &path.waypoints[nearest..] {
        if position.distance_to(*wp) > params.lookahead {
            break;
        }
        if line_clear(position, *wp, field, params.robot_clearance) {
            carrot = *wp;
        } else {
            break;
        }
    }
    // Never hand back the robot's own position as the target.
    if position.distance_to(carrot) < 0.15 {
        if let Some(wp) = path.waypoints.get(nearest + 1) {
            carrot = *wp;
        } else {
            carrot = *path.waypoints.last().expect("path is non-empty");
        }
    }
    carrot
}

/// None when the trajectory collides within the horizon.
fn score_trajectory(
    state: &RobotState,
    v: f64,
    omega: f64,
    carrot: WorldPoint,
    field: &ClearanceField,
    limits: &KinematicLimits,
    params: &DwaParams,
) -> Option<f64> {
    let steps = (params.horizon / params.sim_step).round() as usize;
    let mut sim = *state;
    let start_clear = field.at(sim.position);
    // When the belief already places the robot closer than the nominal
    // clearance, admit motions that do not reduce clearance further;
    // otherwise a wedged robot could never move again.
    let floor = params.robot_clearance.min(start_clear);
    let mut min_clear = start_clear;
    for _ in 0..steps {
        sim = integrate_unicycle(&sim, v, omega, params.sim_step);
        if !field.inside_map(sim.position) {
            return None;
        }
        let d = field.at(sim.position);
        if d < floor {
            return None;
        }
        min_clear = min_clear.min(d);
    }
    let bearing = sim.position.bearing_to(carrot);
    let alignment = if sim.position.distance_to(carrot) < 1e-6 {
        1.0
    } else {
        1.0 - angle_diff(bearing, sim.heading).abs() / std::f64::consts::PI
    };
    // Reward actually closing distance to the carrot; pure alignment
    // scoring lets the robot idle facing a blocked direction.
    let gained = state.position.distance_to(carrot) - sim.position.distance_to(carrot);
    let progress = 0.5 + 0.5 * (gained / (limits.v_max * params.horizon)).clamp(-1.0, 1.0);
    let heading_score = 0.5 * alignment + 0.5 * progress;
    let clear_score = ((min_clear.min(params.clearance_cap) - params.robot_clearance)
        / (params.clearance_cap - params.robot_clearance))
        .clamp(0.0, 1.0);
    let vel_score = (v - limits.v_min) / (limits.v_max - limits.v_min);
    Some(
        params.w_heading * heading_score
            + params.w_clearance * clear_score
            + params.w_velocity * vel_score,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{BeliefParams, CellClass};

    fn open_belief(side: usize, res: f64) -> BeliefMap {
        let geom = GridGeometry::new(side, side, res, WorldPoint::new(0.0, 0.0));
        let mut belief = BeliefMap::new(geom, BeliefParams::default());
        for idx in 0..geom.len() {
            let c = geom.cell_at(idx);
            let edge = c.row == 0
                || c.col == 0
                || c.row == side as i64 - 1
                || c.col == side as i64 - 1;
            belief.force_class(c, if edge { CellClass::Occupied } else { CellClass::Free });
        }
        belief
    }

    #[test]
    fn zero_radius_inflation_blocks_only_occupied() {
        let belief = open_belief(12, 0.1);
        let mask = inflate(&belief, 0.0);
        for idx in 0..belief.geom.len() {
            let c = belief.geom.cell_at(idx);
            assert_eq!(mask.blocked_by_obstacle(c), belief.is_occupied(c));
        }
    }

    #[test]
    fn single_cell_inflation_matches_distance_oracle() {
        let geom = GridGeometry::new(11, 11, 0.1, WorldPoint::new(0.0, 0.0));
        let mut belief = BeliefMap::new(geom, BeliefParams::default());
        for idx in 0..geom.len() {
            belief.force_class(geom.cell_at(idx), CellClass::Free);
        }
        let center = GridCell::new(5, 5);
        belief.force_class(center, CellClass::Occupied);
        let mask = inflate(&belief, 0.26);
        let mut blocked = 0;
        for idx in 0..geom.len() {
            let c = geom.cell_at(idx);
            let d = geom.center_of(c).distance_to(geom.center_of(center));
            assert_eq!(mask.blocked_by_obstacle(c), d <= 0.26, "cell {c:?} d={d}");
            if mask.blocked_by_obstacle(c) {
                blocked += 1;
            }
        }
        // 5x5 block minus the four corners.
        assert_eq!(blocked, 21);
    }

    #[test]
    fn inflation_is_monotone_in_radius() {
        let belief = open_belief(20, 0.1);
        let small = inflate(&belief, 0.2);
        let large = inflate(&belief, 0.5);
        for idx in 0..belief.geom.len() {
            let c = belief.geom.cell_at(idx);
            if small.blocked_by_obstacle(c) {
                assert!(large.blocked_by_obstacle(c));
            }
        }
    }

    #[test]
    fn astar_start_equals_goal() {
        let belief = open_belief(12, 0.1);
        let mask = inflate(&belief, 0.0);
        let p = WorldPoint::new(0.55, 0.55);
        let path = plan_astar(&mask, p, p).unwrap();
        assert_eq!(path.cost, 0.0);
        assert_eq!(path.total_length(), 0.0);
    }

    #[test]
    fn astar_open_grid_diagonal_cost() {
        // 12x12 at 1 m with an occupied ring leaves an open 10x10
        // interior; opposite interior corners are 9 diagonal steps.
        let belief = open_belief(12, 1.0);
        let mask = inflate(&belief, 0.0);
        let path = plan_astar(
            &mask,
            WorldPoint::new(1.5, 1.5),
            WorldPoint::new(10.5, 10.5),
        )
        .unwrap();
        assert_eq!(path.diagonal_steps, 9);
        assert_eq!(path.cardinal_steps, 0);
        assert!((path.cost - 9.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn astar_unreachable_goal_fails() {
        let mut belief = open_belief(12, 0.1);
        // Wall off the right side completely.
        for row in 0..12 {
            belief.force_class(GridCell::new(row, 6), CellClass::Occupied);
        }
        let mask = inflate(&belief, 0.0);
        assert!(plan_astar(&mask, WorldPoint::new(0.25, 0.55), WorldPoint::new(0.95, 0.55)).is_err());
    }

    #[test]
    fn unicycle_straight_and_arc() {
        let s = RobotState::at(WorldPoint::new(0.0, 0.0), 0.0);
        let straight = integrate_unicycle(&s, 1.0, 0.0, 2.0);
        assert!((straight.position.x - 2.0).abs() < 1e-12);
        // Full circle returns to start.
        let mut arc = s;
        for _ in 0..1000 {
            arc = integrate_unicycle(&arc, 0.5, 0.5, std::f64::consts::TAU / (0.5 * 1000.0));
        }
        assert!(arc.position.distance_to(s.position) < 1e-6);
    }

    #[test]
    fn distance_travelled_square_loop() {
        let corners = [
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 2.0),
            (0.0, 2.0),
            (0.0, 0.0),
        ];
        let traj: Vec<RobotState> = corners
            .iter()
            .map(|(x, y)| RobotState::at(WorldPoint::new(*x, *y), 0.0))
            .collect();
        assert!((distance_travelled(&traj) - 8.0).abs() < 1e-12);
        assert_eq!(distance_travelled(&traj[..1]), 0.0);
    }

    #[test]
    fn dwa_reaches_max_speed_in_free_corridor() {
        let belief = open_belief(120, 0.1); // 12 m x 12 m open box
        let path = Path {
            waypoints: vec![WorldPoint::new(2.0, 6.0), WorldPoint::new(10.0, 6.0)],
            cardinal_steps: 80,
            diagonal_steps: 0,
            cost: 8.0,
        };
        let limits = KinematicLimits::default();
        let params = DwaParams::default();
        let mut state = RobotState::at(WorldPoint::new(2.0, 6.0), 0.0);
        for step in 0..3 {
            let (cmd, next) = dwa_step(&state, &path, &belief, &limits, &params, 0.1);
            assert!(!cmd.recovery, "recovery at step {step}");
            state = next;
        }
        assert!(
            (state.linear_velocity - limits.v_max).abs() < 1e-9,
            "velocity {} after 3 steps",
            state.linear_velocity
        );
    }

    #[test]
    fn dwa_backs_off_from_wall_dead_ahead() {
        let mut belief = open_belief(120, 0.1);
        // Wall column directly ahead of the robot.
        for row in 40..80 {
            for col in 63..65 {
                belief.force_class(GridCell::new(row, col), CellClass::Occupied);
            }
        }
        let path = Path {
            waypoints: vec![WorldPoint::new(6.0, 6.0), WorldPoint::new(10.0, 6.0)],
            cardinal_steps: 40,
            diagonal_steps: 0,
            cost: 4.0,
        };
        // 0.25 m from the wall face, moving forward: every positive
        // sample in the window collides within the horizon.
        let mut state = RobotState::at(WorldPoint::new(6.05, 6.0), 0.0);
        state.linear_velocity = 0.3;
        let (cmd, _) = dwa_step(
            &state,
            &path,
            &belief,
            &KinematicLimits::default(),
            &DwaParams::default(),
            0.1,
        );
        assert!(cmd.linear <= 0.0, "commanded v = {}", cmd.linear);
        assert!(cmd.linear >= -0.1 - 1e-12);
    }

    #[test]
    fn dwa_commands_respect_limits() {
        let belief = open_belief(60, 0.1);
        let path = Path {
            waypoints: vec![WorldPoint::new(1.0, 1.0), WorldPoint::new(5.0, 5.0)],
            cardinal_steps: 0,
            diagonal_steps: 40,
            cost: 4.0 * std::f64::consts::SQRT_2,
        };
        let limits = KinematicLimits::default();
        let mut state = RobotState::at(WorldPoint::new(1.0, 1.0), 2.5);
        for _ in 0..50 {
            let (cmd, next) = dwa_step(&state, &path, &belief, &limits, &DwaParams::default(), 0.1);
            assert!(cmd.angular.abs() <= limits.omega_max + 1e-12);
            assert!(cmd.linear <= limits.v_max + 1e-12 && cmd.linear >= limits.v_min - 1e-12);
            state = next;
        }
    }
}
