//! Frontier detection and clustering on the belief map.
//!
//! A frontier cell is a known-free cell with at least one unknown
//! 8-neighbor; frontiers are 8-connected components of such cells.
//! `detect_frontiers_naive` scans the whole grid and is the reference
//! detector; `detect_frontiers_wfd` reaches the same components through
//! a wavefront search over known-free space only.

use crate::geom::{GridCell, WorldPoint, NEIGHBORS_8};
use crate::mapping::BeliefMap;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Frontier {
    /// Component cells in BFS discovery order.
    pub cells: Vec<GridCell>,
    /// Arithmetic mean of the cell centers.
    pub centroid: WorldPoint,
    /// Center of the cell at index floor(n/2) of the BFS ordering.
    pub median_cell: WorldPoint,
    pub size: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FrontierParams {
    /// Components smaller than this are dropped (sensor artifacts).
    pub min_frontier_size: usize,
}

impl Default for FrontierParams {
    fn default() -> Self {
        Self {
            min_frontier_size: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum FrontierError {
    #[error("robot cell ({0}, {1}) does not classify Free")]
    RobotCellNotFree(i64, i64),
}

/// Frontier predicate for a single cell.
pub fn is_frontier_cell(belief: &BeliefMap, c: GridCell) -> bool {
    if !belief.is_free(c) {
        return false;
    }
    NEIGHBORS_8.iter().any(|(dr, dc)| {
        let n = GridCell::new(c.row + dr, c.col + dc);
        belief.geom.contains(n) && belief.is_unknown(n)
    })
}

fn build_frontier(belief: &BeliefMap, cells: Vec<GridCell>) -> Frontier {
    let n = cells.len();
    let mut sx = 0.0;
    let mut sy = 0.0;
    for c in &cells {
        let p = belief.geom.center_of(*c);
        sx += p.x;
        sy += p.y;
    }
    let median_cell = belief.geom.center_of(cells[n / 2]);
    Frontier {
        centroid: WorldPoint::new(sx / n as f64, sy / n as f64),
        median_cell,
        size: n,
        cells,
    }
}

/// Extract the full 8-connected frontier component containing `seed`,
/// in BFS discovery order, marking cells in `member`.
fn extract_component(
    belief: &BeliefMap,
    seed: GridCell,
    member: &mut [bool],
) -> Vec<GridCell> {
    let geom = belief.geom;
    let mut cells = Vec::new();
    let mut queue = VecDeque::new();
    member[geom.index(seed)] = true;
    queue.push_back(seed);
    while let Some(c) = queue.pop_front() {
        cells.push(c);
        for (dr, dc) in NEIGHBORS_8 {
            let n = GridCell::new(c.row + dr, c.col + dc);
            if geom.contains(n) && !member[geom.index(n)] && is_frontier_cell(belief, n) {
                member[geom.index(n)] = true;
                queue.push_back(n);
            }
        }
    }
    cells
}

/// Full-grid scan detector: every frontier component in the map,
/// regardless of reachability.
pub fn detect_frontiers_naive(belief: &BeliefMap, params: &FrontierParams) -> Vec<Frontier> {
    let geom = belief.geom;
    let mut consumed = vec![false; geom.len()];
    let mut out = Vec::new();
    for idx in 0..geom.len() {
        let c = geom.cell_at(idx);
        if consumed[idx] || !is_frontier_cell(belief, c) {
            continue;
        }
        let cells = extract_component(belief, c, &mut consumed);
        if cells.len() >= params.min_frontier_size {
            out.push(build_frontier(belief, cells));
        }
    }
    out
}

/// Wavefront detector: an outer BFS over known-free cells from the
/// robot, spawning an inner component-extraction BFS whenever it meets
/// an unconsumed frontier cell. Returns the frontiers reachable through
/// known-free space. Also reports the number of BFS dequeues for
/// compute accounting.
pub fn detect_frontiers_wfd(
    belief: &BeliefMap,
    robot_cell: GridCell,
    params: &FrontierParams,
) -> Result<(Vec<Frontier>, u64), FrontierError> {
    let geom = belief.geom;
    if !belief.is_free(robot_cell) {
        return Err(FrontierError::RobotCellNotFree(robot_cell.row, robot_cell.col));
    }

    let mut map_closed = vec![false; geom.len()];
    let mut frontier_closed = vec![false; geom.len()];
    let mut queue = VecDeque::new();
    let mut dequeues = 0u64;
    let mut out = Vec::new();

    map_closed[geom.index(robot_cell)] = true;
    queue.push_back(robot_cell);
    while let Some(c) = queue.pop_front() {
        dequeues += 1;
        if !frontier_closed[geom.index(c)] && is_frontier_cell(belief, c) {
            let cells = extract_component(belief, c, &mut frontier_closed);
            dequeues += cells.len() as u64;
            if cells.len() >= params.min_frontier_size {
                out.push(build_frontier(belief, cells));
            }
        }
        for (dr, dc) in NEIGHBORS_8 {
            let n = GridCell::new(c.row + dr, c.col + dc);
            if geom.contains(n) && !map_closed[geom.index(n)] && belief.is_free(n) {
                map_closed[geom.index(n)] = true;
                queue.push_back(n);
            }
        }
    }
    Ok((out, dequeues))
}

/// A cluster of world points with its centroid.
#[derive(Debug, Clone)]
pub struct PointCluster {
    pub points: Vec<WorldPoint>,
    pub centroid: WorldPoint,
    pub size: usize,
}

/// Single-linkage clustering: points belong to the same cluster iff
/// linked by a chain of pairwise distances <= cutoff. Bucketed so the
/// neighbor search stays local.
pub fn cluster_frontier_points(points: &[WorldPoint], cutoff: f64) -> Vec<PointCluster> {
    assert!(cutoff > 0.0, "cutoff must be positive");
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }

    let key = |p: &WorldPoint| -> (i64, i64) {
        ((p.x / cutoff).floor() as i64, (p.y / cutoff).floor() as i64)
    };
    let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }

    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if cluster_of[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        cluster_of[start] = id;
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (bx, by) = key(&points[i]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(cands) = buckets.get(&(bx + dx, by + dy)) {
                        for &j in cands {
                            if cluster_of[j] == usize::MAX
                                && points[i].distance_to(points[j]) <= cutoff
                            {
                                cluster_of[j] = id;
                                queue.push_back(j);
                            }
                        }
                    }
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    clusters
        .into_iter()
        .map(|members| {
            let pts: Vec<WorldPoint> = members.iter().map(|i| points[*i]).collect();
            let size = pts.len();
            let cx = pts.iter().map(|p| p.x).sum::<f64>() / size as f64;
            let cy = pts.iter().map(|p| p.y).sum::<f64>() / size as f64;
            PointCluster {
                points: pts,
                centroid: WorldPoint::new(cx, cy),
                size,
            }
        })
        .collect()
}
