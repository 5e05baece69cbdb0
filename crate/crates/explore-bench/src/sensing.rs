//! 2D LiDAR simulation by grid raycasting against the ground truth.

use crate::envmap::{Cell, GroundTruthMap};
use crate::geom::WorldPoint;
use crate::navigation::RobotState;
use crate::raycast::RayTraversal;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Smallest reportable range; keeps returned ranges strictly positive.
const MIN_RANGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct LidarParams {
    /// Start of the field of view relative to the heading (radians).
    pub angle_min: f64,
    /// End of the field of view relative to the heading (radians).
    pub angle_max: f64,
    pub angular_resolution: f64,
    pub range_max: f64,
    /// Gaussian range noise sigma in meters; 0 disables noise.
    pub noise_sigma: f64,
}

impl Default for LidarParams {
    fn default() -> Self {
        // 270 degree FoV, 8 m range, 0.25 degree beams.
        Self {
            angle_min: -135f64.to_radians(),
            angle_max: 135f64.to_radians(),
            angular_resolution: 0.25f64.to_radians(),
            range_max: 8.0,
            noise_sigma: 0.0,
        }
    }
}

impl LidarParams {
    /// Coarser 1-degree variant for fast tests and large batches.
    pub fn coarse() -> Self {
        Self {
            angular_resolution: 1f64.to_radians(),
            ..Self::default()
        }
    }

    pub fn beam_count(&self) -> usize {
        ((self.angle_max - self.angle_min) / self.angular_resolution).floor() as usize + 1
    }
}

#[derive(Debug, Clone)]
pub struct LidarScan {
    pub origin: WorldPoint,
    pub heading: f64,
    pub params: LidarParams,
    /// One range per beam; `range_max` codes "no return".
    pub ranges: Vec<f64>,
}

impl LidarScan {
    /// Absolute world angle of beam `i`.
    pub fn beam_angle(&self, i: usize) -> f64 {
        self.heading + self.params.angle_min + i as f64 * self.params.angular_resolution
    }

    /// True when beam `i` hit an obstacle (did not reach max range).
    pub fn is_hit(&self, i: usize) -> bool {
        self.ranges[i] < self.params.range_max - 1e-9
    }
}

#[derive(Debug, Error)]
pub enum SensingError {
    #[error("scan pose ({0}, {1}) is not in free space")]
    PoseInObstacle(f64, f64),
}

/// Cast every beam against the ground-truth map. The range is the
/// distance at which the beam enters the first occupied cell, clamped
/// to (0, range_max]. Deterministic for a fixed rng state.
pub fn simulate_scan<R: Rng>(
    map: &GroundTruthMap,
    pose: &RobotState,
    params: &LidarParams,
    rng: &mut R,
) -> Result<LidarScan, SensingError> {
    let origin = pose.position;
    match map.geom.cell_of(origin) {
        Some(c) if map.cell(c) == Cell::Free => {}
        _ => return Err(SensingError::PoseInObstacle(origin.x, origin.y)),
    }

    let n = params.beam_count();
    let mut ranges = Vec::with_capacity(n);
    let noise = (params.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, params.noise_sigma).expect("valid sigma"));

    for i in 0..n {
        let angle = pose.heading + params.angle_min + i as f64 * params.angular_resolution;
        let mut range = params.range_max;
        for step in RayTraversal::new(map.geom, origin, angle, params.range_max) {
            if map.cell(step.cell) == Cell::Occupied {
                range = step.entry_distance.max(MIN_RANGE);
                break;
            }
        }
        if let Some(noise) = noise {
            if range < params.range_max {
                range = (range + noise.sample(rng)).clamp(MIN_RANGE, params.range_max);
            }
        }
        ranges.push(range);
    }

    Ok(LidarScan {
        origin,
        heading: pose.heading,
        params: *params,
        ranges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmap::load_map;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_world() -> GroundTruthMap {
        // 100 m x 100 m mostly free world at 0.5 m cells.
        let mut s = String::from("name open\nresolution 0.5\norigin 0 0\nentries 50,50\n");
        for r in 0..200 {
            for c in 0..200 {
                let edge = r == 0 || c == 0 || r == 199 || c == 199;
                s.push(if edge { '#' } else { '.' });
            }
            s.push('\n');
        }
        load_map(&s).unwrap()
    }

    fn wall_world() -> GroundTruthMap {
        // 10x10 m at 0.1 m; vertical wall at x = 7.0 (cells at x in [7.0, 7.1)).
        let mut s = String::from("name wall\nresolution 0.1\norigin 0 0\nentries 5,5\n");
        for r in (0..100).rev() {
            for c in 0..100 {
                let edge = r == 0 || c == 0 || r == 99 || c == 99;
                let wall = c == 70 && r > 0 && r < 99;
                s.push(if edge || wall { '#' } else { '.' });
            }
            s.push('\n');
        }
        load_map(&s).unwrap()
    }

    fn pose(x: f64, y: f64, heading: f64) -> RobotState {
        RobotState::at(WorldPoint::new(x, y), heading)
    }

    #[test]
    fn open_world_all_beams_max_range() {
        let map = open_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan =
            simulate_scan(&map, &pose(50.0, 50.0, 0.3), &LidarParams::coarse(), &mut rng).unwrap();
        assert_eq!(scan.ranges.len(), 271);
        for (i, r) in scan.ranges.iter().enumerate() {
            assert_eq!(*r, 8.0);
            assert!(!scan.is_hit(i));
        }
    }

    #[test]
    fn wall_ahead_reports_distance() {
        let map = wall_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan =
            simulate_scan(&map, &pose(5.0, 5.0, 0.0), &LidarParams::coarse(), &mut rng).unwrap();
        // Central beam (index for relative angle 0) points at the wall 2 m away.
        let mid = scan.ranges.len() / 2;
        assert!((scan.beam_angle(mid)).abs() < 1e-9);
        assert!((scan.ranges[mid] - 2.0).abs() <= 0.05, "range {}", scan.ranges[mid]);
        assert!(scan.is_hit(mid));
    }

    #[test]
    fn close_wall_ranges_stay_positive() {
        let map = wall_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // 0.05 m in front of the wall face at x = 7.0.
        let scan =
            simulate_scan(&map, &pose(6.95, 5.0, 0.0), &LidarParams::coarse(), &mut rng).unwrap();
        let min = scan.ranges.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert!((min - 0.05).abs() <= 0.05, "min range {min}");
    }

    #[test]
    fn pose_in_obstacle_errors() {
        let map = wall_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(
            simulate_scan(&map, &pose(7.05, 5.0, 0.0), &LidarParams::coarse(), &mut rng).is_err()
        );
    }

    #[test]
    fn adding_an_obstacle_never_increases_ranges() {
        let open = open_world();
        // Same world with an added block near the pose.
        let mut blocked = open.serialize();
        blocked = blocked.replace("name open", "name blocked");
        let lines: Vec<&str> = blocked.lines().collect();
        let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        // Rows are serialized top-first: map row r is text line 4 + (199 - r).
        for r in 104..=108 {
            let line_idx = 4 + (199 - r);
            let mut chars: Vec<char> = out[line_idx].chars().collect();
            for c in 108..=112 {
                chars[c] = '#';
            }
            out[line_idx] = chars.into_iter().collect();
        }
        let blocked = load_map(&out.join("\n")).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = pose(50.25, 50.25, 0.7);
        let a = simulate_scan(&open, &p, &LidarParams::coarse(), &mut rng).unwrap();
        let b = simulate_scan(&blocked, &p, &LidarParams::coarse(), &mut rng).unwrap();
        let mut some_shorter = false;
        for (ra, rb) in a.ranges.iter().zip(&b.ranges) {
            assert!(rb <= ra);
            some_shorter |= rb < ra;
        }
        assert!(some_shorter);
    }

    #[test]
    fn fixed_seed_scans_identical_with_noise() {
        let map = wall_world();
        let params = LidarParams {
            noise_sigma: 0.02,
            ..LidarParams::coarse()
        };
        let p = pose(5.0, 5.0, 1.1);
        let mut rng1 = ChaCha8Rng::seed_from_u64(9);
        let mut rng2 = ChaCha8Rng::seed_from_u64(9);
        let a = simulate_scan(&map, &p, &params, &mut rng1).unwrap();
        let b = simulate_scan(&map, &p, &params, &mut rng2).unwrap();
        assert_eq!(a.ranges, b.ranges);
    }

    #[test]
    fn symmetric_world_symmetric_ranges() {
        let map = wall_world();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Heading straight at the wall; beams mirrored about the center
        // see mirrored geometry (the world is symmetric about y = 5).
        let scan =
            simulate_scan(&map, &pose(5.0, 5.0, 0.0), &LidarParams::coarse(), &mut rng).unwrap();
        let n = scan.ranges.len();
        let diag = map.geom.resolution * std::f64::consts::SQRT_2;
        for i in 0..n / 2 {
            let d = (scan.ranges[i] - scan.ranges[n - 1 - i]).abs();
            assert!(d <= diag + 1e-9, "beam {i} asymmetry {d}");
        }
    }
}
