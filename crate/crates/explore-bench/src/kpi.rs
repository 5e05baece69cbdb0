//! Per-mission performance indicators and cross-trial aggregation.

use crate::battery::{BatteryParams, BatteryState};
use crate::envmap::GroundTruthMap;
use crate::mapping::BeliefMap;
use crate::navigation::{distance_travelled, RobotState};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionStatus {
    Complete,
    BatteryFailsafe,
    StrategyTerminated,
    FailedToStart,
    CollisionAbort,
    TimeCap,
}

impl MissionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissionStatus::Complete => "complete",
            MissionStatus::BatteryFailsafe => "battery-failsafe",
            MissionStatus::StrategyTerminated => "strategy-terminated",
            MissionStatus::FailedToStart => "failed-to-start",
            MissionStatus::CollisionAbort => "collision-abort",
            MissionStatus::TimeCap => "time-cap",
        }
    }
}

/// Per-step electrical and coverage log row, aligned with the
/// trajectory.
#[derive(Debug, Clone, Copy)]
pub struct StepTrace {
    pub t: f64,
    pub current: f64,
    pub discharged_ah: f64,
    pub voltage: f64,
    pub level: f64,
    pub explored_area: f64,
}

/// Everything a finished mission leaves behind.
#[derive(Debug, Clone)]
pub struct MissionResult {
    /// Timestamped states, one per simulation step, timestamps strictly
    /// increasing.
    pub trajectory: Vec<(f64, RobotState)>,
    /// One row per trajectory entry.
    pub trace: Vec<StepTrace>,
    pub belief_final: BeliefMap,
    pub battery_final: BatteryState,
    pub battery_params: BatteryParams,
    pub status: MissionStatus,
    pub sim_time: f64,
    pub decisions: u64,
    pub compute_ops: u64,
}

/// The six indicators for one mission.
#[derive(Debug, Clone, Copy)]
pub struct KpiReport {
    /// Exploration cost: total distance travelled (m).
    pub ec: f64,
    /// Exploration time (minutes of simulated time).
    pub tt: f64,
    /// Exploration efficiency: explored area per meter travelled.
    pub ef: f64,
    /// Remaining battery level (percent, charge-derived).
    pub bl: f64,
    /// Voltage-derived battery figure, logged alongside.
    pub bl_voltage: f64,
    /// Map completeness: explored over true free area, in [0, 1].
    pub mc: f64,
    /// Explored area (m^2), the Ae behind ef and mc.
    pub explored_area: f64,
    /// Free-classified explored area (m^2), emitted as a side column.
    pub explored_free_area: f64,
    pub success: bool,
}

pub const MC_SUCCESS_THRESHOLD: f64 = 0.97;

pub fn compute_kpis(result: &MissionResult, truth: &GroundTruthMap) -> KpiReport {
    compute_kpis_with_threshold(result, truth, MC_SUCCESS_THRESHOLD)
}

pub fn compute_kpis_with_threshold(
    result: &MissionResult,
    truth: &GroundTruthMap,
    mc_success_threshold: f64,
) -> KpiReport {
    let states: Vec<RobotState> = result.trajectory.iter().map(|(_, s)| *s).collect();
    let ec = distance_travelled(&states);
    let tt = result.sim_time / 60.0;
    let ae = result.belief_final.explored_area();
    let ef = if ec > 0.0 { ae / ec } else { 0.0 };
    let at = truth.free_area();
    let mc = if at > 0.0 { (ae / at).clamp(0.0, 1.0) } else { 0.0 };
    let bl = result.battery_final.level_percent(&result.battery_params);
    let bl_voltage = result.battery_final.voltage(&result.battery_params);
    KpiReport {
        ec,
        tt,
        ef,
        bl,
        bl_voltage,
        mc,
        explored_area: ae,
        explored_free_area: result.belief_final.free_area(),
        success: result.status == MissionStatus::Complete && mc >= mc_success_threshold,
    }
}

/// Mean and sample standard deviation (n − 1; zero when n = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some(MeanStd { mean, std })
}

/// One aggregate table row: mean ± std per indicator plus the success
/// ratio.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub n: usize,
    pub ec: MeanStd,
    pub tt: MeanStd,
    pub ef: MeanStd,
    pub bl: MeanStd,
    pub mc: MeanStd,
    pub successes: usize,
}

impl AggregateRow {
    /// Success ratio rendered like "3/5".
    pub fn ms(&self) -> String {
        format!("{}/{}", self.successes, self.n)
    }
}

#[derive(Debug, Error)]
pub enum KpiError {
    #[error("cannot aggregate an empty report list")]
    Empty,
}

pub fn aggregate(reports: &[KpiReport]) -> Result<AggregateRow, KpiError> {
    if reports.is_empty() {
        return Err(KpiError::Empty);
    }
    let pick = |f: fn(&KpiReport) -> f64| {
        let vals: Vec<f64> = reports.iter().map(f).collect();
        mean_std(&vals).expect("non-empty")
    };
    Ok(AggregateRow {
        n: reports.len(),
        ec: pick(|r| r.ec),
        tt: pick(|r| r.tt),
        ef: pick(|r| r.ef),
        bl: pick(|r| r.bl),
        mc: pick(|r| r.mc),
        successes: reports.iter().filter(|r| r.success).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{GridGeometry, WorldPoint};
    use crate::mapping::BeliefParams;

    fn tiny_truth() -> GroundTruthMap {
        let mut s = String::from("name tiny\nresolution 0.5\norigin 0 0\nentries 2.5,2.5\n");
        for r in 0..10 {
            for c in 0..10 {
                let edge = r == 0 || c == 0 || r == 9 || c == 9;
                s.push(if edge { '#' } else { '.' });
            }
            s.push('\n');
        }
        crate::envmap::load_map(&s).unwrap()
    }

    fn result_with(
        trajectory: Vec<(f64, RobotState)>,
        belief: BeliefMap,
        status: MissionStatus,
        sim_time: f64,
    ) -> MissionResult {
        MissionResult {
            trajectory,
            trace: Vec::new(),
            belief_final: belief,
            battery_final: BatteryState::full(),
            battery_params: BatteryParams::default(),
            status,
            sim_time,
            decisions: 0,
            compute_ops: 0,
        }
    }

    #[test]
    fn empty_mission_scores_zero() {
        let truth = tiny_truth();
        let belief = BeliefMap::new(truth.geom, BeliefParams::default());
        let r = result_with(Vec::new(), belief, MissionStatus::FailedToStart, 0.0);
        let k = compute_kpis(&r, &truth);
        assert_eq!(k.ec, 0.0);
        assert_eq!(k.ef, 0.0);
        assert_eq!(k.mc, 0.0);
        assert!(!k.success);
    }

    #[test]
    fn efficiency_is_area_over_cost() {
        let truth = tiny_truth();
        let mut belief = BeliefMap::new(truth.geom, BeliefParams::default());
        // Mark 16 cells (4 m^2 at 0.5 m) observed.
        for row in 1..5 {
            for col in 1..5 {
                belief.force_class(
                    crate::geom::GridCell::new(row, col),
                    crate::mapping::CellClass::Free,
                );
            }
        }
        let traj = vec![
            (0.1, RobotState::at(WorldPoint::new(1.0, 1.0), 0.0)),
            (0.2, RobotState::at(WorldPoint::new(3.0, 1.0), 0.0)),
        ];
        let r = result_with(traj, belief, MissionStatus::Complete, 30.0);
        let k = compute_kpis(&r, &truth);
        assert!((k.ec - 2.0).abs() < 1e-12);
        assert!((k.explored_area - 4.0).abs() < 1e-12);
        assert!((k.ef - 2.0).abs() < 1e-12);
        assert!((k.ef * k.ec - k.explored_area).abs() < 1e-9);
        assert!((k.tt - 0.5).abs() < 1e-12);
    }

    #[test]
    fn completeness_is_clamped_ratio() {
        let truth = tiny_truth(); // 64 free cells = 16 m^2
        let mut belief = BeliefMap::new(truth.geom, BeliefParams::default());
        for row in 1..9 {
            for col in 1..5 {
                belief.force_class(
                    crate::geom::GridCell::new(row, col),
                    crate::mapping::CellClass::Free,
                );
            }
        }
        let r = result_with(Vec::new(), belief, MissionStatus::Complete, 0.0);
        let k = compute_kpis(&r, &truth);
        // 32 of 64 free cells observed.
        assert!((k.mc - 0.5).abs() < 1e-12);
        assert!(!k.success, "below the completeness threshold");
    }

    #[test]
    fn success_needs_complete_status_and_coverage() {
        let truth = tiny_truth();
        let mut belief = BeliefMap::new(truth.geom, BeliefParams::default());
        for idx in 0..truth.geom.len() {
            belief.force_class(truth.geom.cell_at(idx), crate::mapping::CellClass::Free);
        }
        let geom = truth.geom;
        assert_eq!(geom, belief.geom);
        let full = result_with(Vec::new(), belief.clone(), MissionStatus::Complete, 1.0);
        assert!(compute_kpis(&full, &truth).success);
        let failed = result_with(Vec::new(), belief, MissionStatus::BatteryFailsafe, 1.0);
        assert!(!compute_kpis(&failed, &truth).success);
    }

    #[test]
    fn mean_std_hand_oracle() {
        let m = mean_std(&[8.0, 9.0]).unwrap();
        assert!((m.mean - 8.5).abs() < 1e-12);
        assert!((m.std - 0.7071).abs() < 1e-4);
        let same = mean_std(&[10.0, 10.0, 10.0]).unwrap();
        assert_eq!(same.mean, 10.0);
        assert_eq!(same.std, 0.0);
        let single = mean_std(&[3.0]).unwrap();
        assert_eq!(single.std, 0.0);
        assert!(mean_std(&[]).is_none());
    }

    #[test]
    fn aggregate_counts_successes() {
        let base = KpiReport {
            ec: 10.0,
            tt: 1.0,
            ef: 1.0,
            bl: 90.0,
            bl_voltage: 22.7,
            mc: 1.0,
            explored_area: 10.0,
            explored_free_area: 9.0,
            success: true,
        };
        let mut reports = vec![base; 5];
        reports[1].success = false;
        reports[4].success = false;
        let row = aggregate(&reports).unwrap();
        assert_eq!(row.ms(), "3/5");
        assert_eq!(row.ec.mean, 10.0);
        assert_eq!(row.ec.std, 0.0);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let mk = |ec: f64, success: bool| KpiReport {
            ec,
            tt: ec / 2.0,
            ef: 1.0 / ec,
            bl: 100.0 - ec,
            bl_voltage: 22.8,
            mc: 0.9,
            explored_area: 5.0,
            explored_free_area: 4.0,
            success,
        };
        let a = vec![mk(8.0, true), mk(9.0, false), mk(11.0, true)];
        let b = vec![a[2], a[0], a[1]];
        let ra = aggregate(&a).unwrap();
        let rb = aggregate(&b).unwrap();
        assert!((ra.ec.mean - rb.ec.mean).abs() < 1e-12);
        assert!((ra.ec.std - rb.ec.std).abs() < 1e-12);
        assert_eq!(ra.successes, rb.successes);
    }
}
