//! Mission state machine and batch harness: wires sensing, mapping,
//! goal selection, planning, control, and the battery per step, then
//! repeats missions over (environment, entry, strategy, trial) cells
//! and emits CSV tables.

use crate::battery::{discharge_step, draw_current, BatteryState};
use crate::config::{EnvironmentSpec, ExperimentConfig};
use crate::envmap::{bundled, load_map, GroundTruthMap, MapError};
use crate::geom::WorldPoint;
use crate::kpi::{
    aggregate, compute_kpis, AggregateRow, KpiReport, MissionResult, MissionStatus, StepTrace,
};
use crate::mapping::BeliefMap;
use crate::navigation::{
    dwa_step, inflate, integrate_unicycle, plan_astar, plan_toward, Path, RobotState,
};
use crate::sensing::simulate_scan;
use crate::strategies::{
    lightweight_next_goal, wfd_next_goal, ComputeLoadMeter, RrtStrategy, StrategyDecision,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path as FsPath;
use thiserror::Error;

/// Turn rate used to look around while no goal is available.
const SCAN_ROTATION_RATE: f64 = 0.3;

/// Consecutive goal-less decisions before a non-randomized strategy
/// gives up (the randomized one has its own idle rule).
const MAX_IDLE_DECISIONS: u32 = 20;

/// A goal whose pursuit moves the robot less than this many meters in
/// `STUCK_TIMEOUT` seconds counts as a failed plan.
const STUCK_PROGRESS: f64 = 0.2;
const STUCK_TIMEOUT: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Wfd,
    Lite,
    Rrt,
}

impl StrategyKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "wfd" => Some(StrategyKind::Wfd),
            "lite" => Some(StrategyKind::Lite),
            "rrt" => Some(StrategyKind::Rrt),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Wfd => "wfd",
            StrategyKind::Lite => "lite",
            StrategyKind::Rrt => "rrt",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("unknown strategy '{0}'")]
    UnknownStrategy(String),
    #[error("map load failed: {0}")]
    Map(#[from] MapError),
    #[error("entry point ({0}, {1}) is not valid free space")]
    BadEntry(f64, f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Resolve a config map reference: a bundled map name or a file path.
pub fn load_environment(spec: &str) -> Result<GroundTruthMap, RunnerError> {
    if let Some(map) = bundled::by_name(spec) {
        return Ok(map);
    }
    let text = std::fs::read_to_string(spec)?;
    Ok(load_map(&text)?)
}

/// Run one mission to termination. Deterministic for fixed inputs.
pub fn run_mission(
    map: &GroundTruthMap,
    entry: WorldPoint,
    strategy: StrategyKind,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<MissionResult, RunnerError> {
    match map.geom.cell_of(entry) {
        Some(c) if map.is_free(c) => {}
        _ => return Err(RunnerError::BadEntry(entry.x, entry.y)),
    }

    let lidar = cfg.lidar.to_params();
    let limits = cfg.kinematics();
    let dwa = cfg.dwa_params();
    let battery_params = cfg.battery;
    let wfd_params = cfg.strategy.wfd_params();
    let lite_params = cfg.strategy.lite_params();
    let run = &cfg.runner;
    let dt = run.dt;
    let time_cap = cfg.experiment.time_cap_minutes * 60.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut belief = BeliefMap::new(map.geom, cfg.mapping.to_params());
    let mut state = RobotState::at(entry, 0.0);
    let mut battery = BatteryState::full();
    let mut meter = ComputeLoadMeter::new();
    let mut rrt = (strategy == StrategyKind::Rrt)
        .then(|| RrtStrategy::new(entry, cfg.strategy.rrt_params(lidar.range_max)));

    let mut goal: Option<WorldPoint> = None;
    let mut path: Option<Path> = None;
    let mut blacklist: Vec<WorldPoint> = Vec::new();
    let mut fail_counts: Vec<(WorldPoint, u32)> = Vec::new();
    let mut last_decision = f64::NEG_INFINITY;
    let mut last_replan = f64::NEG_INFINITY;
    let mut decisions = 0u64;
    let mut goals_issued = 0u64;
    let mut idle_decisions = 0u32;
    let mut ops_so_far = 0u64;
    let mut t = 0.0;
    let mut status = MissionStatus::TimeCap;
    let mut anchor = entry;
    let mut anchor_t = 0.0;

    let mut trajectory = vec![(t, state)];
    let mut trace = vec![StepTrace {
        t,
        current: 0.0,
        discharged_ah: battery.discharged_ah,
        voltage: battery.voltage(&battery_params),
        level: battery.level_percent(&battery_params),
        explored_area: 0.0,
    }];

    'mission: while t < time_cap - 1e-9 {
        // Sense and map.
        let scan = match simulate_scan(map, &state, &lidar, &mut rng) {
            Ok(s) => s,
            Err(_) => {
                status = MissionStatus::CollisionAbort;
                break 'mission;
            }
        };
        belief.integrate_scan(&scan);

        // Decide when goal-less, arrived, or the cadence expires.
        let reached = goal.map_or(false, |g| state.position.distance_to(g) <= run.goal_tolerance);
        if reached {
            goal = None;
            path = None;
        }
        if goal.is_none() || t - last_decision >= run.decision_period {
            last_decision = t;
            decisions += 1;
            meter.begin_decision();
            let decision = match strategy {
                StrategyKind::Wfd => wfd_next_goal(&belief, state.position, &wfd_params, &blacklist, &mut meter),
                StrategyKind::Lite => lightweight_next_goal(
                    &belief,
                    state.position,
                    &blacklist,
                    &lite_params,
                    &mut meter,
                ),
                StrategyKind::Rrt => rrt
                    .as_mut()
                    .expect("rrt state")
                    .decide(&belief, state.position, &mut rng, &mut meter),
            };
            if std::env::var_os("EXPLORE_DEBUG").is_some() {
                eprintln!(
                    "t={t:.1} pos=({:.2},{:.2}) decision={decision:?}",
                    state.position.x, state.position.y
                );
            }
            match decision {
                Ok(StrategyDecision::Goal { point, .. }) => {
                    let banned = blacklist.iter().any(|b| b.distance_to(point) <= 0.3);
                    if banned {
                        goal = None;
                        idle_decisions += 1;
                        if let Some(rrt) = rrt.as_mut() {
                            rrt.reject(point);
                        }
                    } else if state.position.distance_to(point) <= run.goal_tolerance {
                        // Already standing on the offered goal: there is
                        // nothing to pursue, and a goal that stays on
                        // offer after being reached marks a frontier the
                        // sensor cannot clear from here (unknown space
                        // behind observed walls). Fail it toward the
                        // blacklist instead of dwelling on it.
                        goal = None;
                        record_goal_failure(
                            &mut fail_counts,
                            &mut blacklist,
                            point,
                            run.blacklist_after,
                        );
                        if let Some(rrt) = rrt.as_mut() {
                            rrt.reject(point);
                        }
                    } else {
                        if goal != Some(point) {
                            path = None;
                        }
                        goal = Some(point);
                        goals_issued += 1;
                        idle_decisions = 0;
                        if let Some(rrt) = rrt.as_mut() {
                            rrt.mark_visited(point);
                        }
                    }
                }
                Ok(StrategyDecision::Complete) => {
                    status = if strategy == StrategyKind::Rrt && goals_issued == 0 {
                        MissionStatus::FailedToStart
                    } else {
                        MissionStatus::Complete
                    };
                    break 'mission;
                }
                Ok(StrategyDecision::NoPathableGoal) => {
                    goal = None;
                    idle_decisions += 1;
                }
                Err(_) => {
                    status = MissionStatus::StrategyTerminated;
                    break 'mission;
                }
            }
            if idle_decisions >= MAX_IDLE_DECISIONS {
                status = if goals_issued == 0 {
                    MissionStatus::FailedToStart
                } else {
                    MissionStatus::StrategyTerminated
                };
                break 'mission;
            }
        }

        // (Re)plan toward the current goal.
        if let Some(g) = goal {
            if path.is_none() || t - last_replan >= run.replan_period {
                last_replan = t;
                let mask = inflate(&belief, run.inflation_radius);
                match plan_astar(&mask, state.position, g) {
                    Ok(p) => path = Some(p),
                    // The goal cell may not be mapped traversable yet;
                    // drive toward it and let new scans open the way.
                    Err(_) => match plan_toward(&mask, state.position, g) {
                        Ok(p) if p.total_length() > run.goal_tolerance => path = Some(p),
                        _ => {
                            path = None;
                            goal = None;
                            record_goal_failure(
                                &mut fail_counts,
                                &mut blacklist,
                                g,
                                run.blacklist_after,
                            );
                        }
                    },
                }
            }
        }

        // Act: follow the path, or rotate in place to widen the scan.
        let (cmd_v, cmd_w) = match (&goal, &path) {
            (Some(_), Some(p)) => {
                let (cmd, next) = dwa_step(&state, p, &belief, &limits, &dwa, dt);
                state = next;
                (cmd.linear, cmd.angular)
            }
            _ => {
                state = integrate_unicycle(&state, 0.0, SCAN_ROTATION_RATE, dt);
                (0.0, SCAN_ROTATION_RATE)
            }
        };

        // Watchdog: pursuing a goal without spatial progress counts as
        // a plan failure, so unreachable-in-practice goals end up
        // blacklisted instead of deadlocking the mission.
        if state.position.distance_to(anchor) > STUCK_PROGRESS {
            anchor = state.position;
            anchor_t = t;
        } else if goal.is_some() && t - anchor_t > STUCK_TIMEOUT {
            let g = goal.take().expect("goal present");
            path = None;
            anchor_t = t;
            record_goal_failure(&mut fail_counts, &mut blacklist, g, run.blacklist_after);
        } else if goal.is_none() {
            anchor_t = t;
        }

        // Battery: motion plus this step's share of compute load.
        let ops_delta = meter.mission_ops() - ops_so_far;
        ops_so_far = meter.mission_ops();
        let current = draw_current(&battery_params, cmd_v, cmd_w, ops_delta, dt);
        discharge_step(&mut battery, current, dt);

        t += dt;
        trajectory.push((t, state));
        trace.push(StepTrace {
            t,
            current,
            discharged_ah: battery.discharged_ah,
            voltage: battery.voltage(&battery_params),
            level: battery.level_percent(&battery_params),
            explored_area: belief.explored_area(),
        });

        if !map.is_free_at(state.position) {
            status = MissionStatus::CollisionAbort;
            break 'mission;
        }
        if battery.failsafe_triggered(&battery_params) {
            status = MissionStatus::BatteryFailsafe;
            break 'mission;
        }
    }

    Ok(MissionResult {
        trajectory,
        trace,
        belief_final: belief,
        battery_final: battery,
        battery_params,
        status,
        sim_time: t,
        decisions,
        compute_ops: meter.mission_ops(),
    })
}

fn record_goal_failure(
    fail_counts: &mut Vec<(WorldPoint, u32)>,
    blacklist: &mut Vec<WorldPoint>,
    goal: WorldPoint,
    blacklist_after: u32,
) {
    let fails = match fail_counts.iter_mut().find(|(p, _)| p.distance_to(goal) <= 0.3) {
        Some((_, n)) => {
            *n += 1;
            *n
        }
        None => {
            fail_counts.push((goal, 1));
            1
        }
    };
    if fails >= blacklist_after {
        blacklist.push(goal);
    }
}

/// One results.csv row.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub env: String,
    pub entry_index: usize,
    pub entry: WorldPoint,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub status: MissionStatus,
    pub kpi: KpiReport,
    pub decisions: u64,
    pub compute_ops: u64,
}

#[derive(Debug, Clone)]
pub struct AggregateKey {
    pub env: String,
    pub entry_index: usize,
    pub strategy: StrategyKind,
}

pub struct BatchSummary {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<(AggregateKey, AggregateRow)>,
}

struct MissionSpec {
    env: String,
    entry_index: usize,
    entry: WorldPoint,
    strategy: StrategyKind,
    seed: u64,
}

/// Execute every (environment, entry, strategy) cell for the
/// configured trial count. Missions run in parallel; all outputs are
/// ordered by cell then trial, so repeated runs produce identical
/// bytes.
pub fn run_batch(cfg: &ExperimentConfig, out_dir: &FsPath) -> Result<BatchSummary, RunnerError> {
    std::fs::create_dir_all(out_dir)?;

    let mut maps: Vec<(String, GroundTruthMap)> = Vec::new();
    for env in &cfg.environments {
        if !maps.iter().any(|(n, _)| n == &env.map) {
            maps.push((env.map.clone(), load_environment(&env.map)?));
        }
    }
    let map_of = |name: &str| &maps.iter().find(|(n, _)| n == name).expect("loaded").1;

    let mut specs: Vec<MissionSpec> = Vec::new();
    for env in &cfg.environments {
        let map = map_of(&env.map);
        let entries: Vec<WorldPoint> = if env.entries.is_empty() {
            map.entry_points.clone()
        } else {
            env.entries
                .iter()
                .map(|[x, y]| WorldPoint::new(*x, *y))
                .collect()
        };
        let trials = env.trials.unwrap_or(cfg.experiment.trials_per_cell);
        for (entry_index, entry) in entries.iter().enumerate() {
            for strategy_name in &cfg.experiment.strategies {
                let strategy = StrategyKind::parse(strategy_name)
                    .ok_or_else(|| RunnerError::UnknownStrategy(strategy_name.clone()))?;
                for trial in 0..trials {
                    specs.push(MissionSpec {
                        env: env.map.clone(),
                        entry_index,
                        entry: *entry,
                        strategy,
                        seed: cfg.experiment.seed_base + trial as u64,
                    });
                }
            }
        }
    }

    let outcomes: Vec<(usize, Result<MissionResult, RunnerError>)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            (
                i,
                run_mission(map_of(&spec.env), spec.entry, spec.strategy, spec.seed, cfg),
            )
        })
        .collect();
    let mut ordered: Vec<(usize, Result<MissionResult, RunnerError>)> = outcomes;
    ordered.sort_by_key(|(i, _)| *i);

    let traces_dir = out_dir.join("traces");
    let snaps_dir = out_dir.join("snapshots");
    std::fs::create_dir_all(&traces_dir)?;
    if cfg.runner.snapshots {
        std::fs::create_dir_all(&snaps_dir)?;
    }

    let mut rows: Vec<ResultRow> = Vec::new();
    for (i, outcome) in ordered {
        let spec = &specs[i];
        let result = outcome?;
        let map = map_of(&spec.env);
        let kpi = compute_kpis(&result, map);
        let stem = format!(
            "{}_e{}_{}_s{}",
            spec.env,
            spec.entry_index,
            spec.strategy.as_str(),
            spec.seed
        );
        std::fs::write(traces_dir.join(format!("{stem}.csv")), trace_csv(&result))?;
        if cfg.runner.snapshots {
            std::fs::write(snaps_dir.join(format!("{stem}.pgm")), result.belief_final.to_pgm())?;
        }
        rows.push(ResultRow {
            env: spec.env.clone(),
            entry_index: spec.entry_index,
            entry: spec.entry,
            strategy: spec.strategy,
            seed: spec.seed,
            status: result.status,
            kpi,
            decisions: result.decisions,
            compute_ops: result.compute_ops,
        });
    }

    let mut aggregates: Vec<(AggregateKey, AggregateRow)> = Vec::new();
    for env in &cfg.environments {
        let entry_count = if env.entries.is_empty() {
            map_of(&env.map).entry_points.len()
        } else {
            env.entries.len()
        };
        for entry_index in 0..entry_count {
            for strategy_name in &cfg.experiment.strategies {
                let strategy = StrategyKind::parse(strategy_name).expect("validated");
                let cell: Vec<KpiReport> = rows
                    .iter()
                    .filter(|r| {
                        r.env == env.map && r.entry_index == entry_index && r.strategy == strategy
                    })
                    .map(|r| r.kpi)
                    .collect();
                if let Ok(agg) = aggregate(&cell) {
                    aggregates.push((
                        AggregateKey {
                            env: env.map.clone(),
                            entry_index,
                            strategy,
                        },
                        agg,
                    ));
                }
            }
        }
    }

    std::fs::write(out_dir.join("results.csv"), results_csv(&rows))?;
    std::fs::write(out_dir.join("aggregate.csv"), aggregate_csv(&aggregates))?;
    std::fs::write(out_dir.join("spider.csv"), spider_csv(&aggregates))?;

    Ok(BatchSummary { rows, aggregates })
}

fn trace_csv(result: &MissionResult) -> String {
    let mut s = String::from(
        "t,x,y,heading,v,omega,current,discharged_ah,voltage,level,explored_area\n",
    );
    for ((t, state), row) in result.trajectory.iter().zip(&result.trace) {
        let _ = writeln!(
            s,
            "{t:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9},{:.9},{:.6},{:.6}",
            state.position.x,
            state.position.y,
            state.heading,
            state.linear_velocity,
            state.angular_velocity,
            row.current,
            row.discharged_ah,
            row.voltage,
            row.level,
            row.explored_area,
        );
    }
    s
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(
        "env,entry_index,entry_x,entry_y,strategy,seed,status,ec,tt,ef,bl,mc,explored_area,decisions,compute_ops\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.env,
            r.entry_index,
            r.entry.x,
            r.entry.y,
            r.strategy.as_str(),
            r.seed,
            r.status.as_str(),
            r.kpi.ec,
            r.kpi.tt,
            r.kpi.ef,
            r.kpi.bl,
            r.kpi.mc,
            r.kpi.explored_area,
            r.decisions,
            r.compute_ops,
        );
    }
    s
}

pub fn aggregate_csv(aggregates: &[(AggregateKey, AggregateRow)]) -> String {
    let mut s = String::from(
        "env,entry_index,strategy,n,ec_mean,ec_std,tt_mean,tt_std,ef_mean,ef_std,bl_mean,bl_std,mc_mean,mc_std,ms\n",
    );
    for (key, a) in aggregates {
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            key.env,
            key.entry_index,
            key.strategy.as_str(),
            a.n,
            a.ec.mean,
            a.ec.std,
            a.tt.mean,
            a.tt.std,
            a.ef.mean,
            a.ef.std,
            a.bl.mean,
            a.bl.std,
            a.mc.mean,
            a.mc.std,
            a.ms(),
        );
    }
    s
}

/// Per-strategy KPI vector normalized by the per-environment maximum
/// of each indicator, for radar-style plotting.
pub fn spider_csv(aggregates: &[(AggregateKey, AggregateRow)]) -> String {
    let mut s = String::from("env,strategy,ec,tt,ef,bl,mc,ms\n");
    let mut envs: Vec<&str> = Vec::new();
    for (key, _) in aggregates {
        if !envs.contains(&key.env.as_str()) {
            envs.push(&key.env);
        }
    }
    for env in envs {
        let cell: Vec<&(AggregateKey, AggregateRow)> =
            aggregates.iter().filter(|(k, _)| k.env == env).collect();
        let max_of = |f: fn(&AggregateRow) -> f64| {
            cell.iter().map(|(_, a)| f(a)).fold(0.0f64, f64::max)
        };
        let maxes = [
            max_of(|a| a.ec.mean),
            max_of(|a| a.tt.mean),
            max_of(|a| a.ef.mean),
            max_of(|a| a.bl.mean),
            max_of(|a| a.mc.mean),
            max_of(|a| a.successes as f64 / a.n as f64),
        ];
        // Collapse entries: average over entry indices per strategy.
        let mut strategies: Vec<StrategyKind> = Vec::new();
        for (k, _) in &cell {
            if !strategies.contains(&k.strategy) {
                strategies.push(k.strategy);
            }
        }
        for strategy in strategies {
            let mine: Vec<&&(AggregateKey, AggregateRow)> =
                cell.iter().filter(|(k, _)| k.strategy == strategy).collect();
            let n = mine.len() as f64;
            let avg = |f: &dyn Fn(&AggregateRow) -> f64| {
                mine.iter().map(|(_, a)| f(a)).sum::<f64>() / n
            };
            let vals = [
                avg(&|a| a.ec.mean),
                avg(&|a| a.tt.mean),
                avg(&|a| a.ef.mean),
                avg(&|a| a.bl.mean),
                avg(&|a| a.mc.mean),
                avg(&|a| a.successes as f64 / a.n as f64),
            ];
            let norm: Vec<f64> = vals
                .iter()
                .zip(&maxes)
                .map(|(v, m)| if *m > 0.0 { v / m } else { 0.0 })
                .collect();
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                env,
                strategy.as_str(),
                norm[0],
                norm[1],
                norm[2],
                norm[3],
                norm[4],
                norm[5],
            );
        }
    }
    s
}

/// Build a config for a single-cell run (used by the CLI mission
/// subcommand and tests).
pub fn single_cell_config(map: &str, entry: WorldPoint, strategy: &str, trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.strategies = vec![strategy.to_string()];
    cfg.experiment.trials_per_cell = trials;
    cfg.environments = vec![EnvironmentSpec {
        map: map.to_string(),
        entries: vec![[entry.x, entry.y]],
        trials: None,
    }];
    cfg
}
