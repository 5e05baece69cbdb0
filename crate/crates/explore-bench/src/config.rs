//! Experiment configuration: a TOML file with one section per module,
//! every key optional with the module defaults.

use crate::battery::BatteryParams;
use crate::mapping::BeliefParams;
use crate::navigation::{DwaParams, KinematicLimits};
use crate::sensing::LidarParams;
use crate::strategies::{LiteParams, RrtParams, WfdParams};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(rename = "environment")]
    pub environments: Vec<EnvironmentSpec>,
    pub lidar: LidarSection,
    pub mapping: MappingSection,
    pub battery: BatteryParams,
    pub strategy: StrategySection,
    pub runner: RunnerSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentSection::default(),
            environments: Vec::new(),
            lidar: LidarSection::default(),
            mapping: MappingSection::default(),
            battery: BatteryParams::default(),
            strategy: StrategySection::default(),
            runner: RunnerSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSection {
    pub strategies: Vec<String>,
    pub trials_per_cell: usize,
    pub seed_base: u64,
    /// Simulated-minutes hang guard per mission.
    pub time_cap_minutes: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            strategies: vec!["wfd".into(), "lite".into(), "rrt".into()],
            trials_per_cell: 5,
            seed_base: 42,
            time_cap_minutes: 40.0,
        }
    }
}

/// One environment cell: a bundled map name or a map file path, plus
/// the entry points to start from (defaults to the map's own list).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentSpec {
    pub map: String,
    pub entries: Vec<[f64; 2]>,
    /// Overrides `trials_per_cell` for this environment when set.
    pub trials: Option<usize>,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        Self {
            map: String::new(),
            entries: Vec::new(),
            trials: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LidarSection {
    pub fov_deg: f64,
    pub angular_resolution_deg: f64,
    pub range_max: f64,
    pub noise_sigma: f64,
}

impl Default for LidarSection {
    fn default() -> Self {
        Self {
            fov_deg: 270.0,
            angular_resolution_deg: 1.0,
            range_max: 8.0,
            noise_sigma: 0.0,
        }
    }
}

impl LidarSection {
    pub fn to_params(&self) -> LidarParams {
        let half = self.fov_deg.to_radians() / 2.0;
        LidarParams {
            angle_min: -half,
            angle_max: half,
            angular_resolution: self.angular_resolution_deg.to_radians(),
            range_max: self.range_max,
            noise_sigma: self.noise_sigma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingSection {
    pub log_odds_free: f64,
    pub log_odds_occupied: f64,
    pub log_odds_min: f64,
    pub log_odds_max: f64,
    pub free_threshold: f64,
    pub occupied_threshold: f64,
}

impl Default for MappingSection {
    fn default() -> Self {
        let p = BeliefParams::default();
        Self {
            log_odds_free: p.l_free_increment,
            log_odds_occupied: p.l_occ_increment,
            log_odds_min: p.l_min,
            log_odds_max: p.l_max,
            free_threshold: p.l_free_threshold,
            occupied_threshold: p.l_occ_threshold,
        }
    }
}

impl MappingSection {
    pub fn to_params(&self) -> BeliefParams {
        BeliefParams {
            l_free_increment: self.log_odds_free,
            l_occ_increment: self.log_odds_occupied,
            l_min: self.log_odds_min,
            l_max: self.log_odds_max,
            l_free_threshold: self.free_threshold,
            l_occ_threshold: self.occupied_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategySection {
    pub goal_obstacle_radius: f64,
    pub min_frontier_size: usize,
    pub lite_w_gain: f64,
    pub lite_w_dist: f64,
    pub rrt_eta: f64,
    pub rrt_lambda: f64,
    pub rrt_t_idle: u32,
    pub rrt_iterations_per_decision: usize,
    pub rrt_cluster_cutoff: f64,
}

impl Default for StrategySection {
    fn default() -> Self {
        let lite = LiteParams::default();
        let rrt = RrtParams::default();
        Self {
            goal_obstacle_radius: 1.0,
            min_frontier_size: 3,
            lite_w_gain: lite.w_gain,
            lite_w_dist: lite.w_dist,
            rrt_eta: rrt.eta,
            rrt_lambda: rrt.lambda,
            rrt_t_idle: rrt.t_idle,
            rrt_iterations_per_decision: rrt.iterations_per_decision,
            rrt_cluster_cutoff: rrt.cluster_cutoff,
        }
    }
}

impl StrategySection {
    pub fn wfd_params(&self) -> WfdParams {
        let mut p = WfdParams::default();
        p.goal_obstacle_radius = self.goal_obstacle_radius;
        p.frontier.min_frontier_size = self.min_frontier_size;
        p
    }

    pub fn lite_params(&self) -> LiteParams {
        let mut p = LiteParams::default();
        p.w_gain = self.lite_w_gain;
        p.w_dist = self.lite_w_dist;
        p.goal_obstacle_radius = self.goal_obstacle_radius;
        p.frontier.min_frontier_size = self.min_frontier_size;
        p
    }

    pub fn rrt_params(&self, lidar_range: f64) -> RrtParams {
        RrtParams {
            eta: self.rrt_eta,
            lambda: self.rrt_lambda,
            t_idle: self.rrt_t_idle,
            iterations_per_decision: self.rrt_iterations_per_decision,
            gain_radius: lidar_range,
            cluster_cutoff: self.rrt_cluster_cutoff,
            goal_obstacle_radius: self.goal_obstacle_radius,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunnerSection {
    pub dt: f64,
    /// Goal considered reached within this distance (m).
    pub goal_tolerance: f64,
    /// Seconds between forced strategy decisions.
    pub decision_period: f64,
    /// Seconds between global replans toward the current goal.
    pub replan_period: f64,
    /// Consecutive plan failures before a goal is blacklisted.
    pub blacklist_after: u32,
    pub inflation_radius: f64,
    /// Belief snapshot PGMs written at mission end when true.
    pub snapshots: bool,
}

impl Default for RunnerSection {
    fn default() -> Self {
        Self {
            dt: 0.1,
            goal_tolerance: 0.3,
            decision_period: 10.0,
            replan_period: 2.0,
            blacklist_after: 3,
            inflation_radius: 0.26,
            snapshots: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.experiment.trials_per_cell == 0 {
            return Err(ConfigError::Invalid("trials_per_cell must be >= 1".into()));
        }
        if self.environments.is_empty() {
            return Err(ConfigError::Invalid(
                "at least one [[environment]] is required".into(),
            ));
        }
        for env in &self.environments {
            if env.map.is_empty() {
                return Err(ConfigError::Invalid("environment without a map".into()));
            }
            if env.trials == Some(0) {
                return Err(ConfigError::Invalid(format!(
                    "environment {}: trials must be >= 1",
                    env.map
                )));
            }
        }
        for s in &self.experiment.strategies {
            if !matches!(s.as_str(), "wfd" | "lite" | "rrt") {
                return Err(ConfigError::Invalid(format!("unknown strategy '{s}'")));
            }
        }
        if self.runner.dt <= 0.0 {
            return Err(ConfigError::Invalid("dt must be positive".into()));
        }
        Ok(())
    }

    pub fn kinematics(&self) -> KinematicLimits {
        KinematicLimits::default()
    }

    pub fn dwa_params(&self) -> DwaParams {
        DwaParams {
            // Slightly tighter than the planner's inflation so gaps
            // that A* routes through stay passable for the controller.
            robot_clearance: (self.runner.inflation_radius - 0.08).max(0.12),
            ..DwaParams::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            [[environment]]
            map = "room"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.trials_per_cell, 5);
        assert_eq!(cfg.experiment.seed_base, 42);
        assert_eq!(cfg.environments.len(), 1);
        assert!(cfg.environments[0].entries.is_empty());
        assert_eq!(cfg.lidar.to_params().range_max, 8.0);
    }

    #[test]
    fn overrides_are_honored() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            [experiment]
            strategies = ["wfd"]
            trials_per_cell = 2
            seed_base = 7
            time_cap_minutes = 10.0

            [[environment]]
            map = "school"
            entries = [[-5.0, -22.0]]
            trials = 3

            [lidar]
            angular_resolution_deg = 0.25

            [strategy]
            rrt_lambda = 5.0

            [battery]
            k_linear = 2.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.experiment.strategies, vec!["wfd"]);
        assert_eq!(cfg.environments[0].trials, Some(3));
        assert!((cfg.lidar.to_params().angular_resolution - 0.25f64.to_radians()).abs() < 1e-12);
        assert_eq!(cfg.strategy.rrt_params(8.0).lambda, 5.0);
        assert_eq!(cfg.battery.k_linear, 2.5);
        // Untouched battery keys keep their defaults.
        assert_eq!(cfg.battery.v0, 22.8);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml("").is_err());
        assert!(ExperimentConfig::from_toml(
            r#"
            [experiment]
            trials_per_cell = 0
            [[environment]]
            map = "room"
            "#
        )
        .is_err());
        assert!(ExperimentConfig::from_toml(
            r#"
            [experiment]
            strategies = ["dfs"]
            [[environment]]
            map = "room"
            "#
        )
        .is_err());
    }
}
