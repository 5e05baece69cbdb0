//! Battery discharge model with a coulomb-counting state of charge and
//! a linear internal-resistance voltage model.

use serde::{Deserialize, Serialize};

/// Electrical and load parameters. Defaults model a 6S pack sized for a
/// 30-minute hover endurance with a 5% reserve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryParams {
    /// Open-circuit voltage of the full pack (V).
    pub v0: f64,
    /// Pack capacity (Ah).
    pub capacity_ah: f64,
    /// Internal resistance (ohm).
    pub resistance: f64,
    /// Polarization coefficient for the charge-dependent sag term.
    pub gamma: f64,
    /// Steady hover current (A).
    pub hover_current: f64,
    /// Extra current per m/s of commanded linear speed (A s/m).
    pub k_linear: f64,
    /// Extra current per rad/s of commanded turn rate (A s/rad).
    pub k_angular: f64,
    /// Extra charge per unit of planning compute (Ah per operation).
    pub k_compute: f64,
    /// Remaining-charge percentage at which the fail-safe trips.
    pub failsafe_level: f64,
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            v0: 22.8,
            capacity_ah: 4.28,
            resistance: 0.01,
            gamma: 0.001,
            hover_current: Self::hover_current_for_endurance(4.28, 0.5, 0.95),
            k_linear: 2.0,
            k_angular: 0.8,
            k_compute: 1e-9,
            failsafe_level: 5.0,
        }
    }
}

impl BatteryParams {
    /// Constant current that drains `usable_fraction` of the capacity
    /// in `hours`. With the defaults: 0.95 * 4.28 / 0.5 = 8.132 A.
    pub fn hover_current_for_endurance(capacity_ah: f64, hours: f64, usable_fraction: f64) -> f64 {
        usable_fraction * capacity_ah / hours
    }
}

/// Charge state tracked by coulomb counting.
#[derive(Debug, Clone, Copy)]
pub struct BatteryState {
    /// Integrated discharged charge (Ah).
    pub discharged_ah: f64,
    /// Most recent discharge current (A).
    pub current: f64,
}

impl BatteryState {
    pub fn full() -> Self {
        Self {
            discharged_ah: 0.0,
            current: 0.0,
        }
    }

    /// Remaining charge as a percentage of capacity.
    pub fn level_percent(&self, params: &BatteryParams) -> f64 {
        (100.0 * (1.0 - self.discharged_ah / params.capacity_ah)).max(0.0)
    }

    /// Terminal voltage under the current load:
    /// `v = v0 + gamma * (1 - discharged / capacity) - resistance * current`.
    pub fn voltage(&self, params: &BatteryParams) -> f64 {
        params.v0 + params.gamma * (1.0 - self.discharged_ah / params.capacity_ah)
            - params.resistance * self.current
    }

    pub fn failsafe_triggered(&self, params: &BatteryParams) -> bool {
        self.level_percent(params) <= params.failsafe_level
    }
}

/// Instantaneous discharge current for a commanded motion plus the
/// compute surcharge for `compute_ops` planning operations spread over
/// the step.
pub fn draw_current(
    params: &BatteryParams,
    linear_velocity: f64,
    angular_velocity: f64,
    compute_ops: u64,
    dt: f64,
) -> f64 {
    assert!(dt > 0.0);
    params.hover_current
        + params.k_linear * linear_velocity.abs()
        + params.k_angular * angular_velocity.abs()
        + params.k_compute * compute_ops as f64 * 3600.0 / dt
}

/// Integrate one step of discharge at `current` amps for `dt` seconds.
pub fn discharge_step(state: &mut BatteryState, current: f64, dt: f64) {
    state.discharged_ah += current * dt / 3600.0;
    state.current = current;
}
