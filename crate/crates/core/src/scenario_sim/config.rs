use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LidarConfig, SimError, WeatherPreset, WeatherSchedule, WeatherTable};

/// The bundled default run configuration.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../config/default.toml");

/// Scenario kinematics and recording policy. Speeds in km/h, distances in
/// metres, times in seconds; lanes are numbered from 1 at the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lane_count: u32,
    pub lane_width: f64,
    pub ego_lane: u32,
    pub ego_initial_speed: f64,
    pub fast_vehicle_speed: f64,
    pub slow_vehicle_speed: f64,
    pub ego_fast_gap: f64,
    pub fast_slow_gap: f64,
    pub overtake_trigger_gap: f64,
    pub lane_change_duration: f64,
    pub time_headway: f64,
    pub standstill_gap: f64,
    pub max_decel: f64,
    pub max_accel: f64,
    pub sim_rate: f64,
    pub record_every: u32,
    pub total_recorded_frames: u32,
    pub test_val_split: [u32; 2],
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            lane_count: 4,
            lane_width: 3.5,
            ego_lane: 3,
            ego_initial_speed: 90.0,
            fast_vehicle_speed: 90.0,
            slow_vehicle_speed: 60.0,
            ego_fast_gap: 50.0,
            fast_slow_gap: 300.0,
            overtake_trigger_gap: 30.0,
            lane_change_duration: 3.0,
            time_headway: 1.8,
            standstill_gap: 5.0,
            max_decel: 4.0,
            max_accel: 2.0,
            sim_rate: 10.0,
            record_every: 5,
            total_recorded_frames: 547,
            test_val_split: [492, 55],
            seed: 20240117,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::InfeasibleConfig(msg));
        let [test, val] = self.test_val_split;
        if test + val != self.total_recorded_frames {
            return fail(format!(
                "test_val_split {test} + {val} must equal total_recorded_frames {}",
                self.total_recorded_frames
            ));
        }
        if self.fast_vehicle_speed <= self.slow_vehicle_speed {
            return fail("fast_vehicle_speed must exceed slow_vehicle_speed".into());
        }
        if self.slow_vehicle_speed < 0.0 || self.ego_initial_speed < 0.0 {
            return fail("speeds must be non-negative".into());
        }
        if self.record_every < 1 {
            return fail("record_every must be at least 1".into());
        }
        if !(self.sim_rate > 0.0) {
            return fail("sim_rate must be positive".into());
        }
        if self.lane_count < 2 || !(1..=self.lane_count).contains(&self.ego_lane) {
            return fail("ego_lane must lie within lane_count (at least 2 lanes)".into());
        }
        if !(self.lane_width > 0.0) {
            return fail("lane_width must be positive".into());
        }
        if self.ego_fast_gap <= 0.0 || self.fast_slow_gap <= 0.0 {
            return fail("initial gaps must be positive (vehicles would overlap)".into());
        }
        if self.overtake_trigger_gap >= self.fast_slow_gap {
            return fail("overtake_trigger_gap must be smaller than fast_slow_gap".into());
        }
        let positive = [
            ("lane_change_duration", self.lane_change_duration),
            ("time_headway", self.time_headway),
            ("max_decel", self.max_decel),
            ("max_accel", self.max_accel),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.standstill_gap < 0.0 {
            return fail("standstill_gap must be non-negative".into());
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sim_rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherSettings {
    /// Preset names, assigned to frames in contiguous blocks.
    pub schedule: Vec<String>,
    /// Replaces the bundled preset table when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Vec<WeatherPreset>>,
}

impl Default for WeatherSettings {
    fn default() -> Self {
        Self {
            schedule: WeatherTable::bundled().names(),
            preset: None,
        }
    }
}

/// Everything `generate_dataset` needs; mirrors the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub lidar: LidarConfig,
    pub weather: WeatherSettings,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn table(&self) -> Result<WeatherTable, SimError> {
        match &self.weather.preset {
            Some(presets) => {
                let table = WeatherTable {
                    presets: presets.clone(),
                };
                table.validate()?;
                Ok(table)
            }
            None => Ok(WeatherTable::bundled()),
        }
    }

    pub fn schedule(&self) -> WeatherSchedule {
        WeatherSchedule::new(self.weather.schedule.clone())
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.scenario.validate()?;
        self.lidar.validate()?;
        let table = self.table()?;
        self.schedule()
            .assign(&table, self.scenario.total_recorded_frames as usize)?;
        Ok(())
    }
}
