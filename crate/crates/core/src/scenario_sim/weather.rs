use std::fmt;

use serde::{Deserialize, Serialize};

use super::SimError;

const BUNDLED_TABLE: &str = include_str!("../../config/weather.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeOfDay {
    Noon,
    Night,
    Sunset,
}

/// Weather rows, declared from mildest to harshest for the LiDAR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Clear,
    Cloudy,
    Wet,
    WetCloudy,
    SoftRain,
    MidRain,
    HardRain,
}

impl Condition {
    pub const BY_SEVERITY: [Condition; 7] = [
        Condition::Clear,
        Condition::Cloudy,
        Condition::Wet,
        Condition::WetCloudy,
        Condition::SoftRain,
        Condition::MidRain,
        Condition::HardRain,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherPreset {
    pub name: String,
    pub time_of_day: TimeOfDay,
    pub condition: Condition,
    pub precipitation: f64,
    pub wetness: f64,
    pub cloudiness: f64,
    pub sun_altitude_deg: f64,
    /// Std-dev of Gaussian range noise, metres.
    pub range_noise_sigma: f64,
    /// Drop probability at zero range.
    pub dropout_base: f64,
    /// Intensity attenuation, 1/m.
    pub attenuation_coeff: f64,
    pub intensity_scale: f64,
}

impl WeatherPreset {
    /// A preset with no corruption at all; useful for geometry checks.
    pub fn noiseless() -> Self {
        Self {
            name: "Noiseless".to_string(),
            time_of_day: TimeOfDay::Noon,
            condition: Condition::Clear,
            precipitation: 0.0,
            wetness: 0.0,
            cloudiness: 0.0,
            sun_altitude_deg: 45.0,
            range_noise_sigma: 0.0,
            dropout_base: 0.0,
            attenuation_coeff: 0.0,
            intensity_scale: 1.0,
        }
    }

    fn check(&self) -> Result<(), String> {
        let fractions = [
            ("precipitation", self.precipitation),
            ("wetness", self.wetness),
            ("cloudiness", self.cloudiness),
            ("dropout_base", self.dropout_base),
            ("intensity_scale", self.intensity_scale),
        ];
        for (field, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{}: {field} = {v} is outside [0, 1]", self.name));
            }
        }
        if !(self.range_noise_sigma >= 0.0 && self.attenuation_coeff >= 0.0) {
            return Err(format!("{}: noise parameters must be non-negative", self.name));
        }
        Ok(())
    }
}

impl fmt::Display for WeatherPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherTable {
    #[serde(rename = "preset")]
    pub presets: Vec<WeatherPreset>,
}

impl WeatherTable {
    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_TABLE).expect("bundled weather table is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let table: WeatherTable =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    /// Exactly 21 uniquely named presets: each condition once per time of day.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(format!("weather table: {msg}")));
        if self.presets.len() != 21 {
            return bad(format!("expected 21 presets, found {}", self.presets.len()));
        }
        for p in &self.presets {
            if let Err(msg) = p.check() {
                return bad(msg);
            }
        }
        for time in [TimeOfDay::Noon, TimeOfDay::Night, TimeOfDay::Sunset] {
            for condition in Condition::BY_SEVERITY {
                let n = self
                    .presets
                    .iter()
                    .filter(|p| p.time_of_day == time && p.condition == condition)
                    .count();
                if n != 1 {
                    return bad(format!("{n} presets for {condition:?} at {time:?}"));
                }
            }
        }
        let mut names: Vec<&str> = self.presets.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != 21 {
            return bad("preset names are not unique".into());
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&WeatherPreset, SimError> {
        self.presets
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| SimError::UnknownPreset(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.presets.iter().map(|p| p.name.clone()).collect()
    }

    /// The seven presets of one time of day, mildest first.
    pub fn column(&self, time: TimeOfDay) -> Vec<&WeatherPreset> {
        let mut column: Vec<&WeatherPreset> =
            self.presets.iter().filter(|p| p.time_of_day == time).collect();
        column.sort_by_key(|p| p.condition);
        column
    }
}

impl Default for WeatherTable {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Assigns presets to frames in contiguous blocks of `ceil(frames / presets)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSchedule {
    pub presets: Vec<String>,
}

impl WeatherSchedule {
    pub fn new(presets: Vec<String>) -> Self {
        Self { presets }
    }

    pub fn assign<'t>(
        &self,
        table: &'t WeatherTable,
        frames: usize,
    ) -> Result<Vec<&'t WeatherPreset>, SimError> {
        if self.presets.is_empty() {
            return Err(SimError::Config("weather schedule is empty".into()));
        }
        let resolved = self
            .presets
            .iter()
            .map(|name| table.get(name))
            .collect::<Result<Vec<_>, _>>()?;
        let block = frames.div_ceil(resolved.len()).max(1);
        Ok((0..frames).map(|i| resolved[i / block]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_has_all_presets() {
        let table = WeatherTable::bundled();
        assert_eq!(table.presets.len(), 21);
        for time in [TimeOfDay::Noon, TimeOfDay::Night, TimeOfDay::Sunset] {
            assert_eq!(table.column(time).len(), 7);
        }
        for name in ["ClearNoon", "MidRainyNoon", "MidRainyNight", "MidRainSunset", "SoftRainSunset"] {
            assert!(table.get(name).is_ok(), "{name}");
        }
    }

    #[test]
    fn parameters_degrade_with_severity() {
        let table = WeatherTable::bundled();
        for time in [TimeOfDay::Noon, TimeOfDay::Night, TimeOfDay::Sunset] {
            let column = table.column(time);
            for pair in column.windows(2) {
                let (a, b) = (pair[0], pair[1]);
                assert!(b.range_noise_sigma >= a.range_noise_sigma, "{a} -> {b}");
                assert!(b.dropout_base >= a.dropout_base, "{a} -> {b}");
                assert!(b.precipitation >= a.precipitation, "{a} -> {b}");
                assert!(b.attenuation_coeff >= a.attenuation_coeff, "{a} -> {b}");
                assert!(b.intensity_scale < a.intensity_scale, "{a} -> {b}");
            }
        }
        let clear = |t| table.column(t)[0].intensity_scale;
        assert_eq!(clear(TimeOfDay::Noon), 1.0);
        assert_eq!(clear(TimeOfDay::Sunset), 0.9);
        assert_eq!(clear(TimeOfDay::Night), 0.8);
    }

    #[test]
    fn rejects_incomplete_table() {
        let mut table = WeatherTable::bundled();
        table.presets.pop();
        assert!(table.validate().is_err());
        let mut table = WeatherTable::bundled();
        table.presets[3].dropout_base = 1.5;
        assert!(table.validate().is_err());
    }

    #[test]
    fn schedule_blocks() {
        let table = WeatherTable::bundled();
        let schedule = WeatherSchedule::new(table.names());
        let assigned = schedule.assign(&table, 547).unwrap();
        assert_eq!(assigned.len(), 547);
        // ceil(547 / 21) = 27 frames per preset, 7 for the last
        assert!(assigned[..27].iter().all(|p| p.name == "ClearNoon"));
        assert_eq!(assigned[27].name, "CloudyNoon");
        assert_eq!(assigned.iter().filter(|p| p.name == "SoftRainSunset").count(), 7);
        assert!(schedule.assign(&table, 0).unwrap().is_empty());
    }

    #[test]
    fn schedule_unknown_name() {
        let table = WeatherTable::bundled();
        let schedule = WeatherSchedule::new(vec!["Foggy".into()]);
        assert!(matches!(schedule.assign(&table, 3), Err(SimError::UnknownPreset(_))));
    }
}
