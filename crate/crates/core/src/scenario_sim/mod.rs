//! In-process replacement for a driving-simulator pipeline: a kinematic
//! highway-overtake scenario, a ray-cast spinning LiDAR with weather-dependent
//! corruption, and a writer that emits the whole run as a KITTI tree.

mod config;
mod generate;
mod lidar;
mod render;
mod timeline;
mod visibility;
mod weather;

use std::path::PathBuf;

use thiserror::Error;

use crate::box_geometry::GeometryError;
use crate::kitti_io::KittiError;

pub use config::{ScenarioConfig, SimConfig, WeatherSettings, DEFAULT_CONFIG_TOML};
pub use generate::{
    frame_seed, generate_dataset, labels_for_frame, read_manifest, FrameManifest, Manifest,
    LABEL_POINT_MARGIN, MANIFEST_FILE,
};
pub use lidar::{sensor_scene, simulate_lidar, simulate_sweep, HitSource, LidarConfig, LidarSweep, Obstacle};
pub use render::render_bev_png;
pub use timeline::{build_timeline, Role, SceneState, VehicleState};
pub use visibility::{occlusion_grade, visibility_filter, Visibility, MIN_RETURNS};
pub use weather::{Condition, TimeOfDay, WeatherPreset, WeatherSchedule, WeatherTable};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown weather preset {0:?}")]
    UnknownPreset(String),
    #[error("output directory {0} is not empty")]
    OutputNotEmpty(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Kitti(#[from] KittiError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
