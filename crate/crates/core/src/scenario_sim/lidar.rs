use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SceneState, SimError, WeatherPreset};
use crate::box_geometry::{carla_to_lidar, Box3D, Frame};
use crate::kitti_io::{Point, PointCloud};

const GROUND_REFLECTIVITY: f64 = 0.3;
const VEHICLE_REFLECTIVITY: f64 = 0.7;
/// Range noise is drawn from a normal distribution truncated at this many σ.
const NOISE_CLAMP: f64 = 4.0;

/// A spinning multi-beam sensor. Angles in degrees, distances in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub channels: u32,
    /// (lowest, highest) beam elevation.
    pub vertical_fov: [f64; 2],
    pub horizontal_resolution: f64,
    pub max_range: f64,
    /// Height of the optical centre above the road.
    pub mount_height: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            channels: 64,
            vertical_fov: [-24.8, 2.0],
            horizontal_resolution: 0.2,
            max_range: 120.0,
            mount_height: 1.73,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: &str| Err(SimError::InfeasibleConfig(format!("lidar: {msg}")));
        if self.channels < 1 {
            return fail("channels must be at least 1");
        }
        if !(self.max_range > 0.0) {
            return fail("max_range must be positive");
        }
        if !(self.horizontal_resolution > 0.0 && self.horizontal_resolution <= 360.0) {
            return fail("horizontal_resolution must lie in (0, 360]");
        }
        let [lo, hi] = self.vertical_fov;
        if !(lo <= hi && lo >= -90.0 && hi <= 90.0) {
            return fail("vertical_fov must be an ordered pair within [-90, 90]");
        }
        if !(self.mount_height > 0.0) {
            return fail("mount_height must be positive");
        }
        Ok(())
    }

    /// Beam elevations in radians, lowest first.
    pub fn elevations(&self) -> Vec<f64> {
        let [lo, hi] = self.vertical_fov;
        if self.channels == 1 {
            return vec![((lo + hi) / 2.0).to_radians()];
        }
        let step = (hi - lo) / (self.channels - 1) as f64;
        (0..self.channels)
            .map(|i| (lo + step * i as f64).to_radians())
            .collect()
    }

    pub fn azimuth_count(&self) -> usize {
        ((360.0 / self.horizontal_resolution).round() as usize).max(1)
    }

    /// Unit ray for a beam, azimuth counter-clockwise from +x (LiDAR frame).
    pub fn ray(&self, elevation: f64, azimuth_index: usize) -> Vector3<f64> {
        let az = (azimuth_index as f64 * 360.0 / self.azimuth_count() as f64).to_radians();
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = az.sin_cos();
        Vector3::new(ce * ca, ce * sa, se)
    }
}

/// A vehicle box in the sensor (KITTI LiDAR) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: u32,
    pub bbox: Box3D,
}

/// Every non-ego vehicle of `state`, placed relative to the ego's sensor.
pub fn sensor_scene(state: &SceneState, lidar: &LidarConfig) -> Vec<Obstacle> {
    let ego = state.ego();
    let ego_y = state.lateral(ego);
    state
        .vehicles
        .iter()
        .filter(|v| v.id != ego.id)
        .map(|v| {
            let carla = Box3D::new(
                [
                    v.s - ego.s,
                    state.lateral(v) - ego_y,
                    v.box_dims.height / 2.0 - lidar.mount_height,
                ],
                v.box_dims,
                v.yaw - ego.yaw,
                Frame::CarlaWorld,
            )
            .expect("vehicle dims are positive");
            Obstacle {
                id: v.id,
                bbox: carla_to_lidar(&carla).expect("frame is CarlaWorld"),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitSource {
    Ground,
    Vehicle(u32),
}

/// A point cloud with the surface each return came from, index-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarSweep {
    pub cloud: PointCloud,
    pub sources: Vec<HitSource>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Hit {
    pub range: f64,
    /// |cos| of the angle between the ray and the surface normal.
    pub incidence: f64,
    pub source: HitSource,
}

/// Distance along the unit ray `dir` from `origin` to the box surface and
/// the face normal there, or `None` when the ray misses or starts inside.
fn ray_box(dir: &Vector3<f64>, b: &Box3D) -> Option<(f64, Vector3<f64>)> {
    let axes = b.axes();
    let half = [b.dims.length / 2.0, b.dims.width / 2.0, b.dims.height / 2.0];
    let to_center = b.center_vec();
    let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut normal = Vector3::zeros();
    for (axis, h) in axes.iter().zip(half) {
        // origin sits at the sensor, so its local coordinate is -(c·axis)
        let o = -to_center.dot(axis);
        let d = dir.dot(axis);
        if d.abs() < 1e-12 {
            if o.abs() > h {
                return None;
            }
            continue;
        }
        let (t0, t1) = ((-h - o) / d, (h - o) / d);
        let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        if lo > t_near {
            t_near = lo;
            normal = *axis;
        }
        t_far = t_far.min(hi);
        if t_near > t_far {
            return None;
        }
    }
    (t_near > 0.0).then_some((t_near, normal))
}

/// Nearest surface along a ray from the sensor, within `max_range`.
pub(crate) fn cast(dir: &Vector3<f64>, obstacles: &[Obstacle], lidar: &LidarConfig) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    if dir.z < 0.0 {
        let range = -lidar.mount_height / dir.z;
        best = Some(Hit {
            range,
            incidence: -dir.z,
            source: HitSource::Ground,
        });
    }
    for ob in obstacles {
        if let Some((range, normal)) = ray_box(dir, &ob.bbox) {
            if best.is_none_or(|h| range < h.range) {
                best = Some(Hit {
                    range,
                    incidence: dir.dot(&normal).abs(),
                    source: HitSource::Vehicle(ob.id),
                });
            }
        }
    }
    best.filter(|h| h.range <= lidar.max_range)
}

/// Ray-casts one full revolution against the ground plane and `obstacles`,
/// then applies the preset's range noise, range-dependent dropout, and
/// intensity attenuation.
///
/// Each beam row owns a ChaCha8 stream keyed by (`seed`, row) and draws the
/// same two variates for every ray whether or not it hits, so two presets
/// run with one seed see identical underlying randomness.
pub fn simulate_sweep(
    obstacles: &[Obstacle],
    lidar: &LidarConfig,
    weather: &WeatherPreset,
    seed: u64,
) -> LidarSweep {
    let elevations = lidar.elevations();
    let azimuths = lidar.azimuth_count();
    let rows: Vec<Vec<(Point, HitSource)>> = elevations
        .par_iter()
        .enumerate()
        .map(|(row, &elevation)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(row as u64);
            let mut out = Vec::new();
            for a in 0..azimuths {
                let u: f64 = rng.random();
                let z: f64 = rng.sample(StandardNormal);
                let dir = lidar.ray(elevation, a);
                let Some(hit) = cast(&dir, obstacles, lidar) else {
                    continue;
                };
                let drop_p = weather.dropout_base
                    * (1.0 + weather.precipitation * hit.range / lidar.max_range);
                if u < drop_p {
                    continue;
                }
                let range = (hit.range
                    + weather.range_noise_sigma * z.clamp(-NOISE_CLAMP, NOISE_CLAMP))
                .max(0.0);
                let reflectivity = match hit.source {
                    HitSource::Ground => GROUND_REFLECTIVITY * (1.0 - 0.5 * weather.wetness),
                    HitSource::Vehicle(_) => VEHICLE_REFLECTIVITY,
                };
                let intensity = (reflectivity
                    * hit.incidence
                    * weather.intensity_scale
                    * (-weather.attenuation_coeff * hit.range).exp())
                .clamp(0.0, 1.0);
                let p = dir * range;
                out.push((
                    Point {
                        x: p.x as f32,
                        y: p.y as f32,
                        z: p.z as f32,
                        intensity: intensity as f32,
                    },
                    hit.source,
                ));
            }
            out
        })
        .collect();
    let (points, sources) = rows.into_iter().flatten().unzip();
    LidarSweep {
        cloud: PointCloud { points },
        sources,
    }
}

pub fn simulate_lidar(
    state: &SceneState,
    lidar: &LidarConfig,
    weather: &WeatherPreset,
    seed: u64,
) -> PointCloud {
    simulate_sweep(&sensor_scene(state, lidar), lidar, weather, seed).cloud
}
