//! A deterministic non-learned detector: ground-plane removal, Euclidean
//! clustering, principal-axis box fitting, and completion of partially seen
//! vehicles to a car-sized prior. Output is scored KITTI prediction records.

mod cluster;
mod fit;
mod ground;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::box_geometry::{box_to_label, Box3D, CameraRig, Dims, GeometryError};
use crate::kitti_io::{CalibrationSet, LabelRecord, PointCloud};

pub use cluster::cluster;
pub use fit::{complete_box, fit_box};
pub use ground::{fit_ground, remove_ground, GroundPlane, MIN_GROUND_POINTS};

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("cloud has {points} points, too few to fit a ground plane")]
    DegenerateCloud { points: usize },
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Points within this vertical distance of the ground plane are ground, m.
    pub ground_z_band: f64,
    /// Fraction of lowest points seeding the ground fit.
    pub ground_quantile: f64,
    pub cluster_radius: f64,
    pub min_cluster_points: usize,
    /// Point count at which the score saturates at 1.
    pub score_norm: f64,
    /// Car footprint and height that partial clusters are grown to.
    pub prior: Dims,
    /// A cluster thinner than this along its short axis may be a single face.
    pub face_depth: f64,
    /// Clusters whose footprint exceeds this length or whose height is
    /// below `min_height` are not vehicles.
    pub max_length: f64,
    pub min_height: f64,
    /// A box is suppressed when this fraction of its footprint (or of the
    /// other's, whichever is smaller) is covered by a higher-scoring box.
    pub nms_overlap: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            ground_z_band: 0.2,
            ground_quantile: 0.3,
            cluster_radius: 0.7,
            min_cluster_points: 15,
            score_norm: 200.0,
            prior: Dims::new(4.8, 1.9, 1.45),
            face_depth: 0.6,
            max_length: 8.0,
            min_height: 0.3,
            nms_overlap: 0.3,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let positive = [
            ("ground_z_band", self.ground_z_band),
            ("cluster_radius", self.cluster_radius),
            ("score_norm", self.score_norm),
            ("min_cluster_points", self.min_cluster_points as f64),
            ("prior.length", self.prior.length),
            ("prior.width", self.prior.width),
            ("prior.height", self.prior.height),
            ("face_depth", self.face_depth),
            ("max_length", self.max_length),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(DetectorError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.nms_overlap > 0.0 && self.nms_overlap <= 1.0) {
            return Err(DetectorError::InvalidConfig("nms_overlap must lie in (0, 1]".into()));
        }
        if !(self.ground_quantile > 0.0 && self.ground_quantile <= 1.0) {
            return Err(DetectorError::InvalidConfig("ground_quantile must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Detects cars in one LiDAR sweep and returns prediction records in the
/// camera frame (truncation and occlusion set to -1), highest score first.
/// Boxes that do not appear in the camera image are dropped, as are all
/// detections when the cloud is too small to find the ground.
pub fn detect_frame(
    cloud: &PointCloud,
    calib: &CalibrationSet,
    cfg: &DetectorConfig,
) -> Result<Vec<LabelRecord>, DetectorError> {
    let ground = match fit_ground(cloud, cfg) {
        Ok(plane) => plane,
        Err(DetectorError::DegenerateCloud { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let objects = ground::split_ground(cloud, &ground, cfg);
    let mut candidates = Vec::new();
    for members in cluster(&objects, cfg) {
        let points: Vec<_> = members.iter().map(|&i| objects.points[i]).collect();
        let fitted = fit_box(&points, cfg);
        if fitted.dims.length.max(fitted.dims.width) > cfg.max_length {
            continue;
        }
        let completed = complete_box(&fitted, &ground, cfg);
        if completed.dims.height >= cfg.min_height {
            candidates.push(completed);
        }
    }
    // a vehicle split into several clusters (rear face and roof, say) is
    // completed into overlapping boxes; keep the best supported one
    candidates.sort_by(|a, b| b.score.unwrap_or(0.0).total_cmp(&a.score.unwrap_or(0.0)));
    let mut kept: Vec<Box3D> = Vec::new();
    for cand in candidates {
        let footprint = cand.bev_polygon();
        let suppressed = kept.iter().any(|k| {
            let other = k.bev_polygon();
            let smaller = footprint.area().min(other.area());
            smaller > 0.0 && footprint.intersection_area(&other) / smaller > cfg.nms_overlap
        });
        if !suppressed {
            kept.push(cand);
        }
    }

    let rig = CameraRig::new(calib)?;
    let mut out = Vec::new();
    for completed in kept {
        let cam = rig.lidar_to_camera(&completed)?;
        let mut rec = match box_to_label(&cam, calib.p2()) {
            Ok(rec) => rec,
            Err(GeometryError::BehindCamera) => continue,
            Err(e) => return Err(e.into()),
        };
        if rec.truncation >= 1.0 {
            continue;
        }
        rec.truncation = -1.0;
        rec.occlusion = -1;
        out.push(rec);
    }
    out.sort_by(|a, b| {
        b.score
            .unwrap_or(0.0)
            .total_cmp(&a.score.unwrap_or(0.0))
            .then(a.location[2].total_cmp(&b.location[2]))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::box_geometry::{iou_3d, label_to_box};
    use crate::scenario_sim::{simulate_sweep, LidarConfig, Obstacle, WeatherPreset};

    #[test]
    fn finds_simulated_car() {
        let lidar = LidarConfig::default();
        let gt = crate::box_geometry::Box3D::new(
            [18.0, 0.0, 1.45 / 2.0 - lidar.mount_height],
            Dims::new(5.0, 1.95, 1.45),
            0.0,
            crate::box_geometry::Frame::KittiLidar,
        )
        .unwrap();
        let scene = [Obstacle { id: 1, bbox: gt.clone() }];
        let sweep = simulate_sweep(&scene, &lidar, &WeatherPreset::noiseless(), 1);
        let calib = CalibrationSet::generated_default();
        let preds = detect_frame(&sweep.cloud, &calib, &DetectorConfig::default()).unwrap();
        assert_eq!(preds.len(), 1);
        assert_eq!((preds[0].truncation, preds[0].occlusion), (-1.0, -1));
        let gt_cam = CameraRig::new(&calib).unwrap().lidar_to_camera(&gt).unwrap();
        let iou = iou_3d(&label_to_box(&preds[0]).unwrap(), &gt_cam).unwrap();
        assert!(iou > 0.7, "iou {iou}");
    }

    #[test]
    fn tiny_cloud_gives_nothing() {
        let cloud = PointCloud::default();
        let preds = detect_frame(&cloud, &CalibrationSet::generated_default(), &DetectorConfig::default()).unwrap();
        assert!(preds.is_empty());
    }

    #[test]
    fn deterministic() {
        let lidar = LidarConfig::default();
        let b = crate::box_geometry::Box3D::new(
            [25.0, 3.5, 1.45 / 2.0 - lidar.mount_height],
            Dims::new(5.0, 1.95, 1.45),
            0.1,
            crate::box_geometry::Frame::KittiLidar,
        )
        .unwrap();
        let sweep = simulate_sweep(&[Obstacle { id: 1, bbox: b }], &lidar, &WeatherPreset::noiseless(), 2);
        let calib = CalibrationSet::generated_default();
        let a = detect_frame(&sweep.cloud, &calib, &DetectorConfig::default()).unwrap();
        let again = detect_frame(&sweep.cloud, &calib, &DetectorConfig::default()).unwrap();
        assert_eq!(a, again);
    }
}
