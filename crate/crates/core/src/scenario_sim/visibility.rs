use rayon::prelude::*;

use super::lidar::cast;
use super::{sensor_scene, HitSource, LidarConfig, Obstacle, SceneState};
use crate::box_geometry::{normalize_angle, Box3D};

/// A vehicle needs at least this many LiDAR returns to receive a label.
pub const MIN_RETURNS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Visibility {
    pub visible: bool,
    pub returns: usize,
    /// 0 fully visible, 1 partly occluded, 2 largely occluded.
    pub occlusion: i8,
}

/// Id given to a target box that is not one of the scene's vehicles.
const PROBE_ID: u32 = u32::MAX;

/// Counts noise-free returns on `target` (a KITTI LiDAR box) when cast
/// against `state`'s vehicles, and grades its occlusion.
pub fn visibility_filter(state: &SceneState, lidar: &LidarConfig, target: &Box3D) -> Visibility {
    let mut scene = sensor_scene(state, lidar);
    let id = match scene.iter().find(|o| same_box(&o.bbox, target)) {
        Some(o) => o.id,
        None => {
            scene.push(Obstacle {
                id: PROBE_ID,
                bbox: target.clone(),
            });
            PROBE_ID
        }
    };
    let returns = count_returns(&scene, lidar, id);
    Visibility {
        visible: returns >= MIN_RETURNS,
        returns,
        occlusion: occlusion_grade(&scene, id),
    }
}

fn same_box(a: &Box3D, b: &Box3D) -> bool {
    a.frame == b.frame && a.center == b.center && a.dims == b.dims && a.yaw == b.yaw
}

fn count_returns(scene: &[Obstacle], lidar: &LidarConfig, id: u32) -> usize {
    let azimuths = lidar.azimuth_count();
    lidar
        .elevations()
        .par_iter()
        .map(|&el| {
            (0..azimuths)
                .filter(|&a| {
                    cast(&lidar.ray(el, a), scene, lidar)
                        .is_some_and(|h| h.source == HitSource::Vehicle(id))
                })
                .count()
        })
        .sum()
}

/// Azimuth interval covered by a box's footprint, relative to `reference`.
fn azimuth_span(b: &Box3D, reference: f64) -> (f64, f64) {
    let corners = b.corners();
    let angles = corners[..4]
        .iter()
        .map(|c| normalize_angle(c.y.atan2(c.x) - reference));
    angles.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
        (lo.min(a), hi.max(a))
    })
}

fn center_range(b: &Box3D) -> f64 {
    b.center[0].hypot(b.center[1])
}

/// Grades how much of the target's azimuth span is covered by boxes whose
/// centres are nearer to the sensor: 0 below 10 %, 1 below 50 %, else 2.
/// Returns 0 when `target_id` is not in `scene`.
pub fn occlusion_grade(scene: &[Obstacle], target_id: u32) -> i8 {
    let Some(target) = scene.iter().find(|o| o.id == target_id) else {
        return 0;
    };
    let reference = target.bbox.center[1].atan2(target.bbox.center[0]);
    let (lo, hi) = azimuth_span(&target.bbox, reference);
    let width = hi - lo;
    if width <= 0.0 {
        return 0;
    }
    let mut blocked: Vec<(f64, f64)> = scene
        .iter()
        .filter(|o| o.id != target_id && center_range(&o.bbox) < center_range(&target.bbox))
        .map(|o| azimuth_span(&o.bbox, reference))
        .filter(|(a, b)| b - a < std::f64::consts::PI)
        .map(|(a, b)| (a.max(lo), b.min(hi)))
        .filter(|(a, b)| a < b)
        .collect();
    blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let mut reach = lo;
    for (a, b) in blocked {
        let start = a.max(reach);
        if b > start {
            covered += b - start;
            reach = b;
        }
    }
    let fraction = covered / width;
    if fraction < 0.1 {
        0
    } else if fraction < 0.5 {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::box_geometry::{Dims, Frame};
    use crate::scenario_sim::{build_timeline, Role, ScenarioConfig};

    fn ego_only() -> SceneState {
        let timeline = build_timeline(&ScenarioConfig {
            total_recorded_frames: 1,
            test_val_split: [1, 0],
            ..Default::default()
        })
        .unwrap();
        let mut state = timeline[0].clone();
        state.vehicles.retain(|v| v.role == Role::Ego);
        state
    }

    fn car(x: f64, y: f64) -> Box3D {
        Box3D::new([x, y, -1.0], Dims::new(4.5, 1.9, 1.5), 0.0, Frame::KittiLidar).unwrap()
    }

    #[test]
    fn lone_vehicle_is_visible() {
        let v = visibility_filter(&ego_only(), &LidarConfig::default(), &car(10.0, 0.0));
        assert!(v.visible);
        assert!(v.returns > 100);
        assert_eq!(v.occlusion, 0);
    }

    #[test]
    fn beyond_range_is_invisible() {
        let v = visibility_filter(&ego_only(), &LidarConfig::default(), &car(200.0, 0.0));
        assert!(!v.visible);
        assert_eq!(v.returns, 0);
    }

    #[test]
    fn hidden_behind_another() {
        let scene = vec![
            Obstacle { id: 1, bbox: car(10.0, 0.0) },
            Obstacle { id: 2, bbox: car(30.0, 0.0) },
        ];
        assert_eq!(occlusion_grade(&scene, 2), 2);
        assert_eq!(occlusion_grade(&scene, 1), 0);
        let lidar = LidarConfig::default();
        let returns = count_returns(&scene, &lidar, 2);
        // only rays passing above the near roof can reach it
        assert!(returns < count_returns(&scene[1..], &lidar, 2));
    }

    #[test]
    fn partial_overlap_grades_one() {
        // the near car covers about a quarter of the far one's azimuth span
        let scene = vec![
            Obstacle { id: 1, bbox: car(10.0, 1.3) },
            Obstacle { id: 2, bbox: car(20.0, 0.0) },
        ];
        assert_eq!(occlusion_grade(&scene, 2), 1);
    }

    #[test]
    fn side_by_side_is_unoccluded() {
        let scene = vec![
            Obstacle { id: 1, bbox: car(10.0, 3.5) },
            Obstacle { id: 2, bbox: car(12.0, -3.5) },
        ];
        assert_eq!(occlusion_grade(&scene, 2), 0);
    }
}
