//! Synthetic highway-overtake LiDAR dataset generation in KITTI layout, plus
//! KITTI-style 3D object detection evaluation (rotated-box IoU, AP11/AP40 and
//! recall at fixed IoU thresholds).
//!
//! The crate is organised as five layers:
//!
//! - [`kitti_io`]: readers, writers and validators for the on-disk dataset tree.
//! - [`box_geometry`]: oriented box algebra, frame conversions and IoU.
//! - [`scenario_sim`]: kinematic scenario, ray-cast LiDAR and dataset emission.
//! - [`eval_metrics`]: matching, precision/recall curves and the report.
//! - [`baseline_detector`]: a deterministic clustering detector that closes the
//!   generate → detect → evaluate loop without any learned model.

pub mod baseline_detector;
pub mod box_geometry;
pub mod eval_metrics;
pub mod kitti_io;
pub mod scenario_sim;
